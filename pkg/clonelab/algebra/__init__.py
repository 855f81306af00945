"""Algebraic core: operations, relations, minor conditions, constructions and pp-constructions."""
