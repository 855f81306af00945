"""clonelab - a workbench for clones, minor conditions and pp-constructions over small finite domains."""

__version__ = "1.0.0"
