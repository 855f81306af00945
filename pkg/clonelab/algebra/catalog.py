"""Named operations and structures used throughout the workbench."""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from clonelab.algebra.ops import Operation, OperationError, make_projection
from clonelab.algebra.rel import Relation, RelationError, Structure


# ---------------------------------------------------------------------------
# Boolean operations
# ---------------------------------------------------------------------------


def boolean_and(n: int = 2) -> Operation:
    """x_1 ∧ ... ∧ x_n."""
    return Operation.from_function(2, n, lambda *xs: int(all(xs)))


def boolean_or(n: int = 2) -> Operation:
    return Operation.from_function(2, n, lambda *xs: int(any(xs)))


def xor(n: int = 2) -> Operation:
    """x_1 ⊕ ... ⊕ x_n."""
    return Operation.from_function(2, n, lambda *xs: sum(xs) % 2)


def boolean_majority() -> Operation:
    return Operation.from_function(2, 3, lambda x, y, z: int(x + y + z >= 2))


def negation() -> Operation:
    return Operation(2, 1, [1, 0])


# ---------------------------------------------------------------------------
# Operations over E_k
# ---------------------------------------------------------------------------


def min_operation(k: int = 3, n: int = 2) -> Operation:
    """The n-ary minimum with respect to 0 < 1 < ... < k-1."""
    return Operation.from_function(k, n, lambda *xs: min(xs))


def affine_malcev(k: int = 3) -> Operation:
    """x - y + z mod k."""
    return Operation.from_function(k, 3, lambda x, y, z: (x - y + z) % k)


def dual_discriminator(k: int = 3) -> Operation:
    """dd(x, y, z) = y if y = z, else x."""
    return Operation.from_function(k, 3, lambda x, y, z: y if y == z else x)


def _rainbow(x: int, y: int, z: int) -> bool:
    return len({x, y, z}) == 3


def symmetric_majority(c: int, k: int = 3) -> Operation:
    """The majority operation that returns ``c`` on every triple of pairwise distinct values."""
    if not 0 <= c < k:
        raise OperationError(f"Rainbow value {c} outside E_{k}")

    def value(x: int, y: int, z: int) -> int:
        if _rainbow(x, y, z):
            return c
        return y if y == z else x

    return Operation.from_function(k, 3, value)


def symmetric_minority(c: int, k: int = 3) -> Operation:
    """The minority operation that returns ``c`` on every triple of pairwise distinct values."""
    if not 0 <= c < k:
        raise OperationError(f"Rainbow value {c} outside E_{k}")

    def value(x: int, y: int, z: int) -> int:
        if _rainbow(x, y, z):
            return c
        if x == y:
            return z
        return x if y == z else y

    return Operation.from_function(k, 3, value)


def identity(k: int) -> Operation:
    return make_projection(k, 1, 1)


NAMED_OPERATIONS = {
    "and": lambda: boolean_and(2),
    "and2": lambda: boolean_and(2),
    "or2": lambda: boolean_or(2),
    "xor2": lambda: xor(2),
    "xor3": lambda: xor(3),
    "bmaj": boolean_majority,
    "not": negation,
    "min3": lambda: min_operation(3, 2),
    "malcev3": lambda: affine_malcev(3),
    "dualdisc3": lambda: dual_discriminator(3),
    "symmaj3": lambda: symmetric_majority(0, 3),
    "symmin3": lambda: symmetric_minority(0, 3),
}


def named_operation(name: str) -> Operation:
    """Look up one of ``NAMED_OPERATIONS``."""
    try:
        return NAMED_OPERATIONS[name]()
    except KeyError:
        raise OperationError(f"Unknown operation {name!r}; known: {', '.join(sorted(NAMED_OPERATIONS))}") from None


# ---------------------------------------------------------------------------
# Structures
# ---------------------------------------------------------------------------


def one_element_structure() -> Structure:
    """C_1 = ({0}; {(0,0)})."""
    return Structure(1, [("R", Relation(1, 2, [(0, 0)]))])


def cycle_structure(p: int) -> Structure:
    """The directed cycle C_p with edge relation R = {(0,1), ..., (p-2,p-1), (p-1,0)}."""
    if p < 1:
        raise RelationError("Cycles need at least one vertex")
    return Structure(p, [("R", Relation(p, 2, [(i, (i + 1) % p) for i in range(p)]))])


def idempotent_structure(n: int) -> Structure:
    """I_n = (E_n; {0}, ..., {n-1}) with relations named u0, ..., u{n-1}."""
    if n < 2:
        raise RelationError("I_n needs n >= 2")
    return Structure(n, [(f"u{a}", Relation(n, 1, [(a,)])) for a in range(n)])


def b2() -> Structure:
    """({0,1}; {0}, {1}, {(0,1),(1,0),(1,1)})."""
    return Structure(
        2,
        [
            ("zero", Relation(2, 1, [(0,)])),
            ("one", Relation(2, 1, [(1,)])),
            ("R", Relation(2, 2, [(0, 1), (1, 0), (1, 1)])),
        ],
    )


def symmetric_path() -> Structure:
    """The undirected path 0 - 1 - 2."""
    return Structure(3, [("E", Relation(3, 2, [(0, 1), (1, 0), (1, 2), (2, 1)]))])


def loop_with_pendants() -> Structure:
    """A loop at 0 with undirected pendant edges to 1 and 2."""
    return Structure(3, [("E", Relation(3, 2, [(0, 0), (0, 1), (1, 0), (0, 2), (2, 0)]))])


K21_LABELS: Tuple[str, ...] = tuple(str(i) for i in range(11)) + tuple("abcdefghij")

_K21_R = ["0 1 2", "5 6 7", "8 9 10", "e b a", "d g i", "f h c"]
_K21_S = ["1 4", "2 3", "5 6", "7 8", "j e", "b c", "a d", "i f"]


def permutation_from_cycles(labels: Sequence[str], cycles: Sequence[str]) -> List[int]:
    """The permutation of range(len(labels)) written in cycle notation over the labels."""
    position: Dict[str, int] = {label: i for i, label in enumerate(labels)}
    image = list(range(len(labels)))
    for cycle in cycles:
        members = [position[label] for label in cycle.split()]
        for a, b in zip(members, members[1:] + members[:1]):
            image[a] = b
    return image


def permutation_graph(image: Sequence[int]) -> Relation:
    """{(x, image(x))}, fixed points included."""
    return Relation(len(image), 2, [(x, y) for x, y in enumerate(image)])


@lru_cache(maxsize=1)
def k21() -> Structure:
    """The 21-element structure (K; R, S) with R and S the graphs of two permutations r and s."""
    r = permutation_from_cycles(K21_LABELS, _K21_R)
    s = permutation_from_cycles(K21_LABELS, _K21_S)
    return Structure(len(K21_LABELS), [("R", permutation_graph(r)), ("S", permutation_graph(s))], K21_LABELS)


NAMED_STRUCTURES = {
    "b2": b2,
    "c1": one_element_structure,
    "c2": lambda: cycle_structure(2),
    "c3": lambda: cycle_structure(3),
    "c4": lambda: cycle_structure(4),
    "i2": lambda: idempotent_structure(2),
    "i3": lambda: idempotent_structure(3),
    "k21": k21,
    "p3": symmetric_path,
    "loop3": loop_with_pendants,
}
