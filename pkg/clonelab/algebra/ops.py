"""Finite operation tables, minors, composition and bounded clone generation.

An operation of arity n over E_k = {0, ..., k-1} is stored as a flat table of
k**n values. The tuple (x1, ..., xn) sits at index sum(xi * k**(n - i)), so x1 is
the most significant digit and table order is lexicographic order of tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
import numpy.typing as npt

from clonelab.algebra.parallel import map_batches
from clonelab.config import settings
from clonelab.errors import BudgetExceeded, ClonelabError
from clonelab.logging import get_logger

logger = get_logger(__name__)

IntArray = npt.NDArray[np.int64]

# Upper bound on int64 cells materialized per vectorized chunk
_CHUNK_CELLS = 2_000_000


class OperationError(ClonelabError):
    """Raised for malformed operations, variable maps and arity or domain mismatches."""
    pass


class EnumerationCapExceeded(BudgetExceeded):
    """Raised when a candidate space is larger than the enumeration cap."""
    pass


class Symmetry(str, Enum):
    """Symmetry classes used to restrict candidate enumeration."""

    NONE = "none"
    CYCLIC = "cyclic"
    FULLY_SYMMETRIC = "fully_symmetric"


# ---------------------------------------------------------------------------
# Index helpers
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def tuple_grid(k: int, r: int) -> IntArray:
    """All r-tuples over E_k as rows of a (k**r, r) array, in table index order."""
    if r == 0:
        grid = np.zeros((1, 0), dtype=np.int64)
    else:
        grid = np.indices((k,) * r, dtype=np.int64).reshape(r, -1).T.copy()
    grid.setflags(write=False)
    return grid


@lru_cache(maxsize=256)
def place_values(k: int, n: int) -> IntArray:
    """Positional weights k**(n-1), ..., k, 1 of the index convention."""
    weights = np.array([k ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    weights.setflags(write=False)
    return weights


def encode_rows(k: int, rows: IntArray) -> IntArray:
    """Table indices of tuples stored along the last axis of ``rows``."""
    return np.asarray(rows @ place_values(k, rows.shape[-1]), dtype=np.int64)


def decode_index(k: int, n: int, index: int) -> Tuple[int, ...]:
    """The n-tuple stored at ``index`` under the index convention."""
    digits = []
    for _ in range(n):
        index, digit = divmod(index, k)
        digits.append(digit)
    return tuple(reversed(digits))


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


class Operation:
    """
    A total operation E_k^n -> E_k given by its value table.

    Instances are immutable: the table is a read-only int64 array. Equality and
    hashing go through (domain size, arity, table bytes), so operations can be
    used as dictionary keys and deduplicated by table.
    """

    __slots__ = ("domain_size", "arity", "table", "_key")

    domain_size: int
    arity: int
    table: IntArray
    _key: Tuple[int, int, bytes]

    def __init__(self, domain_size: int, arity: int, table: Iterable[int] | IntArray):
        if domain_size < 1:
            raise OperationError(f"Domain size must be positive, got {domain_size}")
        if arity < 1:
            raise OperationError(
                f"Arity must be at least 1 (nullary operations are not represented), got {arity}"
            )
        values = np.array(list(table) if not isinstance(table, np.ndarray) else table, dtype=np.int64)
        values = values.reshape(-1)
        expected = domain_size**arity
        if values.size != expected:
            raise OperationError(
                f"Table of an arity-{arity} operation over E_{domain_size} needs {expected} "
                f"entries, got {values.size}"
            )
        if values.min() < 0 or values.max() >= domain_size:
            raise OperationError(f"Table entries must lie in E_{domain_size}")
        self._setup(domain_size, arity, values)

    def _setup(self, domain_size: int, arity: int, values: IntArray) -> None:
        values.setflags(write=False)
        self.domain_size = domain_size
        self.arity = arity
        self.table = values
        self._key = (domain_size, arity, values.tobytes())

    @classmethod
    def trusted(cls, domain_size: int, arity: int, values: IntArray) -> "Operation":
        """Wrap a table produced by this module's own gathers, skipping validation."""
        op = cls.__new__(cls)
        op._setup(domain_size, arity, np.array(values, dtype=np.int64).reshape(-1))
        return op

    @classmethod
    def from_function(cls, domain_size: int, arity: int, fn: Callable[..., int]) -> "Operation":
        """Tabulate ``fn`` over all arity-tuples in index order."""
        values = [fn(*args) for args in itertools.product(range(domain_size), repeat=arity)]
        return cls(domain_size, arity, values)

    @property
    def key(self) -> Tuple[int, int, bytes]:
        return self._key

    def values(self) -> List[int]:
        """The table as a list of Python ints."""
        return [int(v) for v in self.table]

    def __call__(self, *args: int) -> int:
        return apply(self, args)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Operation):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __lt__(self, other: "Operation") -> bool:
        return (self.domain_size, self.arity, self.values()) < (
            other.domain_size,
            other.arity,
            other.values(),
        )

    def __repr__(self) -> str:
        values = self.values()
        shown = ",".join(str(v) for v in values[:27]) + (",..." if len(values) > 27 else "")
        return f"Operation(k={self.domain_size}, n={self.arity}, table=[{shown}])"


@dataclass(frozen=True)
class VarMap:
    """A variable map sigma: E_n -> E_r, stored as the sequence (sigma(0), ..., sigma(n-1))."""

    source_arity: int
    target_arity: int
    mapping: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping", tuple(int(i) for i in self.mapping))
        if self.source_arity < 1 or self.target_arity < 1:
            raise OperationError("Variable maps need positive source and target arities")
        if len(self.mapping) != self.source_arity:
            raise OperationError(
                f"Variable map has {len(self.mapping)} entries, expected {self.source_arity}"
            )
        if any(i < 0 or i >= self.target_arity for i in self.mapping):
            raise OperationError(f"Variable map entries must lie below {self.target_arity}")

    @classmethod
    def of(cls, mapping: Sequence[int], target_arity: Optional[int] = None) -> "VarMap":
        """Build a map from its entries; the target arity defaults to max entry + 1."""
        entries = tuple(int(i) for i in mapping)
        if target_arity is None:
            target_arity = max(entries) + 1 if entries else 0
        return cls(len(entries), target_arity, entries)

    @classmethod
    def identity(cls, n: int) -> "VarMap":
        return cls(n, n, tuple(range(n)))

    def then(self, other: "VarMap") -> "VarMap":
        """The composite i -> other(self(i)); minor(minor(f, self), other) = minor(f, self.then(other))."""
        if other.source_arity != self.target_arity:
            raise OperationError("Variable maps are not composable")
        return VarMap(self.source_arity, other.target_arity, tuple(other.mapping[i] for i in self.mapping))

    def is_bijective(self) -> bool:
        return self.source_arity == self.target_arity and len(set(self.mapping)) == self.source_arity


# ---------------------------------------------------------------------------
# Basic operations
# ---------------------------------------------------------------------------


def make_projection(k: int, n: int, i: int) -> Operation:
    """
    The projection pr^n_i onto coordinate i (1-based).

    Args:
        k: Domain size
        n: Arity
        i: Coordinate, 1 <= i <= n

    Returns:
        The projection operation
    """
    if k < 1 or n < 1:
        raise OperationError(f"Invalid domain size {k} or arity {n}")
    if not 1 <= i <= n:
        raise OperationError(f"Projection index {i} out of range 1..{n}")
    return Operation.trusted(k, n, tuple_grid(k, n)[:, i - 1])


def constant_operation(k: int, n: int, value: int) -> Operation:
    """The constant operation of arity n with the given value."""
    if not 0 <= value < k:
        raise OperationError(f"Constant {value} outside E_{k}")
    return Operation(k, n, np.full(k**n, value, dtype=np.int64))


def apply(f: Operation, args: Sequence[int]) -> int:
    """Evaluate ``f`` at ``args`` by table lookup."""
    if len(args) != f.arity:
        raise OperationError(f"Expected {f.arity} arguments, got {len(args)}")
    index = 0
    for a in args:
        if not 0 <= a < f.domain_size:
            raise OperationError(f"Argument {a} outside E_{f.domain_size}")
        index = index * f.domain_size + int(a)
    return int(f.table[index])


@lru_cache(maxsize=4096)
def minor_indices(k: int, sigma: VarMap) -> IntArray:
    """Source table indices read by minor(f, sigma) for every target tuple."""
    grid = tuple_grid(k, sigma.target_arity)
    indices = encode_rows(k, grid[:, list(sigma.mapping)])
    indices.setflags(write=False)
    return indices


def minor(f: Operation, sigma: VarMap) -> Operation:
    """
    The minor g(x_0, ..., x_{r-1}) = f(x_sigma(0), ..., x_sigma(n-1)).

    Args:
        f: Operation of arity n
        sigma: Variable map E_n -> E_r

    Returns:
        Operation of arity r
    """
    if sigma.source_arity != f.arity:
        raise OperationError(
            f"Variable map has source arity {sigma.source_arity}, operation has arity {f.arity}"
        )
    return Operation.trusted(f.domain_size, sigma.target_arity, f.table[minor_indices(f.domain_size, sigma)])


def compose(f: Operation, gs: Sequence[Operation]) -> Operation:
    """
    The composition h(x) = f(g_1(x), ..., g_n(x)).

    Args:
        f: Operation of arity n
        gs: n operations of a common arity m over the same domain

    Returns:
        Operation of arity m
    """
    if len(gs) != f.arity:
        raise OperationError(f"Composition needs {f.arity} inner operations, got {len(gs)}")
    k = f.domain_size
    m = gs[0].arity
    for g in gs:
        if g.domain_size != k:
            raise OperationError("Composition over different domains")
        if g.arity != m:
            raise OperationError("Inner operations of a composition must share their arity")
    stacked = np.stack([g.table for g in gs])
    indices = place_values(k, f.arity) @ stacked
    return Operation.trusted(k, m, f.table[indices])


def diagonal_indices(k: int, n: int) -> IntArray:
    """Table indices of the constant tuples (x, ..., x)."""
    return np.arange(k, dtype=np.int64) * int(place_values(k, n).sum())


def is_idempotent(f: Operation) -> bool:
    """True iff f(x, ..., x) = x for every x."""
    diagonal = diagonal_indices(f.domain_size, f.arity)
    return bool(np.array_equal(f.table[diagonal], np.arange(f.domain_size)))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


@lru_cache(maxsize=128)
def orbit_labels(k: int, n: int, symmetry: Symmetry) -> Tuple[IntArray, int]:
    """
    Orbit label of every table index under the symmetry group.

    Orbits are numbered by their least member, so orbit 0 holds (0, ..., 0).

    Returns:
        (labels, orbit count)
    """
    grid = tuple_grid(k, n)
    if symmetry is Symmetry.NONE:
        reps = np.arange(k**n, dtype=np.int64)
    elif symmetry is Symmetry.CYCLIC:
        reps = encode_rows(k, grid)
        for shift in range(1, n):
            reps = np.minimum(reps, encode_rows(k, np.roll(grid, -shift, axis=1)))
    else:
        reps = encode_rows(k, np.sort(grid, axis=1))
    _, labels = np.unique(reps, return_inverse=True)
    labels = labels.astype(np.int64).reshape(-1)
    labels.setflags(write=False)
    return labels, int(labels.max()) + 1


def count_candidates(k: int, n: int, symmetry: Symmetry = Symmetry.NONE) -> int:
    """Size of the candidate space k**(number of orbits)."""
    _, orbits = orbit_labels(k, n, symmetry)
    return int(k**orbits)


def candidate_tables(
    k: int,
    n: int,
    symmetry: Symmetry = Symmetry.NONE,
    *,
    cap: Optional[int] = None,
    batch_size: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> Iterator[IntArray]:
    """
    Stream all tables of the symmetry class in batches of rows.

    Each candidate assigns one value per orbit; orbit 0 is the most significant
    digit of the candidate number. Without ``rng`` batches come in candidate
    order; with it the batch order is shuffled.

    Raises:
        EnumerationCapExceeded: If the candidate count exceeds the cap
    """
    cap = settings.enumeration_cap if cap is None else cap
    labels, orbits = orbit_labels(k, n, symmetry)
    total = k**orbits
    if total > cap:
        raise EnumerationCapExceeded(
            f"{total} candidate operations (k={k}, n={n}, {symmetry.value}) exceed the cap {cap}",
            budget=cap,
            used=total,
        )
    size = batch_size or settings.batch_size
    weights = place_values(k, orbits)
    starts = list(range(0, total, size))
    if rng is not None:
        rng.shuffle(starts)
    for start in starts:
        numbers = np.arange(start, min(start + size, total), dtype=np.int64)
        digits = (numbers[:, None] // weights[None, :]) % k
        yield digits[:, labels]


def enumerate_operations(
    k: int,
    n: int,
    symmetry: Symmetry = Symmetry.NONE,
    predicate: Optional[Callable[[Operation], bool]] = None,
    *,
    cap: Optional[int] = None,
) -> Iterator[Operation]:
    """
    Yield the n-ary operations over E_k of a symmetry class that satisfy ``predicate``.

    Args:
        k: Domain size
        n: Arity
        symmetry: Candidate restriction (none, cyclic or fully symmetric)
        predicate: Optional filter; ``None`` accepts everything
        cap: Enumeration cap, defaults to ``settings.enumeration_cap``

    Returns:
        Stream of operations in candidate order
    """
    for batch in candidate_tables(k, n, symmetry, cap=cap):
        for row in batch:
            op = Operation.trusted(k, n, row)
            if predicate is None or predicate(op):
                yield op


# ---------------------------------------------------------------------------
# Clone generation
# ---------------------------------------------------------------------------


class WorkBudget:
    """Counter shared by the chunks of a budget-limited computation."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0
        self.hit = False

    def take(self, amount: int) -> bool:
        if self.used + amount > self.limit:
            self.hit = True
            return False
        self.used += amount
        return True


def new_index_tuples(old: int, total: int, arity: int, chunk: int) -> Iterator[IntArray]:
    """
    Index tuples over range(total) that use at least one index >= ``old``.

    Each such tuple is produced exactly once: position j holds the first new
    index, earlier positions are old and later positions are unrestricted.
    """
    chunk = max(1, chunk)
    for j in range(arity):
        ranges = [range(old)] * j + [range(old, total)] + [range(total)] * (arity - j - 1)
        if any(len(r) == 0 for r in ranges):
            continue
        product = itertools.product(*ranges)
        while True:
            block = list(itertools.islice(product, chunk))
            if not block:
                break
            yield np.array(block, dtype=np.int64).reshape(-1, arity)


def apply_rowwise(g: Operation, rows: IntArray, combos: IntArray) -> IntArray:
    """
    Apply ``g`` coordinatewise to the rows selected by each index tuple.

    Args:
        g: Operation of arity a
        rows: (N, L) array of value vectors over E_k
        combos: (c, a) index tuples into ``rows``

    Returns:
        (c, L) array whose row i is g applied to rows[combos[i, 0]], ..., rows[combos[i, a-1]]
    """
    selected = rows[combos]
    indices = np.einsum("cal,a->cl", selected, place_values(g.domain_size, g.arity))
    return np.asarray(g.table[indices])


def _bounded_tuples(work: WorkBudget, old: int, total: int, arity: int, chunk: int) -> Iterator[IntArray]:
    for combos in new_index_tuples(old, total, arity, chunk):
        if not work.take(len(combos)):
            return
        yield combos


@dataclass
class CloneClosure:
    """Result of a bounded clone generation run."""

    domain_size: int
    max_arity: int
    layers: Dict[int, List[Operation]]
    exhausted: bool
    produced: int
    compositions: int = 0
    witness: Optional[Operation] = None

    def operations(self) -> List[Operation]:
        """All generated operations, by ascending arity."""
        return [op for arity in sorted(self.layers) for op in self.layers[arity]]

    def __contains__(self, op: object) -> bool:
        return isinstance(op, Operation) and op in self.layers.get(op.arity, [])

    def __len__(self) -> int:
        return sum(len(layer) for layer in self.layers.values())


class _Layer:
    """The m-ary members of a clone, grown from the projections and the m-ary generators."""

    def __init__(
        self,
        k: int,
        m: int,
        tables: WorkBudget,
        stop_when: Optional[Callable[[Operation], bool]],
    ):
        self.k = k
        self.m = m
        self.tables = tables
        self.stop_when = stop_when
        self.rows: List[IntArray] = []
        self.seen: Set[bytes] = set()
        self.witness: Optional[Operation] = None

    def add(self, row: IntArray) -> bool:
        """Record ``row`` if new; True when generation has to stop."""
        key = row.tobytes()
        if key in self.seen:
            return False
        if not self.tables.take(1):
            return True
        self.seen.add(key)
        self.rows.append(row.copy())
        if self.stop_when is not None:
            op = Operation.trusted(self.k, self.m, row)
            if self.stop_when(op):
                self.witness = op
                return True
        return False

    def close(self, gens: Sequence[Operation], compositions: WorkBudget) -> bool:
        """Apply the generators until no new table appears; False when stopped early."""
        seeds = [make_projection(self.k, self.m, i).table for i in range(1, self.m + 1)]
        seeds += [g.table for g in gens if g.arity == self.m]
        if any(self.add(row) for row in seeds):
            return False
        old = 0
        while old < len(self.rows):
            frontier_end = len(self.rows)
            members = np.stack(self.rows)
            for g in gens:
                chunk = _CHUNK_CELLS // (g.arity * self.k**self.m)
                stream = _bounded_tuples(compositions, old, frontier_end, g.arity, chunk)

                def evaluate(combos: IntArray, g: Operation = g, members: IntArray = members) -> IntArray:
                    return np.unique(apply_rowwise(g, members, combos), axis=0)

                for tables in map_batches(evaluate, stream):
                    if any(self.add(row) for row in tables):
                        return False
                if compositions.hit:
                    return False
            old = frontier_end
        return True


def generate_clone(
    generators: Iterable[Operation],
    max_arity: int,
    budget: Optional[int] = None,
    *,
    domain_size: Optional[int] = None,
    stop_when: Optional[Callable[[Operation], bool]] = None,
) -> CloneClosure:
    """
    Breadth-first closure of generators and projections under composition.

    Each arity m <= max_arity is closed on its own: the m-ary projections and
    m-ary generators are the seeds, and the generators are applied to m-ary
    members until no new table appears. Every round only evaluates argument
    tuples that involve a member found in the previous round. Seeds are tested
    against ``stop_when`` before any composition is evaluated, and with a
    ``stop_when`` the top arity is closed first.

    Args:
        generators: Generating operations over a common domain
        max_arity: Largest arity to close
        budget: Number of distinct tables allowed over all arities, defaults to ``settings.clone_budget``
        domain_size: Required when ``generators`` is empty
        stop_when: Optional predicate; generation stops at the first member satisfying it

    Returns:
        CloneClosure whose ``exhausted`` flag tells whether every arity reached its fixed point.
        Evaluated compositions are capped by ``settings.enumeration_cap``; hitting the cap
        also leaves the closure unexhausted.
    """
    gens = list(dict.fromkeys(generators))
    sizes = {g.domain_size for g in gens}
    if domain_size is not None:
        sizes.add(domain_size)
    if len(sizes) != 1:
        raise OperationError("Generators must share one domain size (pass domain_size when there are none)")
    k = sizes.pop()
    if max_arity < 1:
        raise OperationError("max_arity must be at least 1")

    tables = WorkBudget(settings.clone_budget if budget is None else budget)
    compositions = WorkBudget(settings.enumeration_cap)
    layers: Dict[int, List[Operation]] = {}
    witness: Optional[Operation] = None
    complete = True

    arities = range(max_arity, 0, -1) if stop_when is not None else range(1, max_arity + 1)
    for m in arities:
        layer = _Layer(k, m, tables, stop_when)
        closed = layer.close(gens, compositions)
        layers[m] = [Operation.trusted(k, m, row) for row in layer.rows]
        logger.debug("Clone layer closed", arity=m, members=len(layer.rows), closed=closed)
        if not closed:
            witness = layer.witness
            complete = False
            break

    logger.info(
        "Clone generation finished",
        domain_size=k,
        max_arity=max_arity,
        members=sum(len(v) for v in layers.values()),
        tables=tables.used,
        compositions=compositions.used,
        exhausted=complete,
        stopped_early=witness is not None,
    )
    return CloneClosure(
        domain_size=k,
        max_arity=max_arity,
        layers=layers,
        exhausted=complete,
        produced=tables.used,
        compositions=compositions.used,
        witness=witness,
    )
