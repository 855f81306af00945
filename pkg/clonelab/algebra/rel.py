"""Relations, structures, the Pol/Inv connection and the essential/critical relation machinery."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from math import prod
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import networkx as nx
import numpy as np
import numpy.typing as npt

from clonelab.algebra.groups import AbelianGroup, small_abelian_groups
from clonelab.algebra.ops import (
    EnumerationCapExceeded,
    IntArray,
    Operation,
    Symmetry,
    WorkBudget,
    apply_rowwise,
    candidate_tables,
    encode_rows,
    new_index_tuples,
    place_values,
    tuple_grid,
)
from clonelab.algebra.parallel import map_batches
from clonelab.config import settings
from clonelab.errors import BudgetExceeded, ClonelabError
from clonelab.logging import get_logger

logger = get_logger(__name__)

BoolArray = npt.NDArray[np.bool_]
Tuples = FrozenSet[Tuple[int, ...]]

_CHUNK_CELLS = 2_000_000
_MAX_CODE = 2**62


class RelationError(ClonelabError):
    """Raised for malformed relations or structures and violated preconditions."""
    pass


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


class Relation:
    """
    A finite relation of arity m over E_k.

    Tuples are kept as a frozenset; ``rows`` holds them as a lexicographically
    sorted array and ``codes`` as their sorted table indices.
    """

    __slots__ = ("domain_size", "arity", "tuples", "_rows", "_codes")

    domain_size: int
    arity: int
    tuples: Tuples

    def __init__(self, domain_size: int, arity: int, tuples: Iterable[Sequence[int]]):
        if domain_size < 1:
            raise RelationError(f"Domain size must be positive, got {domain_size}")
        if arity < 1:
            raise RelationError(f"Relation arity must be positive, got {arity}")
        if domain_size**arity > _MAX_CODE:
            raise RelationError(f"Relations of arity {arity} over E_{domain_size} are too large to encode")
        frozen = frozenset(tuple(int(x) for x in t) for t in tuples)
        for t in frozen:
            if len(t) != arity:
                raise RelationError(f"Tuple {t} does not have length {arity}")
            if any(x < 0 or x >= domain_size for x in t):
                raise RelationError(f"Tuple {t} leaves E_{domain_size}")
        self.domain_size = domain_size
        self.arity = arity
        self.tuples = frozen
        rows = np.array(sorted(frozen), dtype=np.int64).reshape(-1, arity)
        rows.setflags(write=False)
        self._rows = rows
        codes = encode_rows(domain_size, rows)
        codes.setflags(write=False)
        self._codes = codes

    @classmethod
    def from_rows(cls, domain_size: int, rows: IntArray) -> "Relation":
        rows = np.asarray(rows, dtype=np.int64)
        return cls(domain_size, rows.shape[1], (tuple(r) for r in rows.tolist()))

    @classmethod
    def full(cls, domain_size: int, arity: int) -> "Relation":
        return cls.from_rows(domain_size, tuple_grid(domain_size, arity))

    @classmethod
    def from_predicate(cls, domain_size: int, arity: int, predicate: Callable[..., bool]) -> "Relation":
        return cls(
            domain_size,
            arity,
            (t for t in itertools.product(range(domain_size), repeat=arity) if predicate(*t)),
        )

    @property
    def rows(self) -> IntArray:
        return self._rows

    @property
    def codes(self) -> IntArray:
        return self._codes

    def contains_rows(self, rows: IntArray) -> BoolArray:
        """Membership mask for tuples stored along the last axis of ``rows``."""
        return np.isin(encode_rows(self.domain_size, rows), self._codes)

    def sorted_tuples(self) -> List[Tuple[int, ...]]:
        return [tuple(r) for r in self._rows.tolist()]

    def __contains__(self, t: object) -> bool:
        return t in self.tuples

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        return iter(self.sorted_tuples())

    def __len__(self) -> int:
        return len(self.tuples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return (self.domain_size, self.arity, self.tuples) == (other.domain_size, other.arity, other.tuples)

    def __hash__(self) -> int:
        return hash((self.domain_size, self.arity, self.tuples))

    def __repr__(self) -> str:
        return f"Relation(k={self.domain_size}, m={self.arity}, tuples={self.sorted_tuples()})"


class Structure:
    """A finite relational structure: a domain E_k with an ordered list of named relations."""

    __slots__ = ("domain_size", "relations", "labels", "_by_name")

    def __init__(
        self,
        domain_size: int,
        relations: Union[Mapping[str, Relation], Iterable[Tuple[str, Relation]]],
        labels: Optional[Sequence[str]] = None,
    ):
        items = list(relations.items()) if isinstance(relations, Mapping) else list(relations)
        by_name: Dict[str, Relation] = {}
        for name, relation in items:
            if name in by_name:
                raise RelationError(f"Duplicate relation name {name!r}")
            if relation.domain_size != domain_size:
                raise RelationError(f"Relation {name!r} is over E_{relation.domain_size}, not E_{domain_size}")
            by_name[name] = relation
        if labels is not None and len(labels) != domain_size:
            raise RelationError("One label per domain element is required")
        self.domain_size = domain_size
        self.relations: Tuple[Tuple[str, Relation], ...] = tuple(items)
        self.labels: Optional[Tuple[str, ...]] = tuple(labels) if labels is not None else None
        self._by_name = by_name

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.relations]

    def relation(self, name: str) -> Relation:
        try:
            return self._by_name[name]
        except KeyError:
            raise RelationError(f"Structure has no relation named {name!r}") from None

    def signature(self) -> Dict[str, int]:
        return {name: relation.arity for name, relation in self.relations}

    def with_relations(self, extra: Iterable[Tuple[str, Relation]]) -> "Structure":
        return Structure(self.domain_size, list(self.relations) + list(extra), self.labels)

    def induced(self, elements: Iterable[int]) -> "Structure":
        """The substructure induced on ``elements``, relabelled to 0..len-1 in ascending order."""
        kept = sorted(set(elements))
        if not kept:
            raise RelationError("Induced substructures need at least one element")
        position = {a: i for i, a in enumerate(kept)}
        relations = [
            (
                name,
                Relation(
                    len(kept),
                    relation.arity,
                    (tuple(position[x] for x in t) for t in relation.tuples if all(x in position for x in t)),
                ),
            )
            for name, relation in self.relations
        ]
        labels = [self.labels[a] for a in kept] if self.labels is not None else None
        return Structure(len(kept), relations, labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return self.domain_size == other.domain_size and self.relations == other.relations

    def __hash__(self) -> int:
        return hash((self.domain_size, self.relations))

    def __repr__(self) -> str:
        signature = ", ".join(f"{name}/{arity}" for name, arity in self.signature().items())
        return f"Structure(k={self.domain_size}, relations=[{signature}])"


# ---------------------------------------------------------------------------
# Preservation and polymorphisms
# ---------------------------------------------------------------------------


def preserves_batch(tables: IntArray, arity: int, relation: Relation) -> BoolArray:
    """
    Mask of the tables (rows of a (batch, k**arity) array) that preserve ``relation``.

    Every choice of ``arity`` tuples from the relation is turned into m table
    indices (one per coordinate); a table survives when all images land in the
    relation. Tables that already failed are not evaluated on later chunks.
    """
    count = tables.shape[0]
    alive = np.ones(count, dtype=bool)
    rows = relation.rows
    size = len(rows)
    if size == 0 or count == 0:
        return alive
    k, m = relation.domain_size, relation.arity
    total = size**arity
    if total > _MAX_CODE:
        raise EnumerationCapExceeded(f"{total} tuple choices are too many to scan", budget=_MAX_CODE, used=total)
    weights = place_values(k, arity)
    choice_weights = place_values(size, arity)
    step = max(1, _CHUNK_CELLS // max(1, count * m))
    for start in range(0, total, step):
        live = np.nonzero(alive)[0]
        if live.size == 0:
            break
        numbers = np.arange(start, min(start + step, total), dtype=np.int64)
        choices = (numbers[:, None] // choice_weights[None, :]) % size
        indices = np.einsum("cnm,n->cm", rows[choices], weights)
        images = tables[live][:, indices]
        ok = relation.contains_rows(images).all(axis=1)
        alive[live[~ok]] = False
    return alive


def preserves(f: Operation, relation: Relation) -> bool:
    """True iff ``f`` maps every choice of arity(f) tuples of the relation into the relation."""
    if f.domain_size != relation.domain_size:
        raise RelationError("Operation and relation live on different domains")
    return bool(preserves_batch(f.table[None, :], f.arity, relation)[0])


def _domain_of(relations: Sequence[Relation], domain_size: Optional[int]) -> int:
    sizes = {r.domain_size for r in relations}
    if domain_size is not None:
        sizes.add(domain_size)
    if len(sizes) != 1:
        raise RelationError("Relations must share one domain size (pass domain_size when there are none)")
    return sizes.pop()


def polymorphism_batches(
    relations: Iterable[Relation],
    n: int,
    *,
    domain_size: Optional[int] = None,
    symmetry: Symmetry = Symmetry.NONE,
    cap: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    prefilter: Optional[Callable[[IntArray], BoolArray]] = None,
) -> Iterator[IntArray]:
    """
    Stream the n-ary polymorphism tables of ``relations`` batch by batch.

    Args:
        relations: Relations to preserve
        n: Arity
        domain_size: Required when ``relations`` is empty
        symmetry: Candidate restriction
        cap: Enumeration cap, defaults to ``settings.enumeration_cap``
        rng: Optional generator shuffling the batch order
        prefilter: Optional vectorized mask applied before the preservation checks

    Returns:
        Iterator over (survivors, k**n) arrays
    """
    rels = list(relations)
    k = _domain_of(rels, domain_size)

    def survivors(batch: IntArray) -> IntArray:
        mask = np.ones(len(batch), dtype=bool) if prefilter is None else np.array(prefilter(batch), dtype=bool)
        for relation in rels:
            live = np.nonzero(mask)[0]
            if live.size == 0:
                break
            mask[live] = preserves_batch(batch[live], n, relation)
        return batch[mask]

    return map_batches(survivors, candidate_tables(k, n, symmetry, cap=cap, rng=rng))


def pol(
    relations: Iterable[Relation],
    n: int,
    *,
    domain_size: Optional[int] = None,
    symmetry: Symmetry = Symmetry.NONE,
    cap: Optional[int] = None,
) -> List[Operation]:
    """
    The n-ary operations preserving every relation, in candidate order.

    Raises:
        EnumerationCapExceeded: If the (symmetry-reduced) candidate space exceeds the cap
    """
    rels = list(relations)
    k = _domain_of(rels, domain_size)
    result = [
        Operation.trusted(k, n, row)
        for batch in polymorphism_batches(rels, n, domain_size=k, symmetry=symmetry, cap=cap)
        for row in batch
    ]
    logger.info("Polymorphisms enumerated", domain_size=k, arity=n, symmetry=symmetry.value, count=len(result))
    return result


def pol_structure(structure: Structure, n: int, *, symmetry: Symmetry = Symmetry.NONE) -> List[Operation]:
    """The n-ary polymorphisms of a structure."""
    return pol([r for _, r in structure.relations], n, domain_size=structure.domain_size, symmetry=symmetry)


def inv_closure(
    generators: Iterable[Operation],
    tuples: Iterable[Sequence[int]],
    *,
    domain_size: Optional[int] = None,
    arity: Optional[int] = None,
    budget: Optional[int] = None,
) -> Relation:
    """
    The least relation containing ``tuples`` that is closed under the generators.

    Generators are applied coordinatewise to every choice of member tuples until
    a fixed point; each round only evaluates choices involving a tuple found in
    the previous round.

    Args:
        generators: Operations over a common domain
        tuples: Seed tuples
        domain_size: Required when there are no generators
        arity: Required when there are no seed tuples
        budget: Optional cap on evaluated tuple choices

    Returns:
        The generated relation

    Raises:
        BudgetExceeded: If ``budget`` is given and exhausted
    """
    gens = list(dict.fromkeys(generators))
    sizes = {g.domain_size for g in gens}
    if domain_size is not None:
        sizes.add(domain_size)
    if len(sizes) != 1:
        raise RelationError("Generators must share one domain size (pass domain_size when there are none)")
    k = sizes.pop()
    members: List[Tuple[int, ...]] = sorted({tuple(int(x) for x in t) for t in tuples})
    if arity is None:
        if not members:
            raise RelationError("arity is required when no seed tuples are given")
        arity = len(members[0])
    seed = Relation(k, arity, members)
    members = seed.sorted_tuples()
    seen = set(members)
    work = WorkBudget(budget) if budget is not None else None

    old = 0
    while old < len(members):
        frontier_end = len(members)
        matrix = np.array(members, dtype=np.int64).reshape(-1, arity)
        for g in gens:
            chunk = _CHUNK_CELLS // (g.arity * arity)
            for combos in new_index_tuples(old, frontier_end, g.arity, chunk):
                if work is not None and not work.take(len(combos)):
                    raise BudgetExceeded(
                        f"Relation closure exceeded its budget of {work.limit} tuple choices",
                        budget=work.limit,
                        used=work.used,
                    )
                images = np.unique(apply_rowwise(g, matrix, combos), axis=0)
                for t in map(tuple, images.tolist()):
                    if t not in seen:
                        seen.add(t)
                        members.append(t)
        old = frontier_end
    return Relation(k, arity, members)


# ---------------------------------------------------------------------------
# Essential tuples, blocks and decomposability
# ---------------------------------------------------------------------------


def _all_tuples(relation: Relation) -> IntArray:
    k, m = relation.domain_size, relation.arity
    if k**m > settings.enumeration_cap:
        raise EnumerationCapExceeded(
            f"E_{k}^{m} has more tuples than the enumeration cap",
            budget=settings.enumeration_cap,
            used=k**m,
        )
    return tuple_grid(k, m)


def essential_tuples(relation: Relation) -> Tuples:
    """
    Tuples t outside R such that every coordinate of t can be changed to land in R.

    Equivalently t is not in R but, for every i, t with coordinate i deleted lies
    in the projection of R that deletes coordinate i.
    """
    k, m = relation.domain_size, relation.arity
    grid = _all_tuples(relation)
    mask = ~relation.contains_rows(grid)
    for i in range(m):
        keep = [j for j in range(m) if j != i]
        projected = np.unique(encode_rows(k, relation.rows[:, keep]))
        mask &= np.isin(encode_rows(k, grid[:, keep]), projected)
    return frozenset(tuple(t) for t in grid[mask].tolist())


def is_essential(relation: Relation) -> bool:
    """True iff the relation has an essential tuple."""
    return bool(essential_tuples(relation))


@dataclass(frozen=True)
class Block:
    """A connected component of the one-coordinate-difference graph on R together with Ess(R)."""

    member_tuples: Tuples
    is_trivial: bool
    product_factors: Optional[Tuple[Tuple[int, ...], ...]] = None

    def sorted_members(self) -> List[Tuple[int, ...]]:
        return sorted(self.member_tuples)

    @property
    def is_product(self) -> bool:
        return self.product_factors is not None


def blocks(relation: Relation) -> List[Block]:
    """
    Partition R together with its essential tuples into blocks.

    Two tuples are adjacent when they differ in exactly one coordinate. Blocks
    come ordered by their least tuple; a block is trivial when it lies inside R,
    and carries its factors when it equals the product of its coordinate value sets.
    """
    m = relation.arity
    extended = sorted(set(relation.tuples) | essential_tuples(relation))
    graph: "nx.Graph[Tuple[int, ...]]" = nx.Graph()
    graph.add_nodes_from(extended)
    for i in range(m):
        lines: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = defaultdict(list)
        for t in extended:
            lines[t[:i] + t[i + 1 :]].append(t)
        for line in lines.values():
            nx.add_path(graph, line)

    components = sorted((frozenset(c) for c in nx.connected_components(graph)), key=min)
    result = []
    for component in components:
        values = [tuple(sorted({t[i] for t in component})) for i in range(m)]
        is_product = prod(len(v) for v in values) == len(component)
        result.append(
            Block(
                member_tuples=component,
                is_trivial=component <= relation.tuples,
                product_factors=tuple(values) if is_product else None,
            )
        )
    logger.debug("Blocks computed", arity=m, blocks=len(result))
    return result


@dataclass(frozen=True)
class BlockGroupStructure:
    """An abelian group G with surjections phi_i: B_i -> G carving R inside a product block."""

    group: AbelianGroup
    maps: Tuple[Mapping[int, int], ...] = field(hash=False)

    def __post_init__(self) -> None:
        if not self.group.is_prime_power_order():
            raise RelationError(f"{self.group.name} does not have prime-power order")

    def value(self, t: Sequence[int]) -> int:
        total = 0
        for phi, x in zip(self.maps, t):
            total = self.group.add(total, phi[x])
        return total

    def satisfied_by(self, t: Sequence[int]) -> bool:
        return self.value(t) == 0


def _surjections(domain: Sequence[int], order: int, k: int) -> List[IntArray]:
    found = []
    for images in itertools.product(range(order), repeat=len(domain)):
        if len(set(images)) == order:
            phi = np.full(k, -1, dtype=np.int64)
            phi[list(domain)] = images
            found.append(phi)
    return found


def block_group_structure(relation: Relation, block: Block) -> Optional[BlockGroupStructure]:
    """
    Search for G and surjections phi_i with R inside the block equal to {x : sum phi_i(x_i) = 0}.

    Groups are tried in the order Z2, Z3, Z4, Z2xZ2 (orders up to the largest
    factor) and surjections in lexicographic order of their value lists.

    Returns:
        The first witness found, or None (always None for trivial blocks)

    Raises:
        RelationError: If the block is not a product or a factor has more than 4 values
    """
    if block.is_trivial:
        return None
    if block.product_factors is None:
        raise RelationError("Block group structures need a product block")
    factors = block.product_factors
    if any(len(f) > 4 for f in factors):
        raise RelationError("Block factors larger than 4 are not supported")

    k = relation.domain_size
    members = np.array(block.sorted_members(), dtype=np.int64)
    inside = relation.contains_rows(members)
    for group in small_abelian_groups(max(len(f) for f in factors)):
        options = [_surjections(f, group.order, k) for f in factors]
        combinations = prod(len(o) for o in options)
        if combinations == 0:
            continue
        if combinations > settings.enumeration_cap:
            raise EnumerationCapExceeded(
                f"{combinations} surjection tuples exceed the enumeration cap",
                budget=settings.enumeration_cap,
                used=combinations,
            )
        add = np.array(group.table, dtype=np.int64)
        for phis in itertools.product(*options):
            total = phis[0][members[:, 0]]
            for i in range(1, len(phis)):
                total = add[total, phis[i][members[:, i]]]
            if np.array_equal(total == 0, inside):
                maps = tuple({int(x): int(phi[x]) for x in factor} for phi, factor in zip(phis, factors))
                logger.info("Block group structure found", group=group.name, arity=relation.arity)
                return BlockGroupStructure(group=group, maps=maps)
    return None


def is_n_decomposable(relation: Relation, n: int) -> bool:
    """
    True iff R is the intersection of the cylinders over its projections onto all n-element coordinate sets.
    """
    if n < 1:
        raise RelationError("Decomposition width must be at least 1")
    m = relation.arity
    if n >= m:
        return True
    k = relation.domain_size
    grid = _all_tuples(relation)
    mask = np.ones(len(grid), dtype=bool)
    for coords in itertools.combinations(range(m), n):
        cols = list(coords)
        projected = np.unique(encode_rows(k, relation.rows[:, cols]))
        mask &= np.isin(encode_rows(k, grid[:, cols]), projected)
    return bool(np.array_equal(mask, relation.contains_rows(grid)))


# ---------------------------------------------------------------------------
# Criticality
# ---------------------------------------------------------------------------


class CriticalityVerdict(str, Enum):
    CRITICAL = "critical"
    NOT_CRITICAL = "not_critical"
    UNKNOWN = "unknown"

MEET_IRREDUCIBLE = "meet-irreducible among invariant relations of the same arity"


@dataclass
class CriticalityReport:
    """Outcome of a criticality test; ``notion`` records what was decided."""

    verdict: CriticalityVerdict
    reason: str
    notion: str = MEET_IRREDUCIBLE
    cover: Optional[Relation] = None
    provisional: Optional[CriticalityVerdict] = None
    budget: Optional[int] = None


def is_critical(
    relation: Relation,
    generators: Iterable[Operation],
    budget: Optional[int] = None,
    *,
    complete: bool = True,
) -> CriticalityReport:
    """
    Decide whether R is critical relative to the clone generated by ``generators``.

    R is critical when it is essential and the intersection of the closures of
    R with one outside tuple added strictly contains R: then a unique least
    invariant relation above R exists.

    Args:
        relation: Relation to test
        generators: Operations generating (an approximation of) Pol(R)
        budget: Per-closure cap on evaluated tuple choices
        complete: Whether the caller asserts that the generators generate Pol(R)

    Returns:
        CriticalityReport with verdict critical, not_critical or unknown
    """
    if not is_essential(relation):
        return CriticalityReport(CriticalityVerdict.NOT_CRITICAL, "relation is not essential")

    gens = list(generators)
    k, m = relation.domain_size, relation.arity
    try:
        if inv_closure(gens, relation.tuples, domain_size=k, arity=m, budget=budget) != relation:
            return CriticalityReport(CriticalityVerdict.UNKNOWN, "generators do not preserve the relation")

        grid = _all_tuples(relation)
        outside = [tuple(t) for t in grid[~relation.contains_rows(grid)].tolist()]

        def closure_with(t: Tuple[int, ...]) -> Tuples:
            return inv_closure(gens, relation.tuples | {t}, domain_size=k, arity=m, budget=budget).tuples

        cover: Tuples = frozenset(tuple(t) for t in grid.tolist())
        for closed in map_batches(closure_with, outside):
            cover = cover & closed
            if cover == relation.tuples:
                break
    except BudgetExceeded as exc:
        return CriticalityReport(CriticalityVerdict.UNKNOWN, str(exc), budget=exc.budget)

    cover_relation = Relation(k, m, cover)
    found = CriticalityVerdict.CRITICAL if cover != relation.tuples else CriticalityVerdict.NOT_CRITICAL
    reason = (
        "a least invariant relation strictly above the relation exists"
        if found is CriticalityVerdict.CRITICAL
        else "the relation is an intersection of strictly larger invariant relations"
    )
    if not complete:
        return CriticalityReport(
            CriticalityVerdict.UNKNOWN,
            "generators declared incomplete; verdict is provisional",
            cover=cover_relation,
            provisional=found,
        )
    return CriticalityReport(found, reason, cover=cover_relation)
