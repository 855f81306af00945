"""Minor identities, the named minor conditions and exhaustive witness search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
import numpy.typing as npt

from clonelab.algebra.ops import (
    EnumerationCapExceeded,
    IntArray,
    Operation,
    Symmetry,
    VarMap,
    count_candidates,
    decode_index,
    minor_indices,
)
from clonelab.algebra.rel import Structure, polymorphism_batches
from clonelab.config import settings
from clonelab.errors import ClonelabError
from clonelab.logging import get_logger

logger = get_logger(__name__)

BoolArray = npt.NDArray[np.bool_]
Assignment = Mapping[str, Operation]

_CHUNK_CELLS = 4_000_000


class ConditionError(ClonelabError):
    """Raised for malformed conditions, invalid builtin parameters and mismatched assignments."""
    pass


@dataclass(frozen=True)
class MinorIdentity:
    """The identity lhs_symbol(x_lhs_map) ≈ rhs_symbol(x_rhs_map) over a shared set of variables."""

    lhs_symbol: str
    lhs_map: VarMap
    rhs_symbol: str
    rhs_map: VarMap

    def __post_init__(self) -> None:
        if self.lhs_map.target_arity != self.rhs_map.target_arity:
            raise ConditionError("Both sides of a minor identity must use the same variables")

    @property
    def variables(self) -> int:
        return self.lhs_map.target_arity

    def render(self) -> str:
        def side(symbol: str, sigma: VarMap) -> str:
            return f"{symbol}(" + ",".join(f"x{i}" for i in sigma.mapping) + ")"

        return f"{side(self.lhs_symbol, self.lhs_map)} ≈ {side(self.rhs_symbol, self.rhs_map)}"


@dataclass(frozen=True)
class MinorCondition:
    """A finite set of minor identities over declared function symbols."""

    symbols: Tuple[Tuple[str, int], ...]
    identities: Tuple[MinorIdentity, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        arities = dict(self.symbols)
        if len(arities) != len(self.symbols):
            raise ConditionError("Duplicate function symbol")
        if any(arity < 1 for arity in arities.values()):
            raise ConditionError("Function symbols need positive arity")
        for identity in self.identities:
            for symbol, sigma in ((identity.lhs_symbol, identity.lhs_map), (identity.rhs_symbol, identity.rhs_map)):
                if symbol not in arities:
                    raise ConditionError(f"Identity uses undeclared symbol {symbol!r}")
                if arities[symbol] != sigma.source_arity:
                    raise ConditionError(
                        f"Symbol {symbol!r} has arity {arities[symbol]} but is used with {sigma.source_arity} arguments"
                    )

    @classmethod
    def build(cls, symbols: Mapping[str, int], identities: Iterable[MinorIdentity], name: str = "custom") -> "MinorCondition":
        return cls(tuple(symbols.items()), tuple(identities), name)

    @property
    def arities(self) -> Dict[str, int]:
        return dict(self.symbols)

    def arity_of(self, symbol: str) -> int:
        try:
            return self.arities[symbol]
        except KeyError:
            raise ConditionError(f"Unknown symbol {symbol!r}") from None


# ---------------------------------------------------------------------------
# Named conditions
# ---------------------------------------------------------------------------


def _chain(symbol: str, arity: int, variables: int, maps: Sequence[Sequence[int]]) -> List[MinorIdentity]:
    varmaps = [VarMap(arity, variables, tuple(m)) for m in maps]
    return [MinorIdentity(symbol, a, symbol, b) for a, b in zip(varmaps, varmaps[1:])]


def _permutation_identities(symbol: str, n: int, expanded: bool) -> List[MinorIdentity]:
    identity = VarMap.identity(n)
    if expanded:
        perms = [p for p in itertools.permutations(range(n)) if list(p) != list(range(n))]
    elif n == 2:
        perms = [(1, 0)]
    else:
        perms = [(1, 0) + tuple(range(2, n)), tuple(range(1, n)) + (0,)]
    return [MinorIdentity(symbol, identity, symbol, VarMap(n, n, tuple(p))) for p in perms]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConditionError(message)


def sigma_p(p: int) -> MinorCondition:
    """The cyclic identity c(x_0, ..., x_{p-1}) ≈ c(x_1, ..., x_{p-1}, x_0)."""
    _require(p >= 2, "sigma_p needs p >= 2")
    rotation = tuple(range(1, p)) + (0,)
    identity = MinorIdentity("c", VarMap.identity(p), "c", VarMap(p, p, rotation))
    return MinorCondition((("c", p),), (identity,), f"sigma_{p}")


def quasi_minority() -> MinorCondition:
    """m(x,y,y) ≈ m(y,x,y) ≈ m(y,y,x) ≈ m(x,x,x)."""
    maps = [(0, 1, 1), (1, 0, 1), (1, 1, 0), (0, 0, 0)]
    return MinorCondition((("m", 3),), tuple(_chain("m", 3, 2, maps)), "quasi_minority")


def quasi_majority() -> MinorCondition:
    """m(x,x,y) ≈ m(x,y,x) ≈ m(y,x,x) ≈ m(x,x,x)."""
    maps = [(0, 0, 1), (0, 1, 0), (1, 0, 0), (0, 0, 0)]
    return MinorCondition((("m", 3),), tuple(_chain("m", 3, 2, maps)), "quasi_majority")


def quasi_malcev() -> MinorCondition:
    """m(x,y,y) ≈ m(y,y,x) ≈ m(x,x,x)."""
    maps = [(0, 1, 1), (1, 1, 0), (0, 0, 0)]
    return MinorCondition((("m", 3),), tuple(_chain("m", 3, 2, maps)), "quasi_malcev")


def _wnu_maps(n: int) -> List[Tuple[int, ...]]:
    return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]


def wnu(n: int) -> MinorCondition:
    """w(y,x,...,x) ≈ w(x,y,x,...,x) ≈ ... ≈ w(x,...,x,y)."""
    _require(n >= 2, "wnu needs n >= 2")
    return MinorCondition((("w", n),), tuple(_chain("w", n, 2, _wnu_maps(n))), f"wnu_{n}")


def qnu(n: int) -> MinorCondition:
    """The weak near-unanimity identities together with ≈ w(x,...,x)."""
    _require(n >= 2, "qnu needs n >= 2")
    maps = _wnu_maps(n) + [tuple([0] * n)]
    return MinorCondition((("w", n),), tuple(_chain("w", n, 2, maps)), f"qnu_{n}")


def fs(n: int, *, expanded: bool = False) -> MinorCondition:
    """
    Full symmetry f(x_0, ..., x_{n-1}) ≈ f(x_p(0), ..., x_p(n-1)).

    By default only the transposition (0 1) and the n-cycle are listed; they
    generate the symmetric group, so satisfaction agrees with the expanded form.
    """
    _require(n >= 2, "fs needs n >= 2")
    return MinorCondition((("f", n),), tuple(_permutation_identities("f", n, expanded)), f"fs_{n}")


def _support_maps(n: int) -> Dict[FrozenSet[int], List[Tuple[int, ...]]]:
    classes: Dict[FrozenSet[int], List[Tuple[int, ...]]] = {}
    for mapping in itertools.product(range(n), repeat=n):
        classes.setdefault(frozenset(mapping), []).append(mapping)
    return classes


def ts(n: int, *, expanded: bool = False) -> MinorCondition:
    """
    Total symmetry: f(x) ≈ f(y) whenever x and y use the same set of variables.

    By default this is full symmetry together with f(x,x,y,x_3,...) ≈ f(x,y,y,x_3,...):
    moving one copy of a repeated argument onto another present argument connects
    all argument multisets with the same support.
    """
    _require(n >= 2, "ts needs n >= 2")
    if expanded:
        identities: List[MinorIdentity] = []
        for maps in _support_maps(n).values():
            identities.extend(_chain("f", n, n, maps))
        return MinorCondition((("f", n),), tuple(identities), f"ts_{n}")
    identities = _permutation_identities("f", n, False)
    if n >= 3:
        lhs = (0, 0) + tuple(range(1, n - 1))
        rhs = (0, 1) + tuple(range(1, n - 1))
        identities.append(MinorIdentity("f", VarMap(n, n - 1, lhs), "f", VarMap(n, n - 1, rhs)))
    return MinorCondition((("f", n),), tuple(identities), f"ts_{n}")


def gm(n: int, *, expanded: bool = False) -> MinorCondition:
    """Full symmetry together with f(x,x,x_2,...,x_{n-1}) ≈ f(y,y,x_2,...,x_{n-1})."""
    _require(n >= 3 and n % 2 == 1, "gm needs an odd n >= 3")
    identities = _permutation_identities("f", n, expanded)
    lhs = (0, 0) + tuple(range(2, n))
    rhs = (1, 1) + tuple(range(2, n))
    identities.append(MinorIdentity("f", VarMap(n, n, lhs), "f", VarMap(n, n, rhs)))
    return MinorCondition((("f", n),), tuple(identities), f"gm_{n}")


def const() -> MinorCondition:
    """f(x) ≈ f(y): the unary operation is constant."""
    identity = MinorIdentity("f", VarMap(1, 2, (0,)), "f", VarMap(1, 2, (1,)))
    return MinorCondition((("f", 1),), (identity,), "const")


BUILTIN_NAMES = (
    "sigma_p",
    "quasi_minority",
    "quasi_majority",
    "quasi_malcev",
    "fs",
    "ts",
    "gm",
    "wnu",
    "qnu",
    "const",
)


def builtin(name: str, *, p: Optional[int] = None, n: Optional[int] = None, expanded: bool = False) -> MinorCondition:
    """
    Look up a named minor condition.

    Args:
        name: One of ``BUILTIN_NAMES``
        p: Arity of sigma_p
        n: Arity of fs, ts, gm, wnu and qnu
        expanded: List every permutation (fs, gm) or every same-support pair (ts)

    Returns:
        The condition

    Raises:
        ConditionError: For unknown names or missing/invalid parameters
    """
    if name == "sigma_p":
        _require(p is not None, "sigma_p needs p")
        assert p is not None
        return sigma_p(p)
    if name == "quasi_minority":
        return quasi_minority()
    if name == "quasi_majority":
        return quasi_majority()
    if name == "quasi_malcev":
        return quasi_malcev()
    if name == "const":
        return const()
    if name in ("fs", "ts", "gm", "wnu", "qnu"):
        _require(n is not None, f"{name} needs n")
        assert n is not None
        if name == "fs":
            return fs(n, expanded=expanded)
        if name == "ts":
            return ts(n, expanded=expanded)
        if name == "gm":
            return gm(n, expanded=expanded)
        if name == "wnu":
            return wnu(n)
        return qnu(n)
    raise ConditionError(f"Unknown condition {name!r}; known: {', '.join(BUILTIN_NAMES)}")


# ---------------------------------------------------------------------------
# Satisfaction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """The first identity and valuation on which an assignment fails."""

    identity_index: int
    identity: MinorIdentity
    valuation: Tuple[int, ...]
    lhs_value: int
    rhs_value: int

    def describe(self) -> str:
        return (
            f"{self.identity.render()} fails at x={list(self.valuation)}: "
            f"{self.lhs_value} != {self.rhs_value}"
        )


def _domain_of_assignment(assignment: Assignment, condition: MinorCondition) -> int:
    sizes = set()
    for symbol, arity in condition.symbols:
        if symbol not in assignment:
            raise ConditionError(f"No operation assigned to symbol {symbol!r}")
        op = assignment[symbol]
        if op.arity != arity:
            raise ConditionError(f"Symbol {symbol!r} has arity {arity}, assigned operation has arity {op.arity}")
        sizes.add(op.domain_size)
    if len(sizes) > 1:
        raise ConditionError("Assigned operations live on different domains")
    if not sizes:
        raise ConditionError("Condition declares no symbols")
    return sizes.pop()


def find_violation(assignment: Assignment, condition: MinorCondition) -> Optional[Violation]:
    """The first failing identity and valuation (in index order), or None."""
    k = _domain_of_assignment(assignment, condition)
    for index, identity in enumerate(condition.identities):
        lhs = assignment[identity.lhs_symbol].table[minor_indices(k, identity.lhs_map)]
        rhs = assignment[identity.rhs_symbol].table[minor_indices(k, identity.rhs_map)]
        differ = np.nonzero(lhs != rhs)[0]
        if differ.size:
            at = int(differ[0])
            return Violation(
                identity_index=index,
                identity=identity,
                valuation=decode_index(k, identity.variables, at),
                lhs_value=int(lhs[at]),
                rhs_value=int(rhs[at]),
            )
    return None


def satisfies(assignment: Assignment, condition: MinorCondition) -> bool:
    """True iff every identity holds under every valuation of its variables."""
    return find_violation(assignment, condition) is None


def identity_mask(tables: IntArray, k: int, condition: MinorCondition, symbol: str) -> BoolArray:
    """Mask of the candidate tables for ``symbol`` that satisfy the identities mentioning only ``symbol``."""
    mask = np.ones(len(tables), dtype=bool)
    own = [i for i in condition.identities if i.lhs_symbol == symbol and i.rhs_symbol == symbol]
    for identity in own:
        lhs = minor_indices(k, identity.lhs_map)
        rhs = minor_indices(k, identity.rhs_map)
        step = max(1, _CHUNK_CELLS // max(1, lhs.size))
        for start in range(0, len(tables), step):
            part = slice(start, start + step)
            live = np.nonzero(mask[part])[0] + start
            if live.size:
                mask[live] = (tables[live][:, lhs] == tables[live][:, rhs]).all(axis=1)
    return mask


# ---------------------------------------------------------------------------
# Witness search
# ---------------------------------------------------------------------------


def _permutation_group(generators: Iterable[Tuple[int, ...]], n: int) -> Set[Tuple[int, ...]]:
    identity = tuple(range(n))
    gens = [g for g in generators if g != identity]
    group = {identity}
    frontier = [identity]
    while frontier:
        fresh = []
        for element in frontier:
            for g in gens:
                product = tuple(element[g[i]] for i in range(n))
                if product not in group:
                    group.add(product)
                    fresh.append(product)
        frontier = fresh
    return group


def symmetry_implied(condition: MinorCondition, symbol: str, symmetry: Symmetry) -> bool:
    """
    True iff every operation satisfying the condition for ``symbol`` has the given symmetry.

    Decided from the argument permutations forced by the symbol's identities
    between two bijective variable maps.
    """
    if symmetry is Symmetry.NONE:
        return True
    n = condition.arity_of(symbol)
    forced = []
    for identity in condition.identities:
        if identity.lhs_symbol != symbol or identity.rhs_symbol != symbol:
            continue
        if not (identity.lhs_map.is_bijective() and identity.rhs_map.is_bijective()):
            continue
        inverse = [0] * n
        for i, j in enumerate(identity.lhs_map.mapping):
            inverse[j] = i
        forced.append(tuple(inverse[j] for j in identity.rhs_map.mapping))
    group = _permutation_group(forced, n)
    if symmetry is Symmetry.CYCLIC:
        return tuple(range(1, n)) + (0,) in group
    return len(group) == factorial(n)


@dataclass
class WitnessSearch:
    """Outcome of a witness search; a missing witness is definitive only after full coverage."""

    condition: str
    assignment: Optional[Dict[str, Operation]]
    definitive: bool
    scanned: int
    budget: int

    @property
    def found(self) -> bool:
        return self.assignment is not None


def _candidates_from_operations(
    operations: Sequence[Operation],
    condition: MinorCondition,
    symbol: str,
    rng: Optional[np.random.Generator],
) -> List[Operation]:
    arity = condition.arity_of(symbol)
    pool = [op for op in operations if op.arity == arity]
    if not pool:
        return []
    k = pool[0].domain_size
    if any(op.domain_size != k for op in pool):
        raise ConditionError("Candidate operations live on different domains")
    mask = identity_mask(np.stack([op.table for op in pool]), k, condition, symbol)
    kept = [op for op, ok in zip(pool, mask) if ok]
    if rng is not None:
        kept = [kept[i] for i in rng.permutation(len(kept))]
    return kept


def find_witness(
    condition: MinorCondition,
    *,
    operations: Optional[Sequence[Operation]] = None,
    structure: Optional[Structure] = None,
    symmetry: Symmetry = Symmetry.NONE,
    budget: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> WitnessSearch:
    """
    Search an assignment of operations to the condition's symbols that satisfies it.

    Candidates come either from an explicit operation set or from the
    polymorphisms of a structure (optionally restricted to a symmetry class).
    Identities over a single symbol are checked vectorized per candidate batch;
    the remaining identities are checked while backtracking over the symbols.

    Args:
        condition: Minor condition to satisfy
        operations: Explicit candidate set
        structure: Structure whose polymorphisms are the candidates
        symmetry: Symmetry restriction for structure candidates
        budget: Candidate scan budget, defaults to ``settings.enumeration_cap``
        rng: Optional generator randomizing the scan order

    Returns:
        WitnessSearch; ``definitive`` is false when the space was not fully
        covered or the symmetry restriction is not implied by the condition
    """
    if (operations is None) == (structure is None):
        raise ConditionError("Give exactly one of operations or structure")
    budget = settings.enumeration_cap if budget is None else budget
    names = [symbol for symbol, _ in condition.symbols]

    scanned = 0
    candidates: Dict[str, List[Operation]] = {}
    if operations is not None:
        ops = list(operations)
        scanned = len(ops)
        for symbol in names:
            candidates[symbol] = _candidates_from_operations(ops, condition, symbol, rng)
        covered_exactly = True
    else:
        assert structure is not None
        k = structure.domain_size
        relations = [r for _, r in structure.relations]
        total = sum(count_candidates(k, condition.arity_of(s), symmetry) for s in names)
        if total > budget:
            logger.warning("Witness search skipped: candidate space exceeds budget", candidates=total, budget=budget)
            return WitnessSearch(condition.name, None, False, 0, budget)
        single = len(names) == 1
        for symbol in names:
            arity = condition.arity_of(symbol)
            kept: List[Operation] = []
            batches = polymorphism_batches(
                relations,
                arity,
                domain_size=k,
                symmetry=symmetry,
                cap=budget,
                rng=rng,
                prefilter=lambda b, s=symbol: identity_mask(b, k, condition, s),
            )
            for batch in batches:
                kept.extend(Operation.trusted(k, arity, row) for row in batch)
                if single and kept:
                    break
            scanned += count_candidates(k, arity, symmetry)
            candidates[symbol] = kept
        covered_exactly = all(symmetry_implied(condition, s, symmetry) for s in names)

    assignment = _backtrack(condition, names, candidates, budget)
    if isinstance(assignment, EnumerationCapExceeded):
        logger.warning("Witness search ran out of budget", condition=condition.name, budget=budget)
        return WitnessSearch(condition.name, None, False, scanned + assignment.used, budget)

    if assignment is not None:
        violation = find_violation(assignment, condition)
        if violation is not None:
            raise ConditionError(f"Search produced an invalid witness: {violation.describe()}")

    result = WitnessSearch(
        condition=condition.name,
        assignment=assignment,
        definitive=assignment is not None or covered_exactly,
        scanned=scanned,
        budget=budget,
    )
    logger.info(
        "Witness search finished",
        condition=condition.name,
        found=result.found,
        definitive=result.definitive,
        scanned=scanned,
    )
    return result


def _backtrack(
    condition: MinorCondition,
    names: List[str],
    candidates: Dict[str, List[Operation]],
    budget: int,
) -> Optional[Dict[str, Operation]] | EnumerationCapExceeded:
    mixed = [i for i in condition.identities if i.lhs_symbol != i.rhs_symbol]
    # identities checked once both of their symbols are assigned
    checks: Dict[str, List[MinorIdentity]] = {symbol: [] for symbol in names}
    position = {symbol: i for i, symbol in enumerate(names)}
    for identity in mixed:
        later = max(identity.lhs_symbol, identity.rhs_symbol, key=position.__getitem__)
        checks[later].append(identity)

    assignment: Dict[str, Operation] = {}
    steps = 0

    def holds(identity: MinorIdentity) -> bool:
        lhs = assignment[identity.lhs_symbol]
        rhs = assignment[identity.rhs_symbol]
        k = lhs.domain_size
        return bool(
            np.array_equal(
                lhs.table[minor_indices(k, identity.lhs_map)],
                rhs.table[minor_indices(k, identity.rhs_map)],
            )
        )

    def extend(depth: int) -> bool:
        nonlocal steps
        if depth == len(names):
            return True
        symbol = names[depth]
        for op in candidates[symbol]:
            steps += 1
            if steps > budget:
                raise EnumerationCapExceeded("Backtracking budget exhausted", budget=budget, used=steps)
            assignment[symbol] = op
            if all(holds(identity) for identity in checks[symbol]) and extend(depth + 1):
                return True
            del assignment[symbol]
        return False

    try:
        return dict(assignment) if extend(0) else None
    except EnumerationCapExceeded as exc:
        return exc
