"""
Explicit operation-building formulas with built-in verification.

Every construction composes its inputs with ``compose`` and ``minor`` only, keeps
the term it evaluated and, unless ``verify_constructions`` is off, checks its
preconditions and postconditions exhaustively over the full tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from clonelab.algebra import catalog
from clonelab.algebra.conditions import (
    MinorCondition,
    Violation,
    find_violation,
    fs,
    gm,
    quasi_majority,
    quasi_malcev,
    quasi_minority,
    sigma_p,
    ts,
)
from clonelab.algebra.ops import (
    Operation,
    VarMap,
    compose,
    decode_index,
    is_idempotent,
    make_projection,
    minor,
    tuple_grid,
)
from clonelab.algebra.terms import ComposeTerm, Leaf, MinorTerm, ProjectionTerm, Term, evaluate
from clonelab.config import settings
from clonelab.errors import ClonelabError
from clonelab.logging import get_logger

logger = get_logger(__name__)

RAINBOWS: Tuple[Tuple[int, int, int], ...] = tuple(itertools.permutations(range(3)))


class ConstructionError(ClonelabError):
    """Raised when an input or output of a construction fails its condition."""

    def __init__(self, message: str, condition: Optional[str] = None, valuation: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.condition = condition
        self.valuation = valuation


@dataclass(frozen=True)
class Construction:
    """A constructed operation together with the term that produced it."""

    name: str
    operation: Operation
    term: Term

    def __call__(self, *args: int) -> int:
        return self.operation(*args)

    def replay(self) -> Operation:
        """Re-evaluate the term from its leaves."""
        return evaluate(self.term)


def _checking(verify: Optional[bool]) -> bool:
    return settings.verify_constructions if verify is None else verify


def _require(op: Operation, condition: MinorCondition, role: str) -> None:
    symbol = condition.symbols[0][0]
    violation: Optional[Violation] = find_violation({symbol: op}, condition)
    if violation is not None:
        raise ConstructionError(
            f"{role} fails {condition.name}: {violation.describe()}",
            condition=condition.name,
            valuation=violation.valuation,
        )


def _require_idempotent(op: Operation, role: str) -> None:
    if not is_idempotent(op):
        x = next(a for a in range(op.domain_size) if op(*([a] * op.arity)) != a)
        raise ConstructionError(f"{role} is not idempotent at x={x}", condition="idempotent", valuation=(x,))


def _require_domain(ops: Sequence[Operation], k: Optional[int] = None) -> None:
    sizes = {op.domain_size for op in ops}
    if k is not None:
        sizes.add(k)
    if len(sizes) != 1:
        raise ConstructionError("Inputs must share one domain" + (f" E_{k}" if k is not None else ""))


def _require_arity(op: Operation, arity: int, role: str) -> None:
    if op.arity != arity:
        raise ConstructionError(f"{role} must have arity {arity}, got {op.arity}")


def _first_mismatch(actual: Operation, expected: np.ndarray) -> Optional[Tuple[Tuple[int, ...], int, int]]:
    differ = np.nonzero(actual.table != expected)[0]
    if differ.size == 0:
        return None
    at = int(differ[0])
    return decode_index(actual.domain_size, actual.arity, at), int(expected[at]), int(actual.table[at])


# ---------------------------------------------------------------------------
# Symmetrization
# ---------------------------------------------------------------------------


def _rotated(base: Term, mapping: Tuple[int, int, int]) -> Term:
    if mapping == (0, 1, 2):
        return base
    return MinorTerm(base, VarMap(3, 3, mapping))


def _symmetrized_term(base: Term, c2: Term, c3: Term) -> Term:
    """c2(c3(f(x,y,z), f(y,z,x), f(z,x,y)), c3(f(x,z,y), f(z,y,x), f(y,x,z)))."""
    even = ComposeTerm(c3, tuple(_rotated(base, m) for m in ((0, 1, 2), (1, 2, 0), (2, 0, 1))))
    odd = ComposeTerm(c3, tuple(_rotated(base, m) for m in ((0, 2, 1), (2, 1, 0), (1, 0, 2))))
    return ComposeTerm(c2, (even, odd))


def _check_symmetrizers(c2: Operation, c3: Operation) -> None:
    _require_arity(c2, 2, "c2")
    _require_arity(c3, 3, "c3")
    _require(c2, sigma_p(2), "c2")
    _require(c3, sigma_p(3), "c3")
    _require_idempotent(c2, "c2")
    _require_idempotent(c3, "c3")


@lru_cache(maxsize=128)
def _symmetrize(kind: str, base: Operation, c2: Operation, c3: Operation, check: bool) -> Construction:
    quasi = quasi_majority() if kind == "majority" else quasi_minority()
    role = "M'" if kind == "majority" else "m'"
    if check:
        _require_domain([base, c2, c3])
        _require_arity(base, 3, role)
        _require(base, quasi, role)
        _require_idempotent(base, role)
        _check_symmetrizers(c2, c3)
    term = _symmetrized_term(Leaf(role, base), Leaf("c2", c2), Leaf("c3", c3))
    result = evaluate(term)
    name = "M" if kind == "majority" else "m3c"
    if check:
        _require(result, fs(3), name)
        _require(result, quasi, name)
        _require_idempotent(result, name)
    logger.info("Symmetric operation constructed", kind=kind, domain_size=result.domain_size)
    return Construction(name, result, term)


def symmetrize_majority(
    majority: Operation, c2: Operation, c3: Operation, *, verify: Optional[bool] = None
) -> Construction:
    """
    Turn a quasi-majority into a symmetric majority with cyclic c2 and c3.

    Args:
        majority: Idempotent quasi-majority M'
        c2: Idempotent binary cyclic operation
        c3: Idempotent ternary cyclic operation
        verify: Overrides ``settings.verify_constructions``

    Returns:
        Construction of M(x,y,z) = c2(c3(M'(x,y,z), M'(y,z,x), M'(z,x,y)), c3(M'(x,z,y), M'(z,y,x), M'(y,x,z)))

    Raises:
        ConstructionError: Naming the failed condition and the valuation
    """
    return _symmetrize("majority", majority, c2, c3, _checking(verify))


def symmetrize_minority(
    minority: Operation, c2: Operation, c3: Operation, *, verify: Optional[bool] = None
) -> Construction:
    """The symmetrization of ``symmetrize_majority`` applied to a quasi-minority."""
    return _symmetrize("minority", minority, c2, c3, _checking(verify))


@lru_cache(maxsize=128)
def _minority_from(d: Operation, majority: Operation, check: bool) -> Construction:
    if check:
        _require_domain([d, majority])
        _require_arity(d, 3, "d")
        _require_arity(majority, 3, "M")
        _require(d, quasi_malcev(), "d")
        _require_idempotent(d, "d")
        _require(majority, quasi_majority(), "M")
        _require_idempotent(majority, "M")
    leaf = Leaf("d", d)
    term = ComposeTerm(Leaf("M", majority), tuple(_rotated(leaf, m) for m in ((0, 1, 2), (1, 2, 0), (2, 0, 1))))
    result = evaluate(term)
    if check:
        _require(result, quasi_minority(), "m'")
        _require_idempotent(result, "m'")
    return Construction("m'", result, term)


def minority_from_malcev_majority(d: Operation, majority: Operation, *, verify: Optional[bool] = None) -> Construction:
    """
    m'(x,y,z) = M(d(x,y,z), d(y,z,x), d(z,x,y)) for a quasi-Mal'cev d and a majority M.

    Raises:
        ConstructionError: If d is not an idempotent quasi-Mal'cev operation or M not an idempotent majority
    """
    return _minority_from(d, majority, _checking(verify))


# ---------------------------------------------------------------------------
# Symmetric minorities over E_3
# ---------------------------------------------------------------------------


def _rainbow_constant(op: Operation, role: str) -> int:
    if op.domain_size != 3 or op.arity != 3:
        raise ConstructionError(f"{role} must be a ternary operation over E_3")
    values = {op(*t) for t in RAINBOWS}
    if len(values) != 1:
        raise ConstructionError(
            f"{role} is not constant on the rainbow triples: values {sorted(values)}",
            condition="rainbow_constant",
        )
    return values.pop()


def _check_symmetric_minority(m3: Operation, role: str = "m3") -> None:
    _require_domain([m3], 3)
    _require_arity(m3, 3, role)
    _require(m3, fs(3), role)
    _require(m3, quasi_minority(), role)
    _require_idempotent(m3, role)


def constant_of_symmetric(m3: Operation, *, verify: Optional[bool] = None) -> int:
    """
    The common value of a symmetric minority over E_3 on the six triples of distinct values.

    Raises:
        ConstructionError: If the six values disagree or the operation is not a symmetric minority
    """
    c = _rainbow_constant(m3, "m3")
    if _checking(verify):
        _check_symmetric_minority(m3)
    return c


def d_switch_closed_form(c: int) -> Operation:
    """
    The operation D^c: c+1 on (c+2, c, c+1) and (c+2, c+1, c), c+2 on (c+1, c, c+2)
    and (c+1, c+2, c), and the first argument elsewhere (sums mod 3).
    """
    if not 0 <= c < 3:
        raise ConstructionError(f"Rainbow constant {c} outside E_3")
    special = {
        ((c + 2) % 3, c, (c + 1) % 3): (c + 1) % 3,
        ((c + 2) % 3, (c + 1) % 3, c): (c + 1) % 3,
        ((c + 1) % 3, c, (c + 2) % 3): (c + 2) % 3,
        ((c + 1) % 3, (c + 2) % 3, c): (c + 2) % 3,
    }
    return Operation.from_function(3, 3, lambda x, y, z: special.get((x, y, z), x))


def _d_switch_term(m3: Operation) -> Term:
    leaf = Leaf("m3", m3)
    return ComposeTerm(leaf, (leaf, ProjectionTerm(3, 3, 2), ProjectionTerm(3, 3, 3)))


@lru_cache(maxsize=64)
def _d_switch(m3: Operation, check: bool) -> Construction:
    c = constant_of_symmetric(m3, verify=check)
    term = _d_switch_term(m3)
    result = evaluate(term)
    if check:
        mismatch = _first_mismatch(result, d_switch_closed_form(c).table)
        if mismatch is not None:
            at, expected, actual = mismatch
            raise ConstructionError(
                f"D^{c} differs from its closed form at {list(at)}: expected {expected}, got {actual}",
                condition="d_switch_closed_form",
                valuation=at,
            )
    return Construction(f"D{c}", result, term)


def d_switch(m3: Operation, *, verify: Optional[bool] = None) -> Construction:
    """D^c(x,y,z) = m3(m3(x,y,z), y, z) for a symmetric minority m3 with rainbow constant c."""
    return _d_switch(m3, _checking(verify))


def generalized_minority_mismatch(op: Operation, c: int) -> Optional[Tuple[Tuple[int, ...], int, int]]:
    """
    First tuple where ``op`` over E_3 breaks the generalized-minority value rule.

    The rule: the unique value occurring an odd number of times, or ``c`` when
    all three values occur an odd number of times.

    Returns:
        (tuple, expected, actual) or None
    """
    grid = tuple_grid(3, op.arity)
    odd = (grid[:, :, None] == np.arange(3)).sum(axis=1) % 2 == 1
    expected = np.where(odd.sum(axis=1) == 1, odd.argmax(axis=1), c)
    return _first_mismatch(op, expected)


def star_identity_failures(m5: Operation, m3: Operation) -> List[str]:
    """
    Check m5(x1,x,x,x4,x5) = m3(x1,x4,x5) and m5(x1,x2,x3,x1,x2) = x3 over all valuations.

    Returns:
        Descriptions of the failing identities (empty when both hold)
    """
    failures = []
    lhs = minor(m5, VarMap(5, 4, (0, 1, 1, 2, 3)))
    rhs = minor(m3, VarMap(3, 4, (0, 2, 3)))
    mismatch = _first_mismatch(lhs, rhs.table)
    if mismatch is not None:
        failures.append(f"m5(x1,x,x,x4,x5) = m3(x1,x4,x5) fails at {list(mismatch[0])}")
    lhs = minor(m5, VarMap(5, 3, (0, 1, 2, 0, 1)))
    mismatch = _first_mismatch(lhs, make_projection(3, 3, 3).table)
    if mismatch is not None:
        failures.append(f"m5(x1,x2,x3,x1,x2) = x3 fails at {list(mismatch[0])}")
    return failures


@lru_cache(maxsize=64)
def _generalized_minority_term(m3: Operation, n: int) -> Term:
    base = Leaf("m3", m3)
    if n == 3:
        return base
    switch = _d_switch_term(m3)
    previous = _generalized_minority_term(m3, n - 2)
    rest = tuple(range(3, n))
    inner = MinorTerm(previous, VarMap(n - 2, n, (0,) + rest))
    first = ProjectionTerm(3, n, 1)
    # t(x1..xn) = m3(D(inner, x1, x1), D(inner, x1, x2), D(inner, x1, x3))
    t = ComposeTerm(base, tuple(ComposeTerm(switch, (inner, first, ProjectionTerm(3, n, j))) for j in (1, 2, 3)))
    swapped = MinorTerm(t, VarMap(n, n, (1, 0, 2) + rest))
    rotated = MinorTerm(t, VarMap(n, n, (2, 0, 1) + rest))
    return ComposeTerm(base, (t, swapped, rotated))


@lru_cache(maxsize=64)
def _generalized_minority(m3: Operation, n: int, check: bool) -> Construction:
    c = constant_of_symmetric(m3, verify=check)
    term = _generalized_minority_term(m3, n)
    result = evaluate(term)
    if check and n > 3:
        _require(result, gm(n), f"m{n}")
        _require_idempotent(result, f"m{n}")
        mismatch = generalized_minority_mismatch(result, c)
        if mismatch is not None:
            at, expected, actual = mismatch
            raise ConstructionError(
                f"m{n} at {list(at)} returns {actual}, expected {expected}",
                condition="generalized_minority_values",
                valuation=at,
            )
        if n == 5:
            failures = star_identity_failures(result, m3)
            if failures:
                raise ConstructionError("; ".join(failures), condition="star_identities")
    logger.info("Generalized minority constructed", arity=n, rainbow_constant=c)
    return Construction(f"m{n}", result, term)


def generalized_minority(m3: Operation, n: int, *, verify: Optional[bool] = None) -> Construction:
    """
    The generalized minority of odd arity n built from a symmetric minority over E_3.

    m_{n} = m3(t, t(x2,x1,x3,...), t(x3,x1,x2,...)) where
    t = m3(D(i, x1, x1), D(i, x1, x2), D(i, x1, x3)) and i = m_{n-2}(x1, x4, ..., xn).

    Args:
        m3: Symmetric minority over E_3
        n: Odd arity, 3 <= n <= ``settings.max_gm_arity``
        verify: Overrides ``settings.verify_constructions``

    Returns:
        Construction of m_n
    """
    if n < 3 or n % 2 == 0:
        raise ConstructionError(f"Generalized minorities need an odd arity >= 3, got {n}")
    if n > settings.max_gm_arity:
        raise ConstructionError(f"Arity {n} exceeds max_gm_arity={settings.max_gm_arity}")
    return _generalized_minority(m3, n, _checking(verify))


# ---------------------------------------------------------------------------
# Totally symmetric chains
# ---------------------------------------------------------------------------


def ts_property_mismatch(
    op: Operation, s2: Operation, m: Operation, c: int
) -> Optional[Tuple[Tuple[int, ...], int, int]]:
    """
    First tuple where s_n over E_3 breaks the value rule of the chain.

    Tuples with value set {a} give a, with {a, b} give s2(a, b), and with all
    of E_3 give m(s2(0,c), s2(1,c), s2(2,c)).
    """
    grid = tuple_grid(3, op.arity)
    present = (grid[:, :, None] == np.arange(3)).any(axis=1)
    size = present.sum(axis=1)
    low = present.argmax(axis=1)
    high = 2 - present[:, ::-1].argmax(axis=1)
    full = m(s2(0, c), s2(1, c), s2(2, c))
    expected = np.where(size == 3, full, s2.table[low * 3 + high])
    return _first_mismatch(op, expected)


def _ts_step(previous: Term, m: Leaf, majority: Leaf, n: int) -> Term:
    middle = MinorTerm(majority, VarMap(3, n, (0, 1, 2)))
    tail = tuple(ProjectionTerm(3, n, j) for j in range(4, n + 1))
    args = tuple(ComposeTerm(previous, (ProjectionTerm(3, n, i), middle) + tail) for i in (1, 2, 3))
    return ComposeTerm(m, args)


@lru_cache(maxsize=32)
def _ts_chain(m: Operation, majority: Operation, s2: Operation, top: int, check: bool) -> Tuple[Construction, ...]:
    if check:
        _require_domain([m, majority, s2], 3)
        _check_symmetric_minority(m, "m")
        _require_arity(majority, 3, "Mc")
        _require(majority, fs(3), "Mc")
        _require(majority, quasi_majority(), "Mc")
        _require_idempotent(majority, "Mc")
        _require_arity(s2, 2, "s2")
        _require(s2, sigma_p(2), "s2")
        _require_idempotent(s2, "s2")
    c = _rainbow_constant(majority, "Mc")
    m_leaf, majority_leaf = Leaf("m", m), Leaf("Mc", majority)
    previous: Term = Leaf("s2", s2)
    chain = [Construction("s2", s2, previous)]
    for n in range(3, top + 1):
        # s_n = m(s_{n-1}(x_i, Mc(x1,x2,x3), x4, ..., xn) for i = 1, 2, 3)
        term = _ts_step(previous, m_leaf, majority_leaf, n)
        op = evaluate(term)
        if check:
            _require(op, ts(n), f"s{n}")
            mismatch = ts_property_mismatch(op, s2, m, c)
            if mismatch is not None:
                at, expected, actual = mismatch
                raise ConstructionError(
                    f"s{n} at {list(at)} returns {actual}, expected {expected}",
                    condition="ts_properties",
                    valuation=at,
                )
        chain.append(Construction(f"s{n}", op, term))
        previous = term
    logger.info("Totally symmetric chain constructed", max_arity=top, rainbow_constant=c)
    return tuple(chain)


def totally_symmetric_chain(
    m: Operation,
    majority: Operation,
    s2: Operation,
    top: int,
    *,
    verify: Optional[bool] = None,
) -> List[Construction]:
    """
    The totally symmetric operations s_2, ..., s_top over E_3.

    Args:
        m: Symmetric minority
        majority: Symmetric majority Mc; its rainbow value is the c of the value rule
        s2: Idempotent binary cyclic operation
        top: Largest arity, 2 <= top <= ``settings.max_ts_arity``
        verify: Overrides ``settings.verify_constructions``

    Returns:
        Constructions of s_2, ..., s_top in arity order
    """
    if top < 2:
        raise ConstructionError("Totally symmetric chains start at arity 2")
    if top > settings.max_ts_arity:
        raise ConstructionError(f"Arity {top} exceeds max_ts_arity={settings.max_ts_arity}")
    return list(_ts_chain(m, majority, s2, top, _checking(verify)))


# ---------------------------------------------------------------------------
# Chain pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetricChainPair:
    """Totally symmetric s_2..s_N and generalized minorities m_3, m_5, ..., m_M over one domain."""

    domain_size: int
    ts_chain: Tuple[Operation, ...]
    gm_chain: Tuple[Operation, ...]

    def __post_init__(self) -> None:
        for i, op in enumerate(self.ts_chain):
            if op.arity != i + 2 or op.domain_size != self.domain_size:
                raise ConstructionError(f"ts_chain entry {i} must be an operation of arity {i + 2} over E_{self.domain_size}")
        for i, op in enumerate(self.gm_chain):
            if op.arity != 2 * i + 3 or op.domain_size != self.domain_size:
                raise ConstructionError(
                    f"gm_chain entry {i} must be an operation of arity {2 * i + 3} over E_{self.domain_size}"
                )

    @property
    def max_ts_arity(self) -> int:
        return len(self.ts_chain) + 1

    @property
    def max_gm_arity(self) -> int:
        return 2 * len(self.gm_chain) + 1

    def s(self, n: int) -> Operation:
        """s_n, with s_1 the identity."""
        if n == 1:
            return catalog.identity(self.domain_size)
        if not 2 <= n <= self.max_ts_arity:
            raise ConstructionError(f"Chain has no s{n} (max arity {self.max_ts_arity})")
        return self.ts_chain[n - 2]

    def m(self, arity: int) -> Operation:
        """m_arity, with m_1 the identity."""
        if arity == 1:
            return catalog.identity(self.domain_size)
        if arity % 2 == 0 or not 3 <= arity <= self.max_gm_arity:
            raise ConstructionError(f"Chain has no m{arity} (max arity {self.max_gm_arity})")
        return self.gm_chain[(arity - 3) // 2]


def build_symmetric_chains(
    m3: Operation,
    majority: Operation,
    s2: Operation,
    max_ts: int,
    max_gm: int,
    *,
    verify: Optional[bool] = None,
) -> SymmetricChainPair:
    """Chains over E_3 from a symmetric minority, a symmetric majority and a binary cyclic operation."""
    ts_ops = tuple(c.operation for c in totally_symmetric_chain(m3, majority, s2, max_ts, verify=verify))
    gm_ops = tuple(generalized_minority(m3, n, verify=verify).operation for n in range(3, max_gm + 1, 2))
    return SymmetricChainPair(3, ts_ops, gm_ops)


def boolean_chains(max_ts: int, max_gm: int) -> SymmetricChainPair:
    """
    s_n = AND of n variables and m_n = XOR of n variables, built from AND_2 and XOR_3 by composition.

    m_{2n+1} = m3(m_{2n-1}(x1, ..., x_{2n-1}), x_{2n}, x_{2n+1}) and
    s_n = s2(s_{n-1}(x1, ..., x_{n-1}), x_n).
    """
    if max_ts < 1 or max_gm < 1 or max_gm % 2 == 0:
        raise ConstructionError("Boolean chains need max_ts >= 1 and an odd max_gm >= 1")
    s2, m3 = catalog.boolean_and(2), catalog.xor(3)
    ts_ops: List[Operation] = [s2] if max_ts >= 2 else []
    for n in range(3, max_ts + 1):
        head = minor(ts_ops[-1], VarMap(n - 1, n, tuple(range(n - 1))))
        ts_ops.append(compose(s2, [head, make_projection(2, n, n)]))
    gm_ops: List[Operation] = [m3] if max_gm >= 3 else []
    for n in range(5, max_gm + 1, 2):
        head = minor(gm_ops[-1], VarMap(n - 2, n, tuple(range(n - 2))))
        gm_ops.append(compose(m3, [head, make_projection(2, n, n - 1), make_projection(2, n, n)]))
    return SymmetricChainPair(2, tuple(ts_ops), tuple(gm_ops))


@dataclass(frozen=True)
class ChainFailure:
    """The first law a chain breaks, with the valuation that shows it."""

    chain: str
    arity: int
    law: str
    valuation: Tuple[int, ...]
    expected: Optional[int] = None
    actual: Optional[int] = None

    def describe(self) -> str:
        values = "" if self.expected is None else f": expected {self.expected}, got {self.actual}"
        return f"{self.chain} arity {self.arity}: {self.law} fails at {list(self.valuation)}{values}"


@dataclass(frozen=True)
class ChainCheck:
    ok: bool
    failure: Optional[ChainFailure] = None


def _identification_failure(
    chain: str, arity: int, law: str, identified: Operation, expected: Operation
) -> Optional[ChainFailure]:
    mismatch = _first_mismatch(identified, expected.table)
    if mismatch is None:
        return None
    at, want, got = mismatch
    return ChainFailure(chain, arity, law, at, want, got)


@lru_cache(maxsize=32)
def verify_chain_compatibility(chains: SymmetricChainPair) -> ChainCheck:
    """
    Check both chains exhaustively.

    Each s_n must be totally symmetric with s_n(x,x,x3,...,xn) = s_{n-1}(x,x3,...,xn);
    each m_l must satisfy gm(l) with m_l(x,x,x,x4,...,xl) = m_{l-2}(x,x4,...,xl).

    Returns:
        ChainCheck with the first failure, if any
    """
    failure: Optional[ChainFailure] = None
    for n in range(2, chains.max_ts_arity + 1):
        s_n = chains.s(n)
        violation = find_violation({"f": s_n}, ts(n))
        if violation is not None:
            failure = ChainFailure("ts", n, f"ts_{n}", violation.valuation, violation.lhs_value, violation.rhs_value)
            break
        identified = minor(s_n, VarMap(n, n - 1, (0,) + tuple(range(n - 1))))
        failure = _identification_failure("ts", n, "identify two variables", identified, chains.s(n - 1))
        if failure is not None:
            break
    if failure is None:
        for arity in range(3, chains.max_gm_arity + 1, 2):
            m_l = chains.m(arity)
            violation = find_violation({"f": m_l}, gm(arity))
            if violation is not None:
                failure = ChainFailure(
                    "gm", arity, f"gm_{arity}", violation.valuation, violation.lhs_value, violation.rhs_value
                )
                break
            identified = minor(m_l, VarMap(arity, arity - 2, (0, 0) + tuple(range(arity - 2))))
            failure = _identification_failure("gm", arity, "identify three variables", identified, chains.m(arity - 2))
            if failure is not None:
                break
    if failure is not None:
        logger.info("Chain compatibility failed", failure=failure.describe())
    return ChainCheck(ok=failure is None, failure=failure)


# ---------------------------------------------------------------------------
# Polynomial representation and the map xi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyRep:
    """f = W_1 ⊕ ... ⊕ W_l with each W_i a conjunction of 1-based variables."""

    variable_count: int
    monomials: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(set(self.monomials)) != len(self.monomials):
            raise ConstructionError("Monomials must be pairwise distinct")
        for w in self.monomials:
            if not w or any(not 1 <= v <= self.variable_count for v in w) or list(w) != sorted(set(w)):
                raise ConstructionError(f"Monomial {w} must be a nonempty increasing set of variables")
        if len(self.monomials) % 2 == 0:
            raise ConstructionError("An idempotent representation has an odd number of monomials")

    @property
    def length(self) -> int:
        return len(self.monomials)

    def to_operation(self) -> Operation:
        """Evaluate the XOR of the monomials."""
        grid = tuple_grid(2, self.variable_count)
        values = np.zeros(len(grid), dtype=np.int64)
        for w in self.monomials:
            values ^= grid[:, [v - 1 for v in w]].min(axis=1)
        return Operation(2, self.variable_count, values)

    def render(self) -> str:
        return " ⊕ ".join("".join(f"x{v}" for v in w) for w in self.monomials)


def poly_rep(f: Operation) -> PolyRep:
    """
    The XOR-of-monomials form of an idempotent Boolean operation.

    Computed by the Möbius transform over the subset lattice: the coefficient of
    a monomial is the XOR of f over all tuples below its indicator vector.

    Raises:
        ConstructionError: If f is not an idempotent Boolean operation
    """
    if f.domain_size != 2:
        raise ConstructionError("Polynomial representations need a Boolean operation")
    _require_idempotent(f, "f")
    n = f.arity
    coefficients = np.array(f.table, dtype=np.int64).reshape((2,) * n)
    for axis in range(n):
        moved = np.moveaxis(coefficients, axis, 0)
        moved[1] ^= moved[0]
    flat = coefficients.reshape(-1)
    if flat[0]:
        raise ConstructionError("Constant monomial in an idempotent representation")
    monomials = [
        tuple(i + 1 for i, bit in enumerate(decode_index(2, n, index)) if bit) for index in np.nonzero(flat)[0].tolist()
    ]
    rep = PolyRep(n, tuple(sorted(monomials, key=lambda w: (len(w), w))))
    if rep.to_operation() != f:
        raise ConstructionError("Polynomial representation does not reproduce the operation")
    return rep


def xi(f: Operation, chains: SymmetricChainPair, *, verify: Optional[bool] = None) -> Construction:
    """
    The image of f = W_1 ⊕ ... ⊕ W_l under m_l(s_|W_1|(W_1), ..., s_|W_l|(W_l)).

    Args:
        f: Idempotent Boolean operation
        chains: Chains long enough for f's representation
        verify: Overrides ``settings.verify_constructions``; when on, the chains are checked first

    Returns:
        Construction of an operation of the same arity over the chains' domain

    Raises:
        ConstructionError: If the chains are invalid or too short
    """
    if _checking(verify):
        check = verify_chain_compatibility(chains)
        if not check.ok:
            assert check.failure is not None
            raise ConstructionError(f"Invalid chains: {check.failure.describe()}", condition=check.failure.law)
    rep = poly_rep(f)
    if rep.length > chains.max_gm_arity:
        raise ConstructionError(f"Chain too short: need m{rep.length}, have up to m{chains.max_gm_arity}")
    widest = max(len(w) for w in rep.monomials)
    if widest > chains.max_ts_arity:
        raise ConstructionError(f"Chain too short: need s{widest}, have up to s{chains.max_ts_arity}")

    k, n = chains.domain_size, f.arity
    args: List[Term] = []
    for w in rep.monomials:
        if len(w) == 1:
            args.append(ProjectionTerm(k, n, w[0]))
        else:
            args.append(MinorTerm(Leaf(f"s{len(w)}", chains.s(len(w))), VarMap(len(w), n, tuple(v - 1 for v in w))))
    term = args[0] if rep.length == 1 else ComposeTerm(Leaf(f"m{rep.length}", chains.m(rep.length)), tuple(args))
    return Construction("xi", evaluate(term), term)
