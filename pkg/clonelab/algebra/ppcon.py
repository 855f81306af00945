"""Homomorphisms, cores, pp-definitions and pp-powers, and the free-structure constructions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from clonelab.algebra import catalog
from clonelab.algebra.ops import (
    EnumerationCapExceeded,
    Operation,
    VarMap,
    make_projection,
    minor,
    place_values,
)
from clonelab.algebra.rel import Relation, Structure, pol_structure
from clonelab.config import settings
from clonelab.errors import ClonelabError
from clonelab.logging import get_logger

logger = get_logger(__name__)

# Largest free-structure domain that is materialized
_MATERIALIZE_LIMIT = 256


class PPConError(ClonelabError):
    """Raised for signature mismatches, malformed formulas and unmet preconditions."""
    pass


def _require_same_signature(source: Structure, target: Structure) -> None:
    if source.signature() != target.signature():
        raise PPConError(f"Signatures differ: {source.signature()} vs {target.signature()}")


# ---------------------------------------------------------------------------
# Homomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Homomorphism:
    """A map from the source domain to the target domain, index by index."""

    source: Structure
    target: Structure
    mapping: Tuple[int, ...]

    def __post_init__(self) -> None:
        _require_same_signature(self.source, self.target)
        if len(self.mapping) != self.source.domain_size:
            raise PPConError("A homomorphism needs one image per source element")
        if any(not 0 <= b < self.target.domain_size for b in self.mapping):
            raise PPConError("Homomorphism image outside the target domain")

    def __call__(self, a: int) -> int:
        return self.mapping[a]

    def violation(self) -> Optional[Tuple[str, Tuple[int, ...]]]:
        """The first relation and source tuple whose image leaves the target relation."""
        images = np.array(self.mapping, dtype=np.int64)
        for name, relation in self.source.relations:
            if not len(relation):
                continue
            mapped = images[relation.rows]
            ok = self.target.relation(name).contains_rows(mapped)
            if not ok.all():
                return name, tuple(int(x) for x in relation.rows[int(np.argmin(ok))])
        return None

    def verify(self) -> bool:
        return self.violation() is None


class _HomSearch:
    """Backtracking with generalized arc consistency over the source tuples."""

    def __init__(self, source: Structure, target: Structure, budget: int):
        _require_same_signature(source, target)
        self.source = source
        self.target = target
        self.budget = budget
        self.nodes = 0
        self.constraints: List[Tuple[Tuple[int, ...], FrozenSet[Tuple[int, ...]]]] = []
        self.watch: Dict[int, List[int]] = {a: [] for a in range(source.domain_size)}
        for name, relation in source.relations:
            allowed = target.relation(name).tuples
            for t in relation.sorted_tuples():
                index = len(self.constraints)
                self.constraints.append((t, allowed))
                for a in set(t):
                    self.watch[a].append(index)
        self.order = sorted(range(source.domain_size), key=lambda a: (-len(self.watch[a]), a))

    def _revise(self, domains: List[Set[int]], index: int) -> Optional[Set[int]]:
        t, allowed = self.constraints[index]
        supported: List[Set[int]] = [set() for _ in t]
        for u in allowed:
            seen: Dict[int, int] = {}
            fits = True
            for a, b in zip(t, u):
                if b not in domains[a] or seen.setdefault(a, b) != b:
                    fits = False
                    break
            if fits:
                for i, b in enumerate(u):
                    supported[i].add(b)
        changed: Set[int] = set()
        for i, a in enumerate(t):
            narrowed = domains[a] & supported[i]
            if not narrowed:
                return None
            if narrowed != domains[a]:
                domains[a] = narrowed
                changed.add(a)
        return changed

    def _propagate(self, domains: List[Set[int]], indices: Iterable[int]) -> bool:
        queue: Deque[int] = deque(dict.fromkeys(indices))
        queued = set(queue)
        while queue:
            index = queue.popleft()
            queued.discard(index)
            changed = self._revise(domains, index)
            if changed is None:
                return False
            for a in changed:
                for j in self.watch[a]:
                    if j not in queued:
                        queued.add(j)
                        queue.append(j)
        return True

    def _extend(self, domains: List[Set[int]], depth: int) -> Iterator[Tuple[int, ...]]:
        if depth == len(self.order):
            yield tuple(min(d) for d in domains)
            return
        a = self.order[depth]
        for b in sorted(domains[a]):
            self.nodes += 1
            if self.nodes > self.budget:
                raise EnumerationCapExceeded(
                    f"Homomorphism search exceeded {self.budget} nodes", budget=self.budget, used=self.nodes
                )
            trial = [set(d) for d in domains]
            trial[a] = {b}
            if self._propagate(trial, self.watch[a]):
                yield from self._extend(trial, depth + 1)

    def solutions(self) -> Iterator[Tuple[int, ...]]:
        domains = [set(range(self.target.domain_size)) for _ in range(self.source.domain_size)]
        if self._propagate(domains, range(len(self.constraints))):
            yield from self._extend(domains, 0)


def iter_homomorphisms(source: Structure, target: Structure, *, budget: Optional[int] = None) -> Iterator[Homomorphism]:
    """
    All homomorphisms in branch order: variables by decreasing degree, values ascending.

    Raises:
        PPConError: On a signature mismatch
        EnumerationCapExceeded: If the search visits more than ``budget`` nodes
    """
    search = _HomSearch(source, target, settings.enumeration_cap if budget is None else budget)
    for mapping in search.solutions():
        hom = Homomorphism(source, target, mapping)
        found = hom.violation()
        if found is not None:
            raise PPConError(f"Search returned a map violating {found[0]} at {found[1]}")
        yield hom


def find_homomorphism(source: Structure, target: Structure, *, budget: Optional[int] = None) -> Optional[Homomorphism]:
    """
    The first homomorphism from ``source`` to ``target``, or None when none exists.

    Args:
        source: Structure A
        target: Structure B with the same signature
        budget: Search node limit, defaults to ``settings.enumeration_cap``

    Returns:
        A verified Homomorphism or None
    """
    hom = next(iter_homomorphisms(source, target, budget=budget), None)
    logger.debug("Homomorphism search finished", source=repr(source), target=repr(target), found=hom is not None)
    return hom


@dataclass(frozen=True)
class HomEquivalence:
    forward: Optional[Homomorphism]
    backward: Optional[Homomorphism]

    @property
    def equivalent(self) -> bool:
        return self.forward is not None and self.backward is not None


def hom_equivalent(a: Structure, b: Structure, *, budget: Optional[int] = None) -> HomEquivalence:
    """Search homomorphisms both ways."""
    return HomEquivalence(find_homomorphism(a, b, budget=budget), find_homomorphism(b, a, budget=budget))


# ---------------------------------------------------------------------------
# Cores
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Core:
    """A core of A as an induced substructure, with a retraction onto it and its embedding."""

    structure: Structure
    retraction: Homomorphism
    embedding: Homomorphism
    elements: Tuple[int, ...]


def _shrinking_endomorphism(current: Structure, budget: Optional[int]) -> Optional[Tuple[List[int], Homomorphism]]:
    elements = list(range(current.domain_size))
    for a in reversed(elements):
        kept = [x for x in elements if x != a]
        hom = find_homomorphism(current, current.induced(kept), budget=budget)
        if hom is not None:
            return kept, hom
    return None


def core_of(structure: Structure, *, budget: Optional[int] = None) -> Core:
    """
    Shrink A along non-surjective endomorphisms until every endomorphism is bijective.

    Elements are tried for removal from the largest down, so the image keeps the
    smallest elements it can.

    Args:
        structure: Structure A
        budget: Node limit per homomorphism search

    Returns:
        Core with the induced substructure, a retraction A -> core (identity on the
        core) and the inclusion core -> A
    """
    current = structure
    elements = list(range(structure.domain_size))
    to_current = list(range(structure.domain_size))
    while current.domain_size > 1:
        step = _shrinking_endomorphism(current, budget)
        if step is None:
            break
        kept, hom = step
        to_current = [hom(x) for x in to_current]
        elements = [elements[i] for i in kept]
        current = current.induced(kept)

    # reorder so that the retraction fixes every core element
    twist = [to_current[a] for a in elements]
    untwist = {b: i for i, b in enumerate(twist)}
    retraction = Homomorphism(structure, current, tuple(untwist[b] for b in to_current))
    embedding = Homomorphism(current, structure, tuple(elements))
    for hom in (retraction, embedding):
        if not hom.verify():
            raise PPConError("Core computation produced an invalid homomorphism")
    logger.info("Core computed", domain_size=structure.domain_size, core_size=current.domain_size)
    return Core(current, retraction, embedding, tuple(elements))


def is_core(structure: Structure, *, budget: Optional[int] = None) -> bool:
    """True iff every endomorphism is bijective."""
    return structure.domain_size == 1 or _shrinking_endomorphism(structure, budget) is None


def singleton_names(structure: Structure) -> Dict[int, str]:
    """For each element a, the first unary relation equal to {a}."""
    names: Dict[int, str] = {}
    for name, relation in structure.relations:
        if relation.arity == 1 and len(relation) == 1:
            (a,) = next(iter(relation.tuples))
            names.setdefault(a, name)
    return names


def expand_by_singletons(structure: Structure) -> Structure:
    """Add the unary relation {a} for every element a, named const<a> (primed until fresh)."""
    taken = set(structure.names)
    extra = []
    for a in range(structure.domain_size):
        name = f"const{a}"
        while name in taken:
            name += "'"
        taken.add(name)
        extra.append((name, Relation(structure.domain_size, 1, [(a,)])))
    return structure.with_relations(extra)


# ---------------------------------------------------------------------------
# Primitive positive formulas and pp-powers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PPFormula:
    """
    ∃ y_0 ... y_{exists-1}: conjunction of atoms over x_0..x_{free-1}, y_0..

    Variables are numbered 0..free-1 for the free ones, then free..free+exists-1.
    """

    free: int
    exists: int = 0
    atoms: Tuple[Tuple[str, Tuple[int, ...]], ...] = ()
    equalities: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.free < 1 or self.exists < 0:
            raise PPConError("A formula needs at least one free variable and a non-negative existential count")
        variables = self.free + self.exists
        for name, args in self.atoms:
            if any(not 0 <= v < variables for v in args):
                raise PPConError(f"Atom {name}{tuple(args)} uses a variable outside 0..{variables - 1}")
        for i, j in self.equalities:
            if not (0 <= i < variables and 0 <= j < variables):
                raise PPConError(f"Equality x{i} = x{j} uses a variable outside 0..{variables - 1}")

    @property
    def variables(self) -> int:
        return self.free + self.exists

    def check_signature(self, signature: Mapping[str, int]) -> None:
        for name, args in self.atoms:
            if name not in signature:
                raise PPConError(f"Formula uses unknown relation {name!r}")
            if signature[name] != len(args):
                raise PPConError(f"Relation {name!r} has arity {signature[name]}, atom has {len(args)} arguments")


def pp_define(structure: Structure, formula: PPFormula, *, cap: Optional[int] = None) -> Relation:
    """
    The relation defined by a pp-formula, by exhaustive evaluation over all variable assignments.

    Raises:
        EnumerationCapExceeded: If k**(free + exists) exceeds the cap
    """
    formula.check_signature(structure.signature())
    cap = settings.enumeration_cap if cap is None else cap
    k, variables = structure.domain_size, formula.variables
    total = k**variables
    if total > cap:
        raise EnumerationCapExceeded(f"{total} assignments exceed the evaluation cap {cap}", budget=cap, used=total)
    weights = place_values(k, variables)
    step = max(1, settings.batch_size * 64)
    found: List[np.ndarray] = []
    for start in range(0, total, step):
        numbers = np.arange(start, min(start + step, total), dtype=np.int64)
        grid = (numbers[:, None] // weights[None, :]) % k
        mask = np.ones(len(grid), dtype=bool)
        for name, args in formula.atoms:
            mask &= structure.relation(name).contains_rows(grid[:, list(args)])
        for i, j in formula.equalities:
            mask &= grid[:, i] == grid[:, j]
        found.append(grid[mask][:, : formula.free])
    rows = np.concatenate(found)
    if not len(rows):
        return Relation(k, formula.free, [])
    return Relation.from_rows(k, np.unique(rows, axis=0))


def power_code(k: int, values: Sequence[int]) -> int:
    """Code of a tuple of A**n as an element of E_{k**n}, first coordinate most significant."""
    code = 0
    for v in values:
        code = code * k + int(v)
    return code


def pp_power(structure: Structure, n: int, definitions: Mapping[str, PPFormula], *, cap: Optional[int] = None) -> Structure:
    """
    The structure on A**n whose relation R of arity r is defined by a formula with r*n free variables.

    Args:
        structure: Structure A
        n: Power
        definitions: Relation name -> formula over A's signature
        cap: Evaluation cap per formula

    Returns:
        Structure on E_{k**n}; element codes follow ``power_code``
    """
    if n < 1:
        raise PPConError("pp-powers need n >= 1")
    k = structure.domain_size
    weights = place_values(k, n)
    relations = []
    for name, formula in definitions.items():
        if formula.free % n:
            raise PPConError(f"Formula for {name!r} has {formula.free} free variables, not a multiple of {n}")
        defined = pp_define(structure, formula, cap=cap)
        arity = formula.free // n
        codes = defined.rows.reshape(len(defined), arity, n) @ weights
        relations.append((name, Relation.from_rows(k**n, codes.reshape(-1, arity))))
    logger.info("pp-power built", base_size=k, power=n, relations=len(relations))
    return Structure(k**n, relations)


# ---------------------------------------------------------------------------
# Free structures
# ---------------------------------------------------------------------------


def operation_code(op: Operation) -> int:
    """The table of ``op`` read as a number in base k, first entry most significant."""
    return power_code(op.domain_size, op.values())


@dataclass
class FreeStructureReport:
    """
    A free structure over the polymorphisms of A with the homomorphisms relating it to its target.

    When A satisfies the separating condition, ``condition_witness`` holds the
    polymorphism that shows it and the homomorphism into the target is missing.
    """

    kind: str
    target: Structure
    structure: Optional[Structure]
    edges: FrozenSet[Tuple[int, int]]
    forward: Optional[Homomorphism]
    backward: Optional[Homomorphism]
    polymorphisms_complete: bool
    condition_witness: Optional[Operation] = None
    classes: Optional[List[FrozenSet[int]]] = field(default=None)

    @property
    def hom_equivalent(self) -> bool:
        return self.forward is not None and self.backward is not None


def _polymorphisms(
    structure: Structure, arity: int, supplied: Optional[Sequence[Operation]], complete: Optional[bool]
) -> Tuple[List[Operation], bool]:
    if supplied is not None:
        ops = list(supplied)
        if any(op.arity != arity or op.domain_size != structure.domain_size for op in ops):
            raise PPConError(f"Supplied operations must be {arity}-ary over E_{structure.domain_size}")
        return ops, bool(complete)
    if structure.domain_size > 2:
        raise PPConError("Polymorphisms are enumerated only for two-element structures; supply them instead")
    return pol_structure(structure, arity), True


def _require_singletons(structure: Structure) -> None:
    missing = [a for a in range(structure.domain_size) if a not in singleton_names(structure)]
    if missing:
        raise PPConError(f"Structure lacks the singleton relations for {missing}; expand its core by singletons first")


def free_structure_malcev(
    structure: Structure,
    pol3: Optional[Sequence[Operation]] = None,
    *,
    pol3_complete: Optional[bool] = None,
) -> FreeStructureReport:
    """
    The structure C on the binary operations of A with zero = {pr2_2}, one = {pr2_1} and
    R = {(w(x,x,y), w(y,x,x)) : w ternary polymorphism}, compared with B2.

    h: B2 -> C maps 0 to pr2_2 and 1 to pr2_1; h': C -> B2 maps pr2_2 to 0 and
    everything else to 1, and exists exactly when no polymorphism w has
    w(x,x,y) = w(y,x,x) = y.

    Args:
        structure: A core expanded by singletons
        pol3: Ternary polymorphisms; enumerated when omitted and |A| = 2
        pol3_complete: Whether a supplied ``pol3`` is all of them

    Returns:
        FreeStructureReport; the structure is materialized only when |A|**(|A|**2) <= 256
    """
    _require_singletons(structure)
    ops, complete = _polymorphisms(structure, 3, pol3, pol3_complete)
    k = structure.domain_size
    first, second = make_projection(k, 2, 1), make_projection(k, 2, 2)
    edges = set()
    witness: Optional[Operation] = None
    for w in ops:
        f = minor(w, VarMap(3, 2, (0, 0, 1)))
        g = minor(w, VarMap(3, 2, (1, 0, 0)))
        edges.add((operation_code(f), operation_code(g)))
        if witness is None and f == second and g == second:
            witness = w
    size = k ** (k**2)
    target = catalog.b2()
    report = FreeStructureReport(
        kind="malcev",
        target=target,
        structure=None,
        edges=frozenset(edges),
        forward=None,
        backward=None,
        polymorphisms_complete=complete,
        condition_witness=witness,
    )
    if size > _MATERIALIZE_LIMIT:
        logger.info("Free structure left lazy", domain_size=size, edges=len(edges))
        return report

    zero, one = operation_code(second), operation_code(first)
    free = Structure(
        size,
        [
            ("zero", Relation(size, 1, [(zero,)])),
            ("one", Relation(size, 1, [(one,)])),
            ("R", Relation(size, 2, edges)),
        ],
    )
    report.structure = free
    forward = Homomorphism(target, free, (zero, one))
    if not forward.verify():
        raise PPConError("Projection witnesses do not realize the edges of B2; the polymorphism set is incomplete")
    report.forward = forward
    backward = Homomorphism(free, target, tuple(0 if code == zero else 1 for code in range(size)))
    if witness is None:
        if not backward.verify():
            raise PPConError("h' fails although no Mal'cev witness was found")
        report.backward = backward
    logger.info(
        "Mal'cev free structure built",
        domain_size=size,
        edges=len(edges),
        malcev_witness=witness is not None,
        complete=complete,
    )
    return report


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p**0.5) + 1))


def free_structure_cycle(
    structure: Structure,
    p: int,
    polp: Optional[Sequence[Operation]] = None,
    *,
    polp_complete: Optional[bool] = None,
) -> FreeStructureReport:
    """
    The structure B on the p-ary operations of A with R = {(f, f(x2,...,xp,x1)) : f polymorphism}.

    Without a shift-invariant polymorphism the polymorphisms split into the
    classes F_0, ..., F_{p-1}: each shift orbit is listed from its least code f0
    as f0, shift(f0), ... . h: B -> C_p sends F_i to i (non-polymorphisms to 0)
    and h': C_p -> B sends i to shift^i of the least polymorphism.

    Raises:
        PPConError: If p is not prime
    """
    if not _is_prime(p):
        raise PPConError(f"p must be prime, got {p}")
    ops, complete = _polymorphisms(structure, p, polp, polp_complete)
    k = structure.domain_size
    rotate = VarMap(p, p, tuple((i + 1) % p for i in range(p)))
    shift = {operation_code(f): operation_code(minor(f, rotate)) for f in ops}
    edges = frozenset(shift.items())
    witness = next((f for f in ops if shift[operation_code(f)] == operation_code(f)), None)
    size = k ** (k**p)
    target = catalog.cycle_structure(p)
    report = FreeStructureReport(
        kind="cycle",
        target=target,
        structure=None,
        edges=edges,
        forward=None,
        backward=None,
        polymorphisms_complete=complete,
        condition_witness=witness,
    )

    if witness is None and ops:
        classes: List[Set[int]] = [set() for _ in range(p)]
        placed: Set[int] = set()
        for start in sorted(shift):
            if start in placed:
                continue
            code = start
            for i in range(p):
                classes[i].add(code)
                placed.add(code)
                code = shift[code]
        report.classes = [frozenset(c) for c in classes]

    if size > _MATERIALIZE_LIMIT:
        logger.info("Free structure left lazy", domain_size=size, edges=len(edges))
        return report

    free = Structure(size, [("R", Relation(size, 2, edges))])
    report.structure = free
    if ops:
        code = min(shift)
        orbit = []
        for _ in range(p):
            orbit.append(code)
            code = shift[code]
        backward = Homomorphism(target, free, tuple(orbit))
        if not backward.verify():
            raise PPConError("The shift orbit does not map C_p into B")
        report.backward = backward
    if report.classes is not None:
        index = {code: i for i, members in enumerate(report.classes) for code in members}
        forward = Homomorphism(free, target, tuple(index.get(code, 0) for code in range(size)))
        if not forward.verify():
            raise PPConError("Class indices do not map B into C_p")
        report.forward = forward
    logger.info(
        "Cycle free structure built",
        p=p,
        domain_size=size,
        edges=len(edges),
        cyclic_witness=witness is not None,
        complete=complete,
    )
    return report


# ---------------------------------------------------------------------------
# C_1 versus I_2
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DichotomyReport:
    """Which side of the C_1 / I_2 dichotomy A falls on, with the construction and its homomorphisms."""

    verdict: str
    core: Core
    construction: Structure
    forward: Homomorphism
    backward: Homomorphism


C1_CONSTRUCTS = "c1_constructs_A"
CONSTRUCTS_I2 = "A_constructs_I2"


def verify_dichotomy_c1_i2(structure: Structure, *, budget: Optional[int] = None) -> DichotomyReport:
    """
    Decide from the core of A whether C_1 pp-constructs A or A pp-constructs I_2.

    A one-element core gives the pp-power of C_1 with every relation defined by
    R(x0, x0), homomorphically equivalent to A. A larger core B, expanded by
    singletons, gives S = (B; O, I) with O = {b0} and I = {b1}, related to I_2 by
    g (b0 -> 0, others -> 1) and h (0 -> b0, 1 -> b1).

    Raises:
        PPConError: If A has an empty relation on the C_1 side
    """
    core = core_of(structure, budget=budget)
    if core.structure.domain_size == 1:
        definitions = {}
        for name, relation in structure.relations:
            if not len(relation):
                raise PPConError(f"Relation {name!r} is empty and cannot be pp-defined over C_1")
            definitions[name] = PPFormula(relation.arity, atoms=(("R", (0, 0)),))
        built = pp_power(catalog.one_element_structure(), 1, definitions)
        forward = Homomorphism(structure, built, tuple(0 for _ in range(structure.domain_size)))
        backward = Homomorphism(built, structure, (core.elements[0],))
        verdict = C1_CONSTRUCTS
    else:
        expanded = expand_by_singletons(core.structure)
        names = singleton_names(expanded)
        definitions = {
            "u0": PPFormula(1, atoms=((names[0], (0,)),)),
            "u1": PPFormula(1, atoms=((names[1], (0,)),)),
        }
        built = pp_power(expanded, 1, definitions)
        i2 = catalog.idempotent_structure(2)
        forward = Homomorphism(built, i2, tuple(0 if b == 0 else 1 for b in range(built.domain_size)))
        backward = Homomorphism(i2, built, (0, 1))
        verdict = CONSTRUCTS_I2
    for hom in (forward, backward):
        found = hom.violation()
        if found is not None:
            raise PPConError(f"Dichotomy witness fails on {found[0]} at {found[1]}")
    logger.info("Dichotomy decided", verdict=verdict, core_size=core.structure.domain_size)
    return DichotomyReport(verdict, core, built, forward, backward)


@dataclass(frozen=True)
class CollapseReport:
    """S = ({0,1}**n; Phi_0, ..., Phi_{n-1}) built over I_2, with g: I_n -> S and h: S -> I_n."""

    n: int
    structure: Structure
    forward: Homomorphism
    backward: Homomorphism


def collapse_idempotent(n: int) -> CollapseReport:
    """
    Build the pp-power of I_2 with Phi_i = {e_i} and relate it to I_n.

    g maps i to e_i; h maps e_i to i and every other tuple to 0.
    """
    if n < 2:
        raise PPConError("collapse_idempotent needs n >= 2")
    definitions = {
        f"u{i}": PPFormula(n, atoms=tuple(("u1" if j == i else "u0", (j,)) for j in range(n))) for i in range(n)
    }
    built = pp_power(catalog.idempotent_structure(2), n, definitions)
    unit = [2 ** (n - 1 - i) for i in range(n)]
    target = catalog.idempotent_structure(n)
    forward = Homomorphism(target, built, tuple(unit))
    position = {code: i for i, code in enumerate(unit)}
    backward = Homomorphism(built, target, tuple(position.get(code, 0) for code in range(built.domain_size)))
    for hom in (forward, backward):
        found = hom.violation()
        if found is not None:
            raise PPConError(f"Collapse witness fails on {found[0]} at {found[1]}")
    return CollapseReport(n, built, forward, backward)
