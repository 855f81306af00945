"""
Named verifiers.

Each verifier runs one concrete check of the workbench end to end and returns a
VerifierResult: ``pass``, ``fail`` with a counterexample, or ``unknown`` with the
budget that ran out. Verdicts never depend on the random seed; the seed only
changes scan orders.
"""

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from clonelab.algebra import catalog
from clonelab.algebra.conditions import (
    MinorCondition,
    const,
    find_violation,
    find_witness,
    quasi_majority,
    satisfies,
    sigma_p,
)
from clonelab.algebra.constructions import (
    Construction,
    ConstructionError,
    SymmetricChainPair,
    boolean_chains,
    build_symmetric_chains,
    constant_of_symmetric,
    d_switch,
    d_switch_closed_form,
    generalized_minority,
    minority_from_malcev_majority,
    star_identity_failures,
    symmetrize_majority,
    symmetrize_minority,
    totally_symmetric_chain,
    verify_chain_compatibility,
    xi,
)
from clonelab.algebra.ops import (
    Operation,
    Symmetry,
    VarMap,
    enumerate_operations,
    generate_clone,
    is_idempotent,
    make_projection,
    minor,
)
from clonelab.algebra.ppcon import (
    C1_CONSTRUCTS,
    CONSTRUCTS_I2,
    collapse_idempotent,
    core_of,
    expand_by_singletons,
    free_structure_cycle,
    free_structure_malcev,
    operation_code,
    verify_dichotomy_c1_i2,
)
from clonelab.algebra.rel import (
    CriticalityVerdict,
    Relation,
    Structure,
    block_group_structure,
    blocks,
    essential_tuples,
    inv_closure,
    is_critical,
    is_essential,
    is_n_decomposable,
)
from clonelab.config import settings
from clonelab.errors import BudgetExceeded, ClonelabError
from clonelab.fixtures import load_operation, load_structure
from clonelab.logging import get_logger
from clonelab.schemas import OperationModel, Verdict, VerifierResult

logger = get_logger(__name__)


class VerifierError(ClonelabError):
    """Raised for unknown verifiers or bad verifier parameters."""
    pass


@dataclass
class RunContext:
    """Per-run options shared by every verifier."""

    budget: Optional[int] = None
    rng: Optional[np.random.Generator] = None
    fixtures: Optional[str] = None

    def structure(self, name: str) -> Structure:
        return load_structure(name, self.fixtures)


@dataclass
class Outcome:
    verdict: Verdict
    details: Dict[str, Any] = field(default_factory=dict)
    counterexample: Optional[Dict[str, Any]] = None
    budget: Optional[int] = None


def passed(**details: Any) -> Outcome:
    return Outcome(Verdict.PASS, details)


def failed(counterexample: Dict[str, Any], **details: Any) -> Outcome:
    return Outcome(Verdict.FAIL, details, counterexample)


def unknown(budget: int, **details: Any) -> Outcome:
    return Outcome(Verdict.UNKNOWN, details, budget=budget)


VerifierFn = Callable[..., Outcome]


@dataclass(frozen=True)
class Verifier:
    name: str
    fn: VerifierFn
    defaults: Mapping[str, Any]
    summary: str

    def bind(self, params: Mapping[str, Any]) -> Dict[str, Any]:
        """Merge parameters over the defaults, coercing strings to the default's type."""
        bound = dict(self.defaults)
        for key, value in params.items():
            key = key.replace("-", "_")
            if key not in self.defaults:
                known = ", ".join(sorted(self.defaults)) or "none"
                raise VerifierError(f"{self.name} has no parameter {key!r}; known: {known}")
            default = self.defaults[key]
            if isinstance(value, str) and isinstance(default, bool):
                value = value.lower() in ("1", "true", "yes")
            elif isinstance(value, str) and isinstance(default, int):
                try:
                    value = int(value)
                except ValueError:
                    raise VerifierError(f"{self.name}: {key} must be an integer, got {value!r}") from None
            elif isinstance(value, str) and isinstance(default, tuple):
                value = tuple(v for v in value.split(",") if v)
            bound[key] = value
        return bound


REGISTRY: Dict[str, Verifier] = {}


def verifier(name: str, summary: str, **defaults: Any) -> Callable[[VerifierFn], VerifierFn]:
    def register(fn: VerifierFn) -> VerifierFn:
        REGISTRY[name] = Verifier(name, fn, defaults, summary)
        return fn

    return register


def op_json(op: Operation) -> Dict[str, Any]:
    return OperationModel.from_operation(op).dump()


# ---------------------------------------------------------------------------
# The construction pipeline over E_3
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pipeline:
    """Every stage of the E_3 construction pipeline, all verified."""

    malcev: Operation
    quasi_majority: Operation
    c2: Operation
    c3: Operation
    majority: Construction
    minority: Construction
    symmetric_minority: Construction
    rainbow_constant: int
    switch: Construction


@lru_cache(maxsize=1)
def e3_pipeline() -> Pipeline:
    """
    d = x - y + z mod 3, M' = dual discriminator, c2 = min and c3 = the symmetric
    majority with rainbow value 0, run through the symmetrizations and the switch.
    """
    d = load_operation("malcev3")
    dd = load_operation("dualdisc3")
    c2 = load_operation("min3")
    c3 = load_operation("symmaj3")
    majority = symmetrize_majority(dd, c2, c3, verify=True)
    minority = minority_from_malcev_majority(d, dd, verify=True)
    m3c = symmetrize_minority(minority.operation, c2, c3, verify=True)
    c = constant_of_symmetric(m3c.operation, verify=True)
    switch = d_switch(m3c.operation, verify=True)
    return Pipeline(d, dd, c2, c3, majority, minority, m3c, c, switch)


@lru_cache(maxsize=8)
def e3_chains(max_ts: int, max_gm: int) -> SymmetricChainPair:
    pipeline = e3_pipeline()
    return build_symmetric_chains(
        pipeline.symmetric_minority.operation,
        pipeline.majority.operation,
        pipeline.c2,
        max_ts,
        max_gm,
        verify=True,
    )


def construction_failure(e: ConstructionError) -> Dict[str, Any]:
    return {
        "error": str(e),
        "condition": e.condition,
        "valuation": list(e.valuation) if e.valuation is not None else None,
    }


def is_majority(op: Operation) -> bool:
    return op.arity == 3 and is_idempotent(op) and satisfies({"m": op}, quasi_majority())


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------


@verifier("remark-cycles", "C_p has no p-ary cyclic polymorphism", p=3)
def remark_cycles(ctx: RunContext, p: int) -> Outcome:
    search = find_witness(
        sigma_p(p),
        structure=catalog.cycle_structure(p),
        symmetry=Symmetry.CYCLIC,
        budget=ctx.budget,
        rng=ctx.rng,
    )
    if search.found:
        assert search.assignment is not None
        return failed({"cyclic_polymorphism": op_json(search.assignment["c"])}, p=p)
    if not search.definitive:
        return unknown(search.budget, p=p, scanned=search.scanned)
    return passed(p=p, candidates=search.scanned)


@verifier("construction-pipeline", "Symmetrizations, rainbow constant and the switch over E_3")
def construction_pipeline(ctx: RunContext) -> Outcome:
    try:
        pipeline = e3_pipeline()
    except ConstructionError as e:
        return failed(construction_failure(e))
    closed = d_switch_closed_form(pipeline.rainbow_constant)
    if pipeline.switch.operation != closed:
        return failed({"switch": op_json(pipeline.switch.operation), "closed_form": op_json(closed)})
    for construction in (pipeline.majority, pipeline.minority, pipeline.symmetric_minority, pipeline.switch):
        if construction.replay() != construction.operation:
            return failed({"replay_mismatch": construction.name})
    return passed(
        majority=op_json(pipeline.majority.operation),
        minority=op_json(pipeline.minority.operation),
        symmetric_minority=op_json(pipeline.symmetric_minority.operation),
        rainbow_constant=pipeline.rainbow_constant,
        switch=op_json(pipeline.switch.operation),
    )


@verifier("star-identities", "m5(x1,x,x,x4,x5) = m3(x1,x4,x5) and m5(x1,x2,x3,x1,x2) = x3")
def star_identities(ctx: RunContext) -> Outcome:
    m3 = e3_pipeline().symmetric_minority.operation
    try:
        m5 = generalized_minority(m3, 5, verify=True).operation
    except ConstructionError as e:
        return failed(construction_failure(e))
    failures = star_identity_failures(m5, m3)
    if failures:
        return failed({"failures": failures})
    return passed(valuations=3**5)


@verifier("generalized-minority", "m_n satisfies gm(n) and the odd-multiplicity rule", max_arity=9)
def generalized_minorities(ctx: RunContext, max_arity: int) -> Outcome:
    pipeline = e3_pipeline()
    checked = []
    for n in range(3, max_arity + 1, 2):
        try:
            generalized_minority(pipeline.symmetric_minority.operation, n, verify=True)
        except ConstructionError as e:
            return failed(construction_failure(e), arity=n, checked=checked)
        checked.append(n)
    return passed(arities=checked, rainbow_constant=pipeline.rainbow_constant)


@verifier("ts-properties", "s_n is totally symmetric with the two-value and full-range rules", n=7)
def ts_properties(ctx: RunContext, n: int) -> Outcome:
    pipeline = e3_pipeline()
    try:
        chain = totally_symmetric_chain(
            pipeline.symmetric_minority.operation,
            pipeline.majority.operation,
            pipeline.c2,
            n,
            verify=True,
        )
    except ConstructionError as e:
        return failed(construction_failure(e), n=n)
    return passed(arities=[c.operation.arity for c in chain], tuples=sum(3**c.operation.arity for c in chain))


def _perturbed_s3() -> Operation:
    # totally symmetric, min on two-element sets, 1 on rainbow triples
    return Operation.from_function(3, 3, lambda *xs: 1 if len(set(xs)) == 3 else min(xs))


@verifier("chain-compatibility", "Identification laws of the E_3 and Boolean chains", n=7, m=9)
def chain_compatibility(ctx: RunContext, n: int, m: int) -> Outcome:
    try:
        chains = e3_chains(n, m)
    except ConstructionError as e:
        return failed(construction_failure(e))
    for label, pair in (("e3", chains), ("boolean", boolean_chains(n, m))):
        check = verify_chain_compatibility(pair)
        if not check.ok:
            assert check.failure is not None
            return failed({"chains": label, "failure": check.failure.describe()})

    control = None
    if n >= 4:
        ts_chain = (chains.ts_chain[0], _perturbed_s3()) + chains.ts_chain[2:]
        check = verify_chain_compatibility(SymmetricChainPair(3, ts_chain, chains.gm_chain))
        if check.ok:
            return failed({"perturbed_chain": "accepted a chain with a foreign s3"})
        assert check.failure is not None
        control = check.failure.describe()
    return passed(max_ts_arity=n, max_gm_arity=m, perturbed_chain_rejected=control)


def _varmaps(source: int, target: int) -> List[VarMap]:
    return [VarMap(source, target, m) for m in itertools.product(range(target), repeat=source)]


@verifier("xi-homomorphism", "xi commutes with minors on idempotent Boolean operations", max_arity=3)
def xi_homomorphism(ctx: RunContext, max_arity: int) -> Outcome:
    # x1 v ... v xn has 2^n - 1 monomials
    chains = e3_chains(max(2, max_arity), 2**max_arity - 1)
    images: Dict[Operation, Operation] = {}

    def image(f: Operation) -> Operation:
        if f not in images:
            images[f] = xi(f, chains).operation
        return images[f]

    operations = [
        f for n in range(1, max_arity + 1) for f in enumerate_operations(2, n, predicate=is_idempotent)
    ]
    pairs = 0
    for f in operations:
        for r in range(1, max_arity + 1):
            for sigma in _varmaps(f.arity, r):
                left = image(minor(f, sigma))
                right = minor(image(f), sigma)
                pairs += 1
                if left != right:
                    return failed(
                        {"f": op_json(f), "map": list(sigma.mapping), "target_arity": r},
                        xi_of_minor=op_json(left),
                        minor_of_xi=op_json(right),
                    )
    return passed(operations=len(operations), pairs=pairs)


@verifier("splitting-malcev", "The Mal'cev free structure is hom-equivalent to B2 iff no Mal'cev polymorphism", fixture="b2")
def splitting_malcev(ctx: RunContext, fixture: str) -> Outcome:
    structure = ctx.structure(fixture)
    report = free_structure_malcev(structure)
    details = {
        "fixture": fixture,
        "free_size": report.structure.domain_size if report.structure is not None else None,
        "edges": len(report.edges),
        "malcev_witness": report.condition_witness is not None,
        "hom_equivalent": report.hom_equivalent,
    }
    if report.structure is None:
        return unknown(ctx.budget or settings.enumeration_cap, **details)
    if report.forward is not None:
        zero = report.forward.mapping[0]
        if zero != operation_code(make_projection(structure.domain_size, 2, 2)):
            return failed({"h(0)": zero}, **details)
    if (report.condition_witness is None) != report.hom_equivalent:
        witness = report.condition_witness
        return failed({"witness": op_json(witness) if witness is not None else None}, **details)
    return passed(**details)


@verifier("splitting-cycles", "The cycle free structure is hom-equivalent to C_p iff no cyclic polymorphism", fixture="c2", p=2)
def splitting_cycles(ctx: RunContext, fixture: str, p: int) -> Outcome:
    report = free_structure_cycle(ctx.structure(fixture), p)
    details = {
        "fixture": fixture,
        "p": p,
        "free_size": report.structure.domain_size if report.structure is not None else None,
        "cyclic_witness": report.condition_witness is not None,
        "hom_equivalent": report.hom_equivalent,
    }
    if report.classes is not None:
        sizes = [len(c) for c in report.classes]
        details["class_sizes"] = sizes
        union = set().union(*report.classes)
        if sum(sizes) != len(union):
            return failed({"overlapping_classes": [sorted(c) for c in report.classes]}, **details)
        if sizes[0] * p != len(report.edges):
            return failed({"class_sizes": sizes, "polymorphisms": len(report.edges)}, **details)
    if report.structure is None:
        return unknown(ctx.budget or settings.enumeration_cap, **details)
    if (report.condition_witness is None) != report.hom_equivalent:
        witness = report.condition_witness
        return failed({"witness": op_json(witness) if witness is not None else None}, **details)
    return passed(**details)


@verifier("collapse-idemp", "I_2 pp-constructs I_n through the pp-power on {0,1}^n", n=3)
def collapse_idemp(ctx: RunContext, n: int) -> Outcome:
    report = collapse_idempotent(n)
    if report.structure.domain_size != 2**n:
        return failed({"domain_size": report.structure.domain_size}, n=n)
    return passed(
        n=n,
        domain_size=report.structure.domain_size,
        forward=list(report.forward.mapping),
        backward=list(report.backward.mapping),
    )


def _has_constant_endomorphism(structure: Structure) -> bool:
    return any(
        all((a,) * relation.arity in relation for _, relation in structure.relations)
        for a in range(structure.domain_size)
    )


@verifier("dichotomy", "C_1 pp-constructs A or A pp-constructs I_2", fixture="c2")
def dichotomy(ctx: RunContext, fixture: str) -> Outcome:
    structure = ctx.structure(fixture)
    report = verify_dichotomy_c1_i2(structure, budget=ctx.budget)
    expected = C1_CONSTRUCTS if _has_constant_endomorphism(structure) else CONSTRUCTS_I2
    details = {"fixture": fixture, "verdict": report.verdict, "core_size": report.core.structure.domain_size}
    if report.verdict != expected:
        return failed({"expected": expected, "got": report.verdict}, **details)
    return passed(**details)


def _pair_seeds(k: int, arity: int) -> List[List[Sequence[int]]]:
    tuples = list(itertools.product(range(k), repeat=arity))
    return [list(pair) for pair in itertools.combinations(tuples, 2)]


@verifier("baker-pixley-sample", "Invariant relations of majority clones are 2-decomposable")
def baker_pixley_sample(ctx: RunContext) -> Outcome:
    sampled = 0
    for generator in (catalog.boolean_majority(), load_operation("dualdisc3")):
        k = generator.domain_size
        for seeds in _pair_seeds(k, 3):
            relation = inv_closure([generator], seeds, domain_size=k, arity=3, budget=ctx.budget)
            sampled += 1
            if not is_n_decomposable(relation, 2):
                return failed({"generator": op_json(generator), "relation": [list(t) for t in relation.sorted_tuples()]})

    # parity is not 2-decomposable, and the clone it belongs to has no majority
    parity = Relation.from_predicate(2, 3, lambda x, y, z: (x + y + z) % 2 == 0)
    if is_n_decomposable(parity, 2):
        return failed({"relation": "parity", "decomposable": True})
    closure = generate_clone([catalog.xor(3)], 3, ctx.budget, stop_when=is_majority)
    if closure.witness is not None:
        return failed({"affine_majority": op_json(closure.witness)})
    if not closure.exhausted:
        return unknown(ctx.budget or settings.clone_budget, sampled=sampled)
    return passed(sampled=sampled, affine_clone_ternary_members=len(closure.layers[3]))


@verifier("block-structure", "Essential tuples, blocks, group structure and criticality of the parity relation")
def block_structure(ctx: RunContext) -> Outcome:
    swap = Relation(2, 2, [(0, 1), (1, 0)])
    ess = sorted(essential_tuples(swap))
    if ess != [(0, 0), (1, 1)]:
        return failed({"essential_tuples": ess})

    parity = Relation.from_predicate(2, 3, lambda x, y, z: (x + y + z) % 2 == 0)
    if not is_essential(parity):
        return failed({"parity_essential": False})
    found = blocks(parity)
    if len(found) != 1 or found[0].product_factors != ((0, 1),) * 3:
        return failed({"blocks": [b.sorted_members() for b in found]})
    structure = block_group_structure(parity, found[0])
    if structure is None or structure.group.name != "Z2":
        return failed({"group_structure": None if structure is None else structure.group.name})
    if any(phi != {0: 0, 1: 1} for phi in structure.maps):
        return failed({"maps": [dict(phi) for phi in structure.maps]})

    report = is_critical(parity, [catalog.xor(2)], ctx.budget)
    if report.verdict is CriticalityVerdict.UNKNOWN:
        return unknown(report.budget or ctx.budget or settings.enumeration_cap, reason=report.reason)
    if report.verdict is not CriticalityVerdict.CRITICAL:
        return failed({"criticality": report.verdict.value, "reason": report.reason})
    if is_n_decomposable(parity, 2):
        return failed({"parity_2_decomposable": True})
    return passed(essential=[list(t) for t in ess], group="Z2", critical=True, decomposable_2=False)


@verifier(
    "majority-search",
    "Bounded clone generation looking for a majority",
    generators=("malcev3", "min3", "symmaj3"),
    max_arity=3,
)
def majority_search(ctx: RunContext, generators: Sequence[str], max_arity: int) -> Outcome:
    ops = [load_operation(name) for name in generators]
    closure = generate_clone(ops, max_arity, ctx.budget, stop_when=is_majority)
    details = {
        "generators": list(generators),
        "members": len(closure),
        "tables": closure.produced,
        "compositions": closure.compositions,
    }
    if closure.witness is not None:
        return passed(majority=op_json(closure.witness), **details)
    if closure.exhausted:
        return failed({"exhausted_without_majority": True, "max_arity": max_arity}, **details)
    return unknown(ctx.budget or settings.clone_budget, **details)


@verifier("c1-separation", "Pol(C_1) has a constant unary member, Pol(I_n) does not", n=2)
def c1_separation(ctx: RunContext, n: int) -> Outcome:
    ones = find_witness(const(), structure=catalog.one_element_structure(), budget=ctx.budget)
    if not ones.found:
        return failed({"c1_constant": None})
    idempotent = find_witness(const(), structure=catalog.idempotent_structure(n), budget=ctx.budget)
    if idempotent.found:
        assert idempotent.assignment is not None
        return failed({"i_n_constant": op_json(idempotent.assignment["f"])}, n=n)
    if not idempotent.definitive:
        return unknown(idempotent.budget, n=n)
    return passed(n=n)


@verifier("core-identities", "Cyclic identities agree on A and on its core expanded by singletons", fixture="p3", max_p=3)
def core_identities(ctx: RunContext, fixture: str, max_p: int) -> Outcome:
    structure = ctx.structure(fixture)
    core = core_of(structure, budget=ctx.budget)
    expanded = expand_by_singletons(core.structure)
    answers = {}
    for p in range(2, max_p + 1):
        found = []
        for target in (structure, expanded):
            search = find_witness(sigma_p(p), structure=target, symmetry=Symmetry.CYCLIC, budget=ctx.budget, rng=ctx.rng)
            if not search.definitive:
                return unknown(search.budget, fixture=fixture, p=p)
            found.append(search.found)
        answers[str(p)] = found[0]
        if found[0] != found[1]:
            return failed({"p": p, "structure": found[0], "expanded_core": found[1]}, fixture=fixture)
    return passed(fixture=fixture, core_size=core.structure.domain_size, cyclic=answers)


def _is_permutation_graph(relation: Relation) -> bool:
    rows = relation.sorted_tuples()
    k = relation.domain_size
    return sorted(a for a, _ in rows) == list(range(k)) and sorted(b for _, b in rows) == list(range(k))


@verifier("k21-sanity", "The 21-element structure loads and its core is a verified retract")
def k21_sanity(ctx: RunContext) -> Outcome:
    structure = ctx.structure("k21")
    if structure.domain_size != 21 or structure.names != ["R", "S"]:
        return failed({"domain_size": structure.domain_size, "relations": structure.names})
    for name, relation in structure.relations:
        if not _is_permutation_graph(relation):
            return failed({"not_a_permutation_graph": name})
    core = core_of(structure, budget=ctx.budget)
    retraction_fixes_core = all(core.retraction(a) == i for i, a in enumerate(core.elements))
    if not (core.retraction.verify() and core.embedding.verify() and retraction_fixes_core):
        return failed({"core_elements": list(core.elements)})
    return passed(core_size=core.structure.domain_size, core_elements=list(core.elements))


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def get_verifier(name: str) -> Verifier:
    try:
        return REGISTRY[name]
    except KeyError:
        raise VerifierError(f"Unknown verifier {name!r}; known: {', '.join(sorted(REGISTRY))}") from None


def run_verifier(
    name: str,
    params: Optional[Mapping[str, Any]] = None,
    *,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    fixtures: Optional[str] = None,
) -> VerifierResult:
    """
    Run a named verifier.

    Args:
        name: Registry name, e.g. ``remark-cycles``
        params: Verifier parameters; strings are coerced to the default's type
        budget: Search budget passed to the underlying searches
        seed: Scan-order seed; never changes the verdict
        fixtures: Fixture directory override

    Returns:
        VerifierResult with elapsed seconds

    Raises:
        VerifierError: For unknown verifiers or parameters
        ClonelabError: For usage errors raised by the algebra modules
    """
    entry = get_verifier(name)
    bound = entry.bind(params or {})
    ctx = RunContext(
        budget=budget,
        rng=np.random.default_rng(seed) if seed is not None else None,
        fixtures=fixtures,
    )
    logger.info("Verifier started", verifier=name, params=bound)
    started = time.perf_counter()
    try:
        outcome = entry.fn(ctx, **bound)
    except BudgetExceeded as e:
        outcome = unknown(e.budget, error=str(e), used=e.used)
    elapsed = time.perf_counter() - started

    if elapsed > settings.verifier_soft_wall_sec:
        logger.warning("Verifier exceeded soft wall", verifier=name, elapsed=elapsed, wall=settings.verifier_soft_wall_sec)
    result = VerifierResult(
        name=name,
        verdict=outcome.verdict,
        details={"params": {k: list(v) if isinstance(v, tuple) else v for k, v in bound.items()}, **outcome.details},
        counterexample=outcome.counterexample,
        budget=outcome.budget,
        elapsed=round(elapsed, 6),
    )
    logger.info("Verifier finished", verifier=name, verdict=result.verdict.value, elapsed=result.elapsed)
    return result


def check_condition(
    condition: MinorCondition,
    *,
    operations: Optional[Sequence[Operation]] = None,
    structure: Optional[Structure] = None,
    symmetry: Symmetry = Symmetry.NONE,
    budget: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> VerifierResult:
    """
    Decide a minor condition over explicit operations or a structure's polymorphisms.

    A definitive miss is a fail. When the operations match the condition's symbols
    one to one, the failing identity and valuation are attached as counterexample.

    Raises:
        VerifierError: If neither operations nor a structure is given
    """
    if operations is None and structure is None:
        raise VerifierError("check needs operations or a structure")
    search = find_witness(
        condition,
        operations=operations,
        structure=structure if operations is None else None,
        symmetry=symmetry,
        budget=budget,
        rng=rng,
    )
    details: Dict[str, Any] = {"definitive": search.definitive, "scanned": search.scanned}
    if search.found:
        assert search.assignment is not None
        details["witness"] = {s: op_json(op) for s, op in search.assignment.items()}
        return VerifierResult(name=condition.name, verdict=Verdict.PASS, details=details)
    if not search.definitive:
        return VerifierResult(name=condition.name, verdict=Verdict.UNKNOWN, details=details, budget=search.budget)

    counterexample: Dict[str, Any] = {"witness": None}
    symbols = [s for s, _ in condition.symbols]
    if operations is not None and len(operations) == len(symbols):
        assignment = dict(zip(symbols, operations))
        if all(assignment[s].arity == condition.arity_of(s) for s in symbols):
            violation = find_violation(assignment, condition)
            if violation is not None:
                counterexample = {
                    "identity": violation.identity.render(),
                    "valuation": list(violation.valuation),
                    "lhs": violation.lhs_value,
                    "rhs": violation.rhs_value,
                }
    return VerifierResult(name=condition.name, verdict=Verdict.FAIL, details=details, counterexample=counterexample)
