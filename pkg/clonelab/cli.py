"""Command-line frontend: every workbench operation plus the named verifiers."""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from clonelab import __version__
from clonelab.algebra import constructions as cons
from clonelab.algebra.conditions import MinorCondition, builtin
from clonelab.algebra.ops import (
    Operation,
    Symmetry,
    VarMap,
    apply,
    compose,
    make_projection,
    minor,
)
from clonelab.algebra.ppcon import (
    core_of,
    find_homomorphism,
    free_structure_cycle,
    free_structure_malcev,
    iter_homomorphisms,
    pp_power,
)
from clonelab.algebra.rel import (
    CriticalityVerdict,
    Relation,
    Structure,
    blocks,
    essential_tuples,
    inv_closure,
    is_critical,
    is_n_decomposable,
    pol_structure,
)
from clonelab.config import settings
from clonelab.errors import ClonelabError
from clonelab.fixtures import load_operation, load_structure, parse_model, read_json
from clonelab.logging import generate_correlation_id, get_logger, set_correlation_id, setup_logging
from clonelab.schemas import (
    BlockModel,
    ConditionModel,
    ConstructionModel,
    FreeStructureReportModel,
    OperationModel,
    PPFormulaModel,
    RelationModel,
    StructureModel,
    Verdict,
    homomorphism_map,
)
from clonelab.verifiers import REGISTRY, check_condition, e3_chains, run_verifier

logger = get_logger(__name__)

# exit code, JSON payload, text rendering
Result = Tuple[int, Any, str]


class UsageError(ClonelabError):
    """Raised for command-line arguments that parse but make no sense."""
    pass


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise UsageError(f"Expected comma-separated integers, got {text!r}") from None


def _structure(args: argparse.Namespace, name: str) -> Structure:
    return load_structure(name, args.fixtures)


def _relation(args: argparse.Namespace, source: str) -> Relation:
    """A relation from a JSON file, or ``fixture:NAME`` for a relation of a fixture."""
    if Path(source).is_file():
        return parse_model(RelationModel, read_json(source), source).to_relation()
    if ":" in source:
        fixture, name = source.split(":", 1)
        return _structure(args, fixture).relation(name)
    raise UsageError(f"Relation {source!r} is neither a JSON file nor fixture:NAME")


def _condition(args: argparse.Namespace) -> MinorCondition:
    name = args.condition
    if Path(name).is_file():
        return parse_model(ConditionModel, read_json(name), name).to_condition(Path(name).stem)
    return builtin(name, p=args.p, n=args.n, expanded=args.expanded)


def _verify_flag(args: argparse.Namespace) -> Optional[bool]:
    return False if args.unchecked else None


def _rng(args: argparse.Namespace) -> Optional[np.random.Generator]:
    return np.random.default_rng(args.seed) if args.seed is not None else None


def op_payload(op: Operation) -> Dict[str, Any]:
    return OperationModel.from_operation(op).dump()


def relation_payload(relation: Relation) -> Dict[str, Any]:
    return RelationModel.from_relation(relation).dump()


def structure_payload(structure: Structure) -> Dict[str, Any]:
    return StructureModel.from_structure(structure).dump()


def _table_text(op: Operation) -> str:
    return f"k={op.domain_size} n={op.arity} table={op.values()}"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_op(args: argparse.Namespace) -> Result:
    if args.action == "project":
        op = make_projection(args.k, args.n, args.i)
    elif args.action == "apply":
        f = load_operation(args.op)
        value = apply(f, _int_list(args.values))
        return 0, {"value": value}, str(value)
    elif args.action == "minor":
        f = load_operation(args.op)
        mapping = _int_list(args.map)
        op = minor(f, VarMap.of(mapping, args.to))
    else:
        f = load_operation(args.op)
        op = compose(f, [load_operation(g) for g in args.args])
    return 0, op_payload(op), _table_text(op)


def cmd_check(args: argparse.Namespace) -> Result:
    condition = _condition(args)
    if args.ops:
        result = check_condition(
            condition, operations=[load_operation(o) for o in args.ops], budget=args.budget, rng=_rng(args)
        )
    elif args.structure:
        result = check_condition(
            condition,
            structure=_structure(args, args.structure),
            symmetry=Symmetry(args.symmetry),
            budget=args.budget,
            rng=_rng(args),
        )
    else:
        raise UsageError("check needs --ops or --structure")

    text = f"{condition.name}: {result.verdict.value}"
    for symbol, table in result.details.get("witness", {}).items():
        text += f"\n  {symbol}: k={table['domain']} n={table['arity']} table={table['table']}"
    return result.exit_code, result.dump(), text


def cmd_pol(args: argparse.Namespace) -> Result:
    structure = _structure(args, args.structure)
    ops = pol_structure(structure, args.n, symmetry=Symmetry(args.symmetry))
    payload = {"count": len(ops), "operations": [op_payload(op) for op in ops]}
    text = f"{len(ops)} polymorphisms of arity {args.n}" + "".join(f"\n  {op.values()}" for op in ops)
    return 0, payload, text


def cmd_invclosure(args: argparse.Namespace) -> Result:
    generators = [load_operation(o) for o in args.op]
    if args.relation:
        seed = _relation(args, args.relation)
        tuples: Sequence[Sequence[int]] = seed.sorted_tuples()
        k, arity = seed.domain_size, seed.arity
    else:
        try:
            tuples = [tuple(t) for t in json.loads(args.tuples)]
        except (ValueError, TypeError):
            raise UsageError(f"--tuples must be a JSON list of tuples, got {args.tuples!r}") from None
        k = args.k if args.k is not None else (generators[0].domain_size if generators else None)
        arity = len(tuples[0]) if tuples else None
    relation = inv_closure(generators, tuples, domain_size=k, arity=arity, budget=args.budget)
    return 0, relation_payload(relation), f"{len(relation)} tuples: {relation.sorted_tuples()}"


def cmd_essential(args: argparse.Namespace) -> Result:
    relation = _relation(args, args.relation)
    ess = sorted(essential_tuples(relation))
    payload = {"essential": bool(ess), "tuples": [list(t) for t in ess]}
    return 0, payload, f"essential={bool(ess)} tuples={ess}"


def _block_payload(relation: Relation) -> List[Dict[str, Any]]:
    return [BlockModel.from_block(relation, block).dump() for block in blocks(relation)]


def cmd_blocks(args: argparse.Namespace) -> Result:
    found = _block_payload(_relation(args, args.relation))
    lines = [
        f"block {i}: {len(b['members'])} tuples trivial={b['trivial']} group={b.get('group_structure', {}).get('group')}"
        for i, b in enumerate(found)
    ]
    return 0, {"blocks": found}, "\n".join(lines)


def cmd_critical(args: argparse.Namespace) -> Result:
    relation = _relation(args, args.relation)
    report = is_critical(relation, [load_operation(o) for o in args.op], args.budget, complete=not args.incomplete)
    payload = {
        "verdict": report.verdict.value,
        "reason": report.reason,
        "notion": report.notion,
        "cover": relation_payload(report.cover) if report.cover is not None else None,
        "provisional": report.provisional.value if report.provisional is not None else None,
        "budget": report.budget,
    }
    code = 2 if report.verdict is CriticalityVerdict.UNKNOWN else 0
    return code, payload, f"{report.verdict.value}: {report.reason}"


def cmd_decomposable(args: argparse.Namespace) -> Result:
    value = is_n_decomposable(_relation(args, args.relation), args.n)
    return 0, {"n": args.n, "decomposable": value}, f"{args.n}-decomposable: {value}"


def cmd_hom(args: argparse.Namespace) -> Result:
    source, target = _structure(args, args.source), _structure(args, args.target)
    if args.all:
        maps = [list(h.mapping) for h in iter_homomorphisms(source, target, budget=args.budget)]
        return 0, {"count": len(maps), "homomorphisms": maps}, f"{len(maps)} homomorphisms"
    hom = find_homomorphism(source, target, budget=args.budget)
    mapping = homomorphism_map(hom)
    return 0, {"homomorphism": mapping}, f"homomorphism: {mapping}"


def cmd_core(args: argparse.Namespace) -> Result:
    core = core_of(_structure(args, args.structure), budget=args.budget)
    payload = {
        "elements": list(core.elements),
        "structure": structure_payload(core.structure),
        "retraction": list(core.retraction.mapping),
    }
    return 0, payload, f"core on {list(core.elements)}"


def cmd_pppower(args: argparse.Namespace) -> Result:
    structure = _structure(args, args.structure)
    raw = read_json(args.formulas)
    if not isinstance(raw, dict):
        raise UsageError("--formulas must hold an object mapping relation names to formulas")
    definitions = {
        name: parse_model(PPFormulaModel, body, f"{args.formulas}:{name}").to_formula() for name, body in raw.items()
    }
    built = pp_power(structure, args.n, definitions, cap=args.budget)
    return 0, structure_payload(built), f"pp-power on {built.domain_size} elements with {built.names}"


def _construction_result(construction: cons.Construction, extra: Optional[Dict[str, Any]] = None) -> Result:
    payload = ConstructionModel.from_construction(construction).dump()
    if extra:
        payload.update(extra)
    return 0, payload, f"{construction.name}: {_table_text(construction.operation)}"


def cmd_construct(args: argparse.Namespace) -> Result:
    verify = _verify_flag(args)
    kind = args.kind
    if kind == "maj":
        built = cons.symmetrize_majority(
            load_operation(args.op), load_operation(args.c2), load_operation(args.c3), verify=verify
        )
        return _construction_result(built)
    if kind == "min":
        built = cons.minority_from_malcev_majority(load_operation(args.malcev), load_operation(args.majority), verify=verify)
        if args.c2 and args.c3:
            built = cons.symmetrize_minority(
                built.operation, load_operation(args.c2), load_operation(args.c3), verify=verify
            )
        return _construction_result(built)
    if kind == "dswitch":
        m3 = load_operation(args.op)
        return _construction_result(cons.d_switch(m3, verify=verify), {"rainbow_constant": cons.constant_of_symmetric(m3)})
    if kind == "genmin":
        return _construction_result(cons.generalized_minority(load_operation(args.op), args.n, verify=verify))
    if kind == "ts":
        chain = cons.totally_symmetric_chain(
            load_operation(args.minority),
            load_operation(args.majority),
            load_operation(args.s2),
            args.n,
            verify=verify,
        )
        payload = {"chain": [ConstructionModel.from_construction(c).dump() for c in chain]}
        return 0, payload, "\n".join(f"{c.name}: {_table_text(c.operation)}" for c in chain)
    if kind == "polyrep":
        rep = cons.poly_rep(load_operation(args.op))
        payload = {"variables": rep.variable_count, "monomials": [list(w) for w in rep.monomials], "length": rep.length}
        return 0, payload, rep.render()
    chains = (
        cons.boolean_chains(args.max_ts, args.max_gm) if args.chains == "boolean" else e3_chains(args.max_ts, args.max_gm)
    )
    return _construction_result(cons.xi(load_operation(args.op), chains, verify=verify))


def cmd_free(args: argparse.Namespace) -> Result:
    structure = _structure(args, args.structure)
    if args.kind == "malcev":
        report = free_structure_malcev(structure)
    else:
        report = free_structure_cycle(structure, args.p)
    payload = FreeStructureReportModel.from_report(report).dump()
    size = report.structure.domain_size if report.structure is not None else None
    return 0, payload, f"{report.kind}: size={size} edges={len(report.edges)} hom_equivalent={report.hom_equivalent}"


def _verifier_params(extra: Sequence[str]) -> Dict[str, str]:
    """``--key value`` and ``--key=value`` pairs following ``verify NAME``."""
    params: Dict[str, str] = {}
    tokens = list(extra)
    while tokens:
        token = tokens.pop(0)
        if not token.startswith("--"):
            raise UsageError(f"Unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        elif tokens and not tokens[0].startswith("--"):
            value = tokens.pop(0)
        else:
            value = "true"
        params[key] = value
    return params


def cmd_verify(args: argparse.Namespace, extra: Sequence[str]) -> Result:
    if args.list or not args.name:
        listing = [
            {"name": v.name, "summary": v.summary, "params": {k: list(d) if isinstance(d, tuple) else d for k, d in v.defaults.items()}}
            for v in sorted(REGISTRY.values(), key=lambda v: v.name)
        ]
        return 0, {"verifiers": listing}, "\n".join(f"{v['name']}: {v['summary']}" for v in listing)
    result = run_verifier(
        args.name,
        _verifier_params(extra),
        budget=args.budget,
        seed=args.seed,
        fixtures=args.fixtures,
    )
    text = f"{result.name}: {result.verdict.value} ({result.elapsed:.3f}s)"
    if result.counterexample is not None:
        text += f"\n  counterexample: {json.dumps(result.counterexample)}"
    if result.verdict is Verdict.UNKNOWN:
        text += f"\n  budget exhausted: {result.budget}"
    return result.exit_code, result.dump(), text


def cmd_serve(args: argparse.Namespace) -> Result:
    import uvicorn

    uvicorn.run("clonelab.main:app", host=args.host or settings.host, port=args.port or settings.port)
    return 0, None, ""


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clonelab", description="Clone and minor-condition workbench")
    parser.add_argument("--version", action="version", version=f"clonelab {__version__}")
    parser.add_argument("--json", action="store_true", help="Emit JSON on standard output.")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized scan orders.")
    parser.add_argument("--budget", type=int, default=None, help="Search budget for the command.")
    parser.add_argument("--fixtures", type=str, default=None, help="Fixture directory.")
    parser.add_argument("--log-level", type=str, default=None, help="Log level (logs go to standard error).")
    subparsers = parser.add_subparsers(dest="command", required=True)

    op = subparsers.add_parser("op", help="Operation algebra.")
    op_actions = op.add_subparsers(dest="action", required=True)
    p = op_actions.add_parser("minor", help="f_sigma for a variable map.")
    p.add_argument("--op", required=True, help="Operation name or JSON file.")
    p.add_argument("--map", required=True, help="0-based images, e.g. 0,0,1.")
    p.add_argument("--to", type=int, default=None, help="Target arity (default: max image + 1).")
    p = op_actions.add_parser("compose", help="f(g_1, ..., g_n).")
    p.add_argument("--op", required=True)
    p.add_argument("--args", nargs="+", required=True)
    p = op_actions.add_parser("project", help="The projection pr^n_i over E_k.")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i", type=int, required=True, help="1-based coordinate.")
    p = op_actions.add_parser("apply", help="Evaluate f at a tuple.")
    p.add_argument("--op", required=True)
    p.add_argument("--values", required=True)

    p = subparsers.add_parser("check", help="Search a witness of a minor condition.")
    p.add_argument("condition", help="Built-in condition name or condition JSON file.")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--expanded", action="store_true")
    p.add_argument("--ops", action="append", default=None, help="Candidate operation; repeatable.")
    p.add_argument("--structure", default=None, help="Search among the polymorphisms of a structure.")
    p.add_argument("--symmetry", choices=[s.value for s in Symmetry], default=Symmetry.NONE.value)

    p = subparsers.add_parser("pol", help="Polymorphisms of a structure.")
    p.add_argument("--structure", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--symmetry", choices=[s.value for s in Symmetry], default=Symmetry.NONE.value)

    p = subparsers.add_parser("invclosure", help="Least relation closed under operations.")
    p.add_argument("--op", action="append", default=[])
    p.add_argument("--relation", default=None)
    p.add_argument("--tuples", default="[]", help="Seed tuples as JSON.")
    p.add_argument("--k", type=int, default=None)

    for name, text in (
        ("essential", "Essential tuples of a relation."),
        ("blocks", "Blocks of R with its essential tuples."),
    ):
        p = subparsers.add_parser(name, help=text)
        p.add_argument("--relation", required=True, help="Relation JSON file or fixture:NAME.")

    p = subparsers.add_parser("critical", help="Criticality relative to a generated clone.")
    p.add_argument("--relation", required=True)
    p.add_argument("--op", action="append", default=[])
    p.add_argument("--incomplete", action="store_true", help="The generators may not generate Pol(R).")

    p = subparsers.add_parser("decomposable", help="n-decomposability of a relation.")
    p.add_argument("--relation", required=True)
    p.add_argument("--n", type=int, required=True)

    p = subparsers.add_parser("hom", help="Homomorphism search.")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--all", action="store_true")

    p = subparsers.add_parser("core", help="Core of a structure.")
    p.add_argument("--structure", required=True)

    p = subparsers.add_parser("pppower", help="pp-power of a structure.")
    p.add_argument("--structure", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--formulas", required=True, help="JSON file mapping relation names to formulas.")

    construct = subparsers.add_parser("construct", help="Explicit constructions.")
    construct.add_argument("--unchecked", action="store_true", help="Skip pre/postcondition checks (unsafe).")
    kinds = construct.add_subparsers(dest="kind", required=True)
    p = kinds.add_parser("maj", help="Symmetrize a quasi-majority.")
    p.add_argument("--op", required=True)
    p.add_argument("--c2", required=True)
    p.add_argument("--c3", required=True)
    p = kinds.add_parser("min", help="Minority from a Mal'cev and a majority, optionally symmetrized.")
    p.add_argument("--malcev", required=True)
    p.add_argument("--majority", required=True)
    p.add_argument("--c2", default=None)
    p.add_argument("--c3", default=None)
    p = kinds.add_parser("dswitch", help="D^c from a symmetric minority over E_3.")
    p.add_argument("--op", required=True)
    p = kinds.add_parser("genmin", help="Generalized minority of odd arity.")
    p.add_argument("--op", required=True)
    p.add_argument("--n", type=int, required=True)
    p = kinds.add_parser("ts", help="Totally symmetric chain s_2..s_n.")
    p.add_argument("--minority", required=True)
    p.add_argument("--majority", required=True)
    p.add_argument("--s2", required=True)
    p.add_argument("--n", type=int, required=True)
    p = kinds.add_parser("polyrep", help="XOR-of-monomials form of an idempotent Boolean operation.")
    p.add_argument("--op", required=True)
    p = kinds.add_parser("xi", help="Image of an idempotent Boolean operation.")
    p.add_argument("--op", required=True)
    p.add_argument("--chains", choices=["e3", "boolean"], default="e3")
    p.add_argument("--max-ts", type=int, default=3)
    p.add_argument("--max-gm", type=int, default=7)

    free = subparsers.add_parser("free", help="Free structures over polymorphisms.")
    free_kinds = free.add_subparsers(dest="kind", required=True)
    p = free_kinds.add_parser("malcev")
    p.add_argument("--structure", required=True)
    p = free_kinds.add_parser("cycle")
    p.add_argument("--structure", required=True)
    p.add_argument("--p", type=int, required=True)

    p = subparsers.add_parser("verify", help="Run a named verifier; extra --key value pairs are its parameters.")
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--list", action="store_true")

    p = subparsers.add_parser("serve", help="Run the HTTP service.")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    return parser


COMMANDS = {
    "op": cmd_op,
    "check": cmd_check,
    "pol": cmd_pol,
    "invclosure": cmd_invclosure,
    "essential": cmd_essential,
    "blocks": cmd_blocks,
    "critical": cmd_critical,
    "decomposable": cmd_decomposable,
    "hom": cmd_hom,
    "core": cmd_core,
    "pppower": cmd_pppower,
    "construct": cmd_construct,
    "free": cmd_free,
    "serve": cmd_serve,
}


def _emit(args: argparse.Namespace, payload: Any, text: str) -> None:
    if args.json and payload is not None:
        print(json.dumps(payload))
    elif text:
        print(text)


def _main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra and args.command != "verify":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")

    setup_logging(args.log_level or settings.log_level, settings.log_json)
    set_correlation_id(generate_correlation_id())
    logger.info("Command started", command=args.command)

    try:
        if args.command == "verify":
            code, payload, text = cmd_verify(args, extra)
        else:
            code, payload, text = COMMANDS[args.command](args)
    except ClonelabError as e:
        if isinstance(e, cons.ConstructionError) and e.condition is not None:
            envelope = {
                "code": "1",
                "status": "construction_failed",
                "error_message": str(e),
                "condition": e.condition,
                "valuation": list(e.valuation) if e.valuation is not None else None,
            }
            _emit(args, envelope, f"[error] {e}")
            return 1
        logger.info("Command failed", command=args.command, error=str(e))
        envelope = {"code": "2", "status": "error", "error_message": str(e)}
        if args.json:
            _emit(args, envelope, "")
        else:
            print(f"[error] {e}", file=sys.stderr)
        return 2
    _emit(args, payload, text)
    logger.info("Command finished", command=args.command, exit_code=code)
    return code


def main() -> None:
    sys.exit(_main())


if __name__ == "__main__":
    main()
