"""Term trees recording how constructed operations arise from their inputs by minors and composition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

from clonelab.algebra.ops import Operation, OperationError, VarMap, compose, make_projection, minor


class Term:
    """A node of a term DAG; shared subterms are evaluated once."""

    @property
    def arity(self) -> int:
        raise NotImplementedError

    @property
    def domain_size(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Leaf(Term):
    """A named input operation."""

    name: str
    operation: Operation

    @property
    def arity(self) -> int:
        return self.operation.arity

    @property
    def domain_size(self) -> int:
        return self.operation.domain_size


@dataclass(frozen=True, eq=False)
class ProjectionTerm(Term):
    size: int
    n: int
    index: int

    @property
    def arity(self) -> int:
        return self.n

    @property
    def domain_size(self) -> int:
        return self.size


@dataclass(frozen=True, eq=False)
class MinorTerm(Term):
    term: Term
    varmap: VarMap

    def __post_init__(self) -> None:
        if self.varmap.source_arity != self.term.arity:
            raise OperationError("Minor term: variable map does not match the subterm arity")

    @property
    def arity(self) -> int:
        return self.varmap.target_arity

    @property
    def domain_size(self) -> int:
        return self.term.domain_size


@dataclass(frozen=True, eq=False)
class ComposeTerm(Term):
    head: Term
    args: Tuple[Term, ...]

    def __post_init__(self) -> None:
        if len(self.args) != self.head.arity:
            raise OperationError("Compose term: argument count does not match the head arity")
        if len({a.arity for a in self.args}) != 1:
            raise OperationError("Compose term: arguments must share their arity")

    @property
    def arity(self) -> int:
        return self.args[0].arity

    @property
    def domain_size(self) -> int:
        return self.head.domain_size


def evaluate(term: Term, memo: Optional[Dict[int, Operation]] = None) -> Operation:
    """Replay a term with compose and minor only."""
    memo = {} if memo is None else memo
    key = id(term)
    if key in memo:
        return memo[key]
    if isinstance(term, Leaf):
        result = term.operation
    elif isinstance(term, ProjectionTerm):
        result = make_projection(term.size, term.n, term.index)
    elif isinstance(term, MinorTerm):
        result = minor(evaluate(term.term, memo), term.varmap)
    elif isinstance(term, ComposeTerm):
        result = compose(evaluate(term.head, memo), [evaluate(a, memo) for a in term.args])
    else:
        raise OperationError(f"Unknown term node {type(term).__name__}")
    memo[key] = result
    return result


def leaves(term: Term) -> Dict[str, Operation]:
    """The named inputs of a term."""
    found: Dict[str, Operation] = {}
    seen = set()
    stack = [term]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Leaf):
            if node.name in found and found[node.name] != node.operation:
                raise OperationError(f"Leaf name {node.name!r} is bound to two operations")
            found[node.name] = node.operation
        elif isinstance(node, MinorTerm):
            stack.append(node.term)
        elif isinstance(node, ComposeTerm):
            stack.append(node.head)
            stack.extend(node.args)
    return found


def term_to_dict(term: Term) -> Dict[str, Any]:
    """
    Serialize a term DAG as a node list.

    Children precede their parents; compose nodes reference ``head`` and
    ``args`` by node id and leaves are listed once under ``leaves``.
    """
    ids: Dict[int, int] = {}
    nodes: List[Dict[str, Any]] = []

    def visit(node: Term) -> int:
        if id(node) in ids:
            return ids[id(node)]
        entry: Dict[str, Any]
        if isinstance(node, Leaf):
            entry = {"op": "leaf", "name": node.name}
        elif isinstance(node, ProjectionTerm):
            entry = {"op": "projection", "domain": node.size, "arity": node.n, "index": node.index}
        elif isinstance(node, MinorTerm):
            child = visit(node.term)
            sigma = node.varmap
            entry = {
                "op": "minor",
                "of": child,
                "map": {"from": sigma.source_arity, "to": sigma.target_arity, "map": list(sigma.mapping)},
            }
        elif isinstance(node, ComposeTerm):
            head = visit(node.head)
            args = [visit(a) for a in node.args]
            entry = {"op": "compose", "head": head, "args": args}
        else:
            raise OperationError(f"Unknown term node {type(node).__name__}")
        node_id = len(nodes)
        nodes.append({"id": node_id, **entry})
        ids[id(node)] = node_id
        return node_id

    root = visit(term)
    return {
        "root": root,
        "nodes": nodes,
        "leaves": {
            name: {"domain": op.domain_size, "arity": op.arity, "table": op.values()}
            for name, op in sorted(leaves(term).items())
        },
    }


def term_from_dict(data: Mapping[str, Any]) -> Term:
    """Rebuild a term from ``term_to_dict`` output."""
    inputs = {
        name: Operation(body["domain"], body["arity"], body["table"])
        for name, body in data.get("leaves", {}).items()
    }
    built: Dict[int, Term] = {}
    for entry in data["nodes"]:
        op = entry["op"]
        node: Term
        if op == "leaf":
            if entry["name"] not in inputs:
                raise OperationError(f"Term references unknown leaf {entry['name']!r}")
            node = Leaf(entry["name"], inputs[entry["name"]])
        elif op == "projection":
            node = ProjectionTerm(entry["domain"], entry["arity"], entry["index"])
        elif op == "minor":
            sigma = entry["map"]
            node = MinorTerm(built[entry["of"]], VarMap(sigma["from"], sigma["to"], tuple(sigma["map"])))
        elif op == "compose":
            node = ComposeTerm(built[entry["head"]], tuple(built[i] for i in entry["args"]))
        else:
            raise OperationError(f"Unknown term node kind {op!r}")
        built[entry["id"]] = node
    return built[data["root"]]
