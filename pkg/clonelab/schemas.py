"""JSON wire models for operations, relations, structures, conditions, formulas and results."""

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from clonelab.algebra.conditions import MinorCondition, MinorIdentity
from clonelab.algebra.constructions import Construction
from clonelab.algebra.ops import Operation, VarMap
from clonelab.algebra.ppcon import FreeStructureReport, Homomorphism, PPFormula
from clonelab.algebra.rel import Block, Relation, RelationError, Structure, block_group_structure
from clonelab.algebra.terms import term_to_dict
from clonelab.logging import get_logger

logger = get_logger(__name__)


class WireModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    def dump(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, exclude_none=True)


class OperationModel(WireModel):
    """{"domain": k, "arity": n, "table": [...]} with x1 the most significant index digit."""

    domain: int = Field(ge=1)
    arity: int = Field(ge=1)
    table: List[int]

    @model_validator(mode="after")
    def check_table(self) -> "OperationModel":
        if len(self.table) != self.domain**self.arity:
            raise ValueError(f"table needs {self.domain ** self.arity} entries, got {len(self.table)}")
        if any(not 0 <= v < self.domain for v in self.table):
            raise ValueError(f"table entries must lie in 0..{self.domain - 1}")
        return self

    def to_operation(self) -> Operation:
        return Operation(self.domain, self.arity, self.table)

    @classmethod
    def from_operation(cls, op: Operation) -> "OperationModel":
        return cls(domain=op.domain_size, arity=op.arity, table=op.values())


class VarMapModel(WireModel):
    """{"from": n, "to": r, "map": [sigma(0), ..., sigma(n-1)]}, 0-based."""

    source: int = Field(alias="from", ge=1)
    target: int = Field(alias="to", ge=1)
    map: List[int]

    def to_varmap(self) -> VarMap:
        return VarMap(self.source, self.target, tuple(self.map))

    @classmethod
    def from_varmap(cls, sigma: VarMap) -> "VarMapModel":
        return cls(source=sigma.source_arity, target=sigma.target_arity, map=list(sigma.mapping))


class RelationModel(WireModel):
    """{"domain": k, "arity": m, "tuples": [[...], ...]}, tuples sorted on output."""

    domain: int = Field(ge=1)
    arity: int = Field(ge=1)
    tuples: List[List[int]]

    def to_relation(self) -> Relation:
        return Relation(self.domain, self.arity, self.tuples)

    @classmethod
    def from_relation(cls, relation: Relation) -> "RelationModel":
        return cls(
            domain=relation.domain_size,
            arity=relation.arity,
            tuples=[list(t) for t in relation.sorted_tuples()],
        )


class StructureModel(WireModel):
    """{"domain": k, "relations": {"name": Relation, ...}} in insertion order, optional element labels."""

    domain: int = Field(ge=1)
    relations: Dict[str, RelationModel]
    labels: Optional[List[str]] = None

    def to_structure(self) -> Structure:
        return Structure(
            self.domain,
            [(name, body.to_relation()) for name, body in self.relations.items()],
            self.labels,
        )

    @classmethod
    def from_structure(cls, structure: Structure) -> "StructureModel":
        return cls(
            domain=structure.domain_size,
            relations={name: RelationModel.from_relation(r) for name, r in structure.relations},
            labels=list(structure.labels) if structure.labels is not None else None,
        )


class IdentityModel(WireModel):
    lhs: Tuple[str, List[int]]
    rhs: Tuple[str, List[int]]


class ConditionModel(WireModel):
    """{"symbols": {"f": 3}, "identities": [{"lhs": ["f", [0,0,1]], "rhs": ["f", [1,1,0]]}]}."""

    symbols: Dict[str, int]
    identities: List[IdentityModel]

    def to_condition(self, name: str = "custom") -> MinorCondition:
        identities = []
        for identity in self.identities:
            (left, lmap), (right, rmap) = identity.lhs, identity.rhs
            variables = max(lmap + rmap, default=-1) + 1
            identities.append(
                MinorIdentity(
                    left,
                    VarMap(len(lmap), variables, tuple(lmap)),
                    right,
                    VarMap(len(rmap), variables, tuple(rmap)),
                )
            )
        return MinorCondition.build(self.symbols, identities, name)

    @classmethod
    def from_condition(cls, condition: MinorCondition) -> "ConditionModel":
        return cls(
            symbols=dict(condition.symbols),
            identities=[
                IdentityModel(
                    lhs=(i.lhs_symbol, list(i.lhs_map.mapping)),
                    rhs=(i.rhs_symbol, list(i.rhs_map.mapping)),
                )
                for i in condition.identities
            ],
        )


class PPFormulaModel(WireModel):
    """{"free": n, "exists": m, "atoms": [["R", [0,3,1]], ...], "eq": [[0,2], ...]}."""

    free: int = Field(ge=1)
    exists: int = Field(default=0, ge=0)
    atoms: List[Tuple[str, List[int]]] = Field(default_factory=list)
    eq: List[Tuple[int, int]] = Field(default_factory=list)

    def to_formula(self) -> PPFormula:
        return PPFormula(
            self.free,
            self.exists,
            tuple((name, tuple(args)) for name, args in self.atoms),
            tuple((i, j) for i, j in self.eq),
        )

    @classmethod
    def from_formula(cls, formula: PPFormula) -> "PPFormulaModel":
        return cls(
            free=formula.free,
            exists=formula.exists,
            atoms=[(name, list(args)) for name, args in formula.atoms],
            eq=[(i, j) for i, j in formula.equalities],
        )


class TermModel(WireModel):
    """Term DAG: nodes in dependency order, leaves by name."""

    root: int
    nodes: List[Dict[str, Any]]
    leaves: Dict[str, OperationModel]


class ConstructionModel(WireModel):
    name: str
    operation: OperationModel
    term: TermModel

    @classmethod
    def from_construction(cls, construction: Construction) -> "ConstructionModel":
        return cls(
            name=construction.name,
            operation=OperationModel.from_operation(construction.operation),
            term=TermModel.model_validate(term_to_dict(construction.term)),
        )


def homomorphism_map(hom: Optional[Homomorphism]) -> Optional[List[int]]:
    return list(hom.mapping) if hom is not None else None


class FreeStructureReportModel(WireModel):
    kind: str
    structure: Optional[StructureModel] = None
    edge_count: int
    forward: Optional[List[int]] = None
    backward: Optional[List[int]] = None
    hom_equivalent: bool
    polymorphisms_complete: bool
    condition_witness: Optional[OperationModel] = None
    classes: Optional[List[List[int]]] = None

    @classmethod
    def from_report(cls, report: FreeStructureReport) -> "FreeStructureReportModel":
        return cls(
            kind=report.kind,
            structure=StructureModel.from_structure(report.structure) if report.structure is not None else None,
            edge_count=len(report.edges),
            forward=homomorphism_map(report.forward),
            backward=homomorphism_map(report.backward),
            hom_equivalent=report.hom_equivalent,
            polymorphisms_complete=report.polymorphisms_complete,
            condition_witness=(
                OperationModel.from_operation(report.condition_witness)
                if report.condition_witness is not None
                else None
            ),
            classes=[sorted(c) for c in report.classes] if report.classes is not None else None,
        )


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    UNKNOWN = "unknown"


class VerifierResult(WireModel):
    """Outcome of a named verifier; a fail carries a counterexample and an unknown the exhausted budget."""

    name: str
    verdict: Verdict
    details: Dict[str, Any] = Field(default_factory=dict)
    counterexample: Optional[Dict[str, Any]] = None
    budget: Optional[int] = None
    elapsed: float = 0.0

    @model_validator(mode="after")
    def check_evidence(self) -> "VerifierResult":
        if self.verdict is Verdict.FAIL and self.counterexample is None:
            raise ValueError("a failing verdict needs a counterexample")
        if self.verdict is Verdict.UNKNOWN and self.budget is None:
            raise ValueError("an unknown verdict needs the exhausted budget")
        return self

    @property
    def exit_code(self) -> int:
        return {Verdict.PASS: 0, Verdict.FAIL: 1, Verdict.UNKNOWN: 2}[self.verdict]


class GroupStructureModel(WireModel):
    group: str
    order: int
    maps: List[Dict[str, int]]


class BlockModel(WireModel):
    """One block of R together with Ess(R); non-trivial product blocks carry their group structure."""

    members: List[List[int]]
    trivial: bool
    product_factors: Optional[List[List[int]]] = None
    group_structure: Optional[GroupStructureModel] = None

    @classmethod
    def from_block(cls, relation: Relation, block: Block) -> "BlockModel":
        model = cls(
            members=[list(t) for t in block.sorted_members()],
            trivial=block.is_trivial,
            product_factors=[list(f) for f in block.product_factors] if block.product_factors is not None else None,
        )
        if block.is_product and not block.is_trivial:
            try:
                structure = block_group_structure(relation, block)
            except RelationError as e:
                logger.warning("Block group structure skipped", reason=str(e))
                structure = None
            if structure is not None:
                model.group_structure = GroupStructureModel(
                    group=structure.group.name,
                    order=structure.group.order,
                    maps=[{str(x): y for x, y in sorted(phi.items())} for phi in structure.maps],
                )
        return model
