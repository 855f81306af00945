"""Tests for the JSON wire models."""

import pytest
from pydantic import ValidationError

from clonelab.algebra import catalog
from clonelab.algebra.conditions import satisfies
from clonelab.algebra.constructions import d_switch
from clonelab.algebra.ops import VarMap
from clonelab.algebra.ppcon import free_structure_malcev, pp_define
from clonelab.algebra.rel import Relation, blocks
from clonelab.algebra.terms import evaluate, term_from_dict
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
    VerifierResult,
    VarMapModel,
)


def test_operation_model_validates_table():
    """The table must have k**n entries inside E_k."""
    with pytest.raises(ValidationError):
        OperationModel(domain=2, arity=2, table=[0, 1, 1])
    with pytest.raises(ValidationError):
        OperationModel(domain=2, arity=1, table=[0, 2])
    op = OperationModel.model_validate({"domain": 2, "arity": 2, "table": [0, 0, 0, 1]}).to_operation()
    assert op == catalog.boolean_and(2)


def test_varmap_model_uses_from_and_to():
    """Variable maps travel as {"from", "to", "map"}."""
    model = VarMapModel.model_validate({"from": 3, "to": 2, "map": [0, 0, 1]})
    assert model.to_varmap() == VarMap(3, 2, (0, 0, 1))
    assert VarMapModel.from_varmap(VarMap(2, 1, (0, 0))).dump() == {"from": 2, "to": 1, "map": [0, 0]}


def test_relation_model_sorts_tuples():
    """Tuples are written in lexicographic order."""
    relation = Relation(2, 2, [(1, 1), (0, 1)])
    assert RelationModel.from_relation(relation).dump()["tuples"] == [[0, 1], [1, 1]]


def test_structure_model_rejects_unknown_fields():
    """Wire models forbid extra keys."""
    with pytest.raises(ValidationError):
        StructureModel.model_validate({"domain": 2, "relations": {}, "colour": "red"})


def test_structure_model_keeps_relation_order_and_labels():
    """Relations come back in insertion order; labels are optional."""
    dumped = StructureModel.from_structure(catalog.b2()).dump()
    assert list(dumped["relations"]) == ["zero", "one", "R"]
    assert "labels" not in dumped
    k21 = StructureModel.from_structure(catalog.k21()).dump()
    assert k21["labels"][11] == "a"


def test_condition_model_builds_quasi_majority():
    """A condition body with shared variables becomes a MinorCondition."""
    body = {
        "symbols": {"m": 3},
        "identities": [
            {"lhs": ["m", [0, 0, 1]], "rhs": ["m", [0, 1, 0]]},
            {"lhs": ["m", [0, 1, 0]], "rhs": ["m", [1, 0, 0]]},
            {"lhs": ["m", [1, 0, 0]], "rhs": ["m", [0, 0, 0]]},
        ],
    }
    condition = ConditionModel.model_validate(body).to_condition("qm")
    assert condition.name == "qm"
    assert satisfies({"m": catalog.boolean_majority()}, condition)
    assert not satisfies({"m": catalog.xor(3)}, condition)


def test_pp_formula_model():
    """∃y R(x0, y) ∧ R(y, x1) written as JSON."""
    model = PPFormulaModel.model_validate({"free": 2, "exists": 1, "atoms": [["R", [0, 2]], ["R", [2, 1]]]})
    relation = pp_define(catalog.cycle_structure(2), model.to_formula())
    assert relation.sorted_tuples() == [(0, 0), (1, 1)]


def test_verifier_result_needs_evidence():
    """Fails carry a counterexample, unknowns a budget."""
    with pytest.raises(ValidationError):
        VerifierResult(name="x", verdict=Verdict.FAIL)
    with pytest.raises(ValidationError):
        VerifierResult(name="x", verdict=Verdict.UNKNOWN)
    assert VerifierResult(name="x", verdict=Verdict.PASS).exit_code == 0
    assert VerifierResult(name="x", verdict=Verdict.FAIL, counterexample={}).exit_code == 1
    assert VerifierResult(name="x", verdict=Verdict.UNKNOWN, budget=5).exit_code == 2


def test_block_model_carries_group_structure():
    """The parity block is described by Z2 with identity maps."""
    parity = Relation.from_predicate(2, 3, lambda x, y, z: (x + y + z) % 2 == 0)
    dumped = BlockModel.from_block(parity, blocks(parity)[0]).dump()
    assert dumped["trivial"] is False
    assert dumped["product_factors"] == [[0, 1]] * 3
    assert dumped["group_structure"]["group"] == "Z2"
    assert dumped["group_structure"]["maps"] == [{"0": 0, "1": 1}] * 3
    assert len(dumped["members"]) == 8


def test_trivial_block_model_omits_group_structure():
    """Trivial blocks have no group structure key."""
    relation = Relation(2, 2, [(0, 0)])
    dumped = BlockModel.from_block(relation, blocks(relation)[0]).dump()
    assert dumped["trivial"] is True
    assert "group_structure" not in dumped


def test_construction_model_term_replays():
    """The serialized term of D^0 rebuilds the same operation."""
    construction = d_switch(catalog.symmetric_minority(0))
    dumped = ConstructionModel.from_construction(construction).dump()
    assert dumped["name"] == "D0"
    assert list(dumped["term"]["leaves"]) == ["m3"]
    rebuilt = term_from_dict(dumped["term"])
    assert evaluate(rebuilt) == construction.operation


def test_free_structure_report_model():
    """Homomorphisms are written as image lists."""
    dumped = FreeStructureReportModel.from_report(free_structure_malcev(catalog.b2())).dump()
    assert dumped["kind"] == "malcev"
    assert dumped["forward"] == [5, 3]
    assert dumped["hom_equivalent"] is True
    assert dumped["structure"]["domain"] == 16
    assert "condition_witness" not in dumped
