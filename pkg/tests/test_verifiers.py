"""Tests for the named verifier registry and condition checks."""

import pytest

from clonelab.algebra import catalog
from clonelab.algebra.conditions import quasi_majority, quasi_minority, sigma_p
from clonelab.algebra.ops import Symmetry
from clonelab.schemas import Verdict
from clonelab.verifiers import REGISTRY, VerifierError, check_condition, get_verifier, run_verifier

EXPECTED_VERIFIERS = {
    "remark-cycles",
    "construction-pipeline",
    "star-identities",
    "generalized-minority",
    "ts-properties",
    "chain-compatibility",
    "xi-homomorphism",
    "splitting-malcev",
    "splitting-cycles",
    "collapse-idemp",
    "dichotomy",
    "baker-pixley-sample",
    "block-structure",
    "majority-search",
    "c1-separation",
    "core-identities",
    "k21-sanity",
}


def test_registry_lists_every_verifier():
    """All named verifiers are registered."""
    assert set(REGISTRY) == EXPECTED_VERIFIERS


def test_unknown_verifier():
    """Unknown names list the known ones."""
    with pytest.raises(VerifierError, match="remark-cycles"):
        get_verifier("remark-cycle")


def test_unknown_parameter():
    """Parameters must be declared by the verifier."""
    with pytest.raises(VerifierError):
        run_verifier("remark-cycles", {"q": 3})


def test_parameters_are_coerced():
    """String parameters from the command line take the default's type."""
    bound = get_verifier("remark-cycles").bind({"p": "2"})
    assert bound == {"p": 2}
    bound = get_verifier("majority-search").bind({"generators": "malcev3,min3", "max-arity": "2"})
    assert bound == {"generators": ("malcev3", "min3"), "max_arity": 2}
    with pytest.raises(VerifierError):
        get_verifier("remark-cycles").bind({"p": "three"})


@pytest.mark.parametrize("p", [2, 3])
def test_remark_cycles(p):
    """C_p has no p-ary cyclic polymorphism."""
    result = run_verifier("remark-cycles", {"p": p})
    assert result.verdict is Verdict.PASS
    assert result.details["params"] == {"p": p}
    assert result.exit_code == 0


def test_remark_cycles_budget_gives_unknown():
    """A budget below the candidate count leaves the verdict open."""
    result = run_verifier("remark-cycles", {"p": 3}, budget=10)
    assert result.verdict is Verdict.UNKNOWN
    assert result.budget == 10
    assert result.exit_code == 2


def test_seed_does_not_change_verdict():
    """Randomized scan orders reach the same verdict."""
    assert run_verifier("remark-cycles", {"p": 2}, seed=7).verdict is Verdict.PASS


def test_block_structure():
    """Parity: essential tuples, one Z2 block, critical, not 2-decomposable."""
    result = run_verifier("block-structure")
    assert result.verdict is Verdict.PASS
    assert result.details["group"] == "Z2"
    assert result.details["essential"] == [[0, 0], [1, 1]]


@pytest.mark.parametrize(
    "fixture,verdict",
    [("c2", "A_constructs_I2"), ("b2", "A_constructs_I2"), ("loop3", "c1_constructs_A"), ("c1", "c1_constructs_A")],
)
def test_dichotomy(fixture, verdict):
    """The verdict follows from the core."""
    result = run_verifier("dichotomy", {"fixture": fixture})
    assert result.verdict is Verdict.PASS
    assert result.details["verdict"] == verdict


def test_splitting_cycles():
    """C_2 has no binary cyclic polymorphism and B is equivalent to C_2."""
    result = run_verifier("splitting-cycles")
    assert result.verdict is Verdict.PASS
    assert result.details["class_sizes"] == [2, 2]
    assert result.details["hom_equivalent"] is True


def test_splitting_malcev():
    """B2 has no Mal'cev polymorphism."""
    result = run_verifier("splitting-malcev")
    assert result.verdict is Verdict.PASS
    assert result.details["free_size"] == 16
    assert result.details["malcev_witness"] is False


def test_collapse_idemp():
    """I_3 inside the pp-power of I_2 on eight elements."""
    result = run_verifier("collapse-idemp", {"n": 3})
    assert result.verdict is Verdict.PASS
    assert result.details["domain_size"] == 8
    assert result.details["forward"] == [4, 2, 1]


def test_c1_separation():
    """Only C_1 has a constant unary polymorphism."""
    assert run_verifier("c1-separation").verdict is Verdict.PASS


def test_majority_search_finds_majority():
    """The symmetric majority is itself a generator."""
    result = run_verifier("majority-search")
    assert result.verdict is Verdict.PASS
    assert result.details["majority"]["arity"] == 3


def test_majority_search_exhausted_without_majority():
    """The affine clone of x ⊕ y ⊕ z has no majority."""
    result = run_verifier("majority-search", {"generators": "xor3"})
    assert result.verdict is Verdict.FAIL
    assert result.counterexample == {"exhausted_without_majority": True, "max_arity": 3}


@pytest.mark.slow
def test_construction_pipeline():
    """Symmetrizations, rainbow constant 0 and D^0 all check out."""
    result = run_verifier("construction-pipeline")
    assert result.verdict is Verdict.PASS
    assert result.details["rainbow_constant"] == 0


@pytest.mark.slow
def test_chain_compatibility_rejects_perturbed_chain():
    """The control chain with a foreign s3 is rejected."""
    result = run_verifier("chain-compatibility", {"n": 4, "m": 5})
    assert result.verdict is Verdict.PASS
    assert "identify two variables" in result.details["perturbed_chain_rejected"]


@pytest.mark.parametrize(
    "name,params,expected",
    [
        ("star-identities", {}, {"valuations": 243}),
        ("xi-homomorphism", {}, {"operations": 69, "pairs": 2366}),
        ("baker-pixley-sample", {}, {"affine_clone_ternary_members": 4}),
        ("core-identities", {}, {"fixture": "p3", "core_size": 2}),
        ("core-identities", {"fixture": "loop3", "max-p": 2}, {"core_size": 1}),
        pytest.param("generalized-minority", {}, {"arities": [3, 5, 7, 9]}, marks=pytest.mark.slow),
        pytest.param("ts-properties", {}, {"arities": [2, 3, 4, 5, 6, 7], "tuples": 3276}, marks=pytest.mark.slow),
        pytest.param("chain-compatibility", {}, {"max_ts_arity": 7, "max_gm_arity": 9}, marks=pytest.mark.slow),
        pytest.param("k21-sanity", {}, {}, marks=pytest.mark.slow),
    ],
)
def test_verifier_passes(name, params, expected):
    """Each named verifier passes with the recorded details."""
    result = run_verifier(name, params)
    assert result.verdict is Verdict.PASS, result.counterexample
    for key, value in expected.items():
        assert result.details[key] == value


def test_check_condition_pass_with_witness():
    """A pass carries the witness tables."""
    result = check_condition(quasi_majority(), operations=[catalog.boolean_majority()])
    assert result.verdict is Verdict.PASS
    assert result.details["witness"]["m"]["table"] == [0, 0, 0, 1, 0, 1, 1, 1]


def test_check_condition_fail_with_counterexample():
    """A single operation that fails names the identity and valuation."""
    result = check_condition(quasi_minority(), operations=[catalog.dual_discriminator(3)])
    assert result.verdict is Verdict.FAIL
    assert result.counterexample["valuation"] == [0, 1]
    assert result.counterexample["lhs"] == 1
    assert result.counterexample["rhs"] == 0
    assert result.counterexample["identity"] == "m(x1,x1,x0) ≈ m(x0,x0,x0)"


def test_check_condition_over_structure():
    """Structure searches fail definitively or stay unknown within the budget."""
    result = check_condition(sigma_p(2), structure=catalog.cycle_structure(2), symmetry=Symmetry.CYCLIC)
    assert result.verdict is Verdict.FAIL
    assert result.counterexample == {"witness": None}

    result = check_condition(sigma_p(3), structure=catalog.cycle_structure(3), symmetry=Symmetry.CYCLIC, budget=100)
    assert result.verdict is Verdict.UNKNOWN
    assert result.budget == 100


def test_check_condition_needs_candidates():
    """Operations or a structure is required."""
    with pytest.raises(VerifierError):
        check_condition(quasi_majority())
