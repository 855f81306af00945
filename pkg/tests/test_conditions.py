"""Tests for minor identities, named conditions, satisfaction and witness search."""

import pytest

from clonelab.algebra import catalog
from clonelab.algebra.conditions import (
    BUILTIN_NAMES,
    ConditionError,
    MinorCondition,
    MinorIdentity,
    builtin,
    find_violation,
    find_witness,
    fs,
    gm,
    quasi_majority,
    quasi_malcev,
    quasi_minority,
    satisfies,
    sigma_p,
    symmetry_implied,
    ts,
    wnu,
)
from clonelab.algebra.ops import Symmetry, VarMap, constant_operation, make_projection


@pytest.fixture
def mixed_condition():
    """m(x,y,y) ≈ f(x,y)."""
    identity = MinorIdentity("m", VarMap(3, 2, (0, 1, 1)), "f", VarMap(2, 2, (0, 1)))
    return MinorCondition.build({"m": 3, "f": 2}, [identity], "mixed")


def test_identity_sides_share_variables():
    """Both sides of an identity range over the same variables."""
    with pytest.raises(ConditionError):
        MinorIdentity("f", VarMap(2, 2, (0, 1)), "f", VarMap(2, 3, (0, 1)))


def test_condition_rejects_undeclared_symbols_and_wrong_arity():
    """Identities must use declared symbols at their declared arity."""
    identity = MinorIdentity("g", VarMap(2, 2, (0, 1)), "g", VarMap(2, 2, (1, 0)))
    with pytest.raises(ConditionError):
        MinorCondition.build({"f": 2}, [identity])
    with pytest.raises(ConditionError):
        MinorCondition.build({"g": 3}, [identity])


def test_identity_render():
    """Identities print with 0-based variable names."""
    identity = sigma_p(3).identities[0]
    assert identity.render() == "c(x0,x1,x2) ≈ c(x1,x2,x0)"


def test_named_conditions_on_standard_operations():
    """The textbook witnesses satisfy their conditions."""
    assert satisfies({"m": catalog.xor(3)}, quasi_minority())
    assert satisfies({"m": catalog.boolean_majority()}, quasi_majority())
    assert satisfies({"m": catalog.affine_malcev(3)}, quasi_malcev())
    assert satisfies({"w": catalog.boolean_majority()}, wnu(3))
    assert satisfies({"c": catalog.xor(3)}, sigma_p(3))
    assert satisfies({"f": constant_operation(3, 1, 2)}, builtin("const"))
    assert not satisfies({"f": make_projection(2, 1, 1)}, builtin("const"))


def test_first_violation_of_dual_discriminator():
    """dd satisfies the first two quasi-minority identities and breaks m(y,y,x) ≈ m(x,x,x)."""
    violation = find_violation({"m": catalog.dual_discriminator(3)}, quasi_minority())
    assert violation is not None
    assert violation.identity_index == 2
    assert violation.valuation == (0, 1)
    assert violation.lhs_value == 1
    assert violation.rhs_value == 0


def test_total_symmetry():
    """Majority is fully symmetric but not totally symmetric; ternary min is both."""
    bmaj = {"f": catalog.boolean_majority()}
    min3 = {"f": catalog.min_operation(3, 3)}
    assert satisfies(bmaj, fs(3))
    assert not satisfies(bmaj, ts(3))
    assert not satisfies(bmaj, ts(3, expanded=True))
    assert satisfies(min3, ts(3))
    assert satisfies(min3, ts(3, expanded=True))


def test_generalized_minority_condition_on_xor():
    """x_1 ⊕ ... ⊕ x_5 is fully symmetric and cancels pairs."""
    assert satisfies({"f": catalog.xor(5)}, gm(5))


def test_invalid_condition_parameters():
    """gm needs an odd arity; sigma_p needs p; unknown names are rejected."""
    with pytest.raises(ConditionError):
        gm(4)
    with pytest.raises(ConditionError):
        builtin("sigma_p")
    with pytest.raises(ConditionError):
        builtin("ts")
    with pytest.raises(ConditionError):
        builtin("near_unanimity", n=3)
    assert "quasi_minority" in BUILTIN_NAMES


def test_symmetry_implied():
    """Only identities between bijective maps force argument symmetries."""
    assert symmetry_implied(fs(3), "f", Symmetry.CYCLIC)
    assert symmetry_implied(fs(3), "f", Symmetry.FULLY_SYMMETRIC)
    assert not symmetry_implied(quasi_majority(), "m", Symmetry.CYCLIC)
    assert symmetry_implied(sigma_p(3), "c", Symmetry.CYCLIC)
    assert not symmetry_implied(sigma_p(3), "c", Symmetry.FULLY_SYMMETRIC)


def test_no_binary_cyclic_polymorphism_of_two_cycle():
    """sigma_2 fails on C_2 and the search covers the whole cyclic class."""
    search = find_witness(sigma_p(2), structure=catalog.cycle_structure(2), symmetry=Symmetry.CYCLIC)
    assert not search.found
    assert search.definitive
    assert search.scanned == 8


def test_ternary_cyclic_polymorphism_of_two_cycle():
    """x ⊕ y ⊕ z is cyclic and preserves C_2."""
    search = find_witness(sigma_p(3), structure=catalog.cycle_structure(2), symmetry=Symmetry.CYCLIC)
    assert search.found
    assert satisfies(search.assignment, sigma_p(3))


def test_no_ternary_cyclic_polymorphism_of_three_cycle():
    """C_3 has no cyclic polymorphism of arity 3."""
    search = find_witness(sigma_p(3), structure=catalog.cycle_structure(3), symmetry=Symmetry.CYCLIC)
    assert not search.found
    assert search.definitive


def test_restricted_search_is_not_definitive():
    """A symmetry the condition does not imply leaves the answer open."""
    search = find_witness(
        quasi_majority(),
        structure=catalog.cycle_structure(3),
        symmetry=Symmetry.FULLY_SYMMETRIC,
    )
    assert not search.found
    assert not search.definitive


def test_search_over_budget_is_skipped():
    """A candidate space above the budget is not scanned."""
    search = find_witness(
        sigma_p(3),
        structure=catalog.cycle_structure(3),
        symmetry=Symmetry.CYCLIC,
        budget=100,
    )
    assert not search.definitive
    assert search.scanned == 0
    assert search.budget == 100


def test_witness_from_explicit_operations():
    """The first operation passing the identities is returned."""
    ops = [catalog.affine_malcev(3), catalog.dual_discriminator(3), catalog.symmetric_majority(0)]
    search = find_witness(quasi_majority(), operations=ops)
    assert search.found
    assert search.assignment["m"] == catalog.dual_discriminator(3)


def test_witness_search_needs_one_source():
    """Operations and structure are mutually exclusive."""
    with pytest.raises(ConditionError):
        find_witness(quasi_majority(), operations=[catalog.boolean_majority()], structure=catalog.b2())
    with pytest.raises(ConditionError):
        find_witness(quasi_majority())


def test_mixed_symbols(mixed_condition):
    """Identities across symbols are checked while backtracking."""
    ops = [catalog.xor(3), catalog.boolean_and(2), catalog.xor(2)]
    search = find_witness(mixed_condition, operations=ops)
    assert not search.found
    assert search.definitive

    search = find_witness(mixed_condition, operations=ops + [make_projection(2, 2, 1)])
    assert search.found
    assert search.assignment["f"] == make_projection(2, 2, 1)
    assert search.assignment["m"] == catalog.xor(3)
