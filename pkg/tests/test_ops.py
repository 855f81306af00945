"""Tests for operation tables, minors, composition, enumeration and clone generation."""

import pytest

from clonelab.algebra import catalog
from clonelab.algebra.ops import (
    EnumerationCapExceeded,
    Operation,
    OperationError,
    Symmetry,
    VarMap,
    apply,
    compose,
    constant_operation,
    count_candidates,
    decode_index,
    enumerate_operations,
    generate_clone,
    is_idempotent,
    make_projection,
    minor,
)
from clonelab.verifiers import is_majority


def test_index_convention_first_argument_most_significant():
    """x1 is the most significant digit of the table index."""
    first = Operation.from_function(2, 2, lambda x, y: x)
    assert first.values() == [0, 0, 1, 1]
    assert first == make_projection(2, 2, 1)
    assert decode_index(3, 3, 5) == (0, 1, 2)


def test_projection_table():
    """pr^2_1 over E_3 reads the first coordinate."""
    assert make_projection(3, 2, 1).values() == [0, 0, 0, 1, 1, 1, 2, 2, 2]
    assert make_projection(3, 2, 2).values() == [0, 1, 2] * 3


def test_projection_index_out_of_range():
    """Projection indices are 1-based and bounded by the arity."""
    with pytest.raises(OperationError):
        make_projection(2, 2, 0)
    with pytest.raises(OperationError):
        make_projection(2, 2, 3)


def test_apply_by_lookup():
    """Evaluation reads the table."""
    assert apply(catalog.min_operation(3, 2), (2, 1)) == 1
    assert catalog.affine_malcev(3)(0, 1, 2) == 1
    with pytest.raises(OperationError):
        apply(catalog.min_operation(3, 2), (0,))


def test_malformed_operations_rejected():
    """Wrong table sizes, foreign values and nullary arity are rejected."""
    with pytest.raises(OperationError):
        Operation(2, 2, [0, 1, 1])
    with pytest.raises(OperationError):
        Operation(2, 1, [0, 2])
    with pytest.raises(OperationError):
        Operation(2, 0, [0])


def test_varmap_validation():
    """Entries must lie below the target arity and match the source arity."""
    with pytest.raises(OperationError):
        VarMap(2, 2, (0, 2))
    with pytest.raises(OperationError):
        VarMap(3, 2, (0, 1))
    assert VarMap.of([0, 0, 1]) == VarMap(3, 2, (0, 0, 1))


def test_minor_identifies_variables():
    """d(x,x,y) = y for the affine Mal'cev operation and dd(x,y,y) = y."""
    pr2 = make_projection(3, 2, 2)
    assert minor(catalog.affine_malcev(3), VarMap(3, 2, (0, 0, 1))) == pr2
    assert minor(catalog.dual_discriminator(3), VarMap(3, 2, (0, 1, 1))) == pr2


def test_minor_of_minor_is_minor_of_composite_map():
    """minor(minor(f, s), t) = minor(f, s.then(t))."""
    f = catalog.affine_malcev(3)
    s = VarMap(3, 3, (1, 2, 0))
    t = VarMap(3, 2, (0, 1, 1))
    assert minor(minor(f, s), t) == minor(f, s.then(t))


def test_minor_arity_mismatch():
    """The map's source arity must be the operation's arity."""
    with pytest.raises(OperationError):
        minor(catalog.xor(3), VarMap(2, 2, (0, 1)))


def test_compose_with_projections_is_identity():
    """f(pr_1, ..., pr_n) = f."""
    f = catalog.dual_discriminator(3)
    assert compose(f, [make_projection(3, 3, i) for i in (1, 2, 3)]) == f


def test_compose_builds_majority_from_and_xor():
    """xor3(x∧y, x∧z, y∧z) is the Boolean majority."""
    pairs = [VarMap(2, 3, (0, 1)), VarMap(2, 3, (0, 2)), VarMap(2, 3, (1, 2))]
    inner = [minor(catalog.boolean_and(2), sigma) for sigma in pairs]
    assert compose(catalog.xor(3), inner) == catalog.boolean_majority()


def test_compose_rejects_mismatched_inputs():
    """Inner operations must match in number, domain and arity."""
    xor2 = catalog.xor(2)
    with pytest.raises(OperationError):
        compose(xor2, [make_projection(2, 2, 1)])
    with pytest.raises(OperationError):
        compose(xor2, [make_projection(2, 2, 1), make_projection(3, 2, 1)])
    with pytest.raises(OperationError):
        compose(xor2, [make_projection(2, 2, 1), make_projection(2, 3, 1)])


def test_idempotence():
    """min is idempotent, constants are not."""
    assert is_idempotent(catalog.min_operation(3, 2))
    assert not is_idempotent(constant_operation(3, 2, 1))


def test_candidate_counts_per_symmetry():
    """k ** (number of orbits) under each symmetry class."""
    assert count_candidates(2, 2) == 16
    assert count_candidates(2, 2, Symmetry.CYCLIC) == 8
    assert count_candidates(3, 3, Symmetry.FULLY_SYMMETRIC) == 3**10


def test_binary_cyclic_operations_over_three_elements():
    """The six shift orbits of E_3^2 give 3^6 commutative binary operations."""
    assert count_candidates(3, 2, Symmetry.CYCLIC) == 729
    ops = list(enumerate_operations(3, 2, Symmetry.CYCLIC))
    assert len(set(ops)) == 729
    swap = VarMap(2, 2, (1, 0))
    assert all(minor(op, swap) == op for op in ops)


def test_enumeration_order():
    """Candidates come in table order."""
    tables = [op.values() for op in enumerate_operations(2, 1)]
    assert tables == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_idempotent_boolean_operations_up_to_arity_three():
    """1 + 4 + 64 idempotent Boolean operations of arity 1, 2 and 3."""
    count = sum(len(list(enumerate_operations(2, n, predicate=is_idempotent))) for n in (1, 2, 3))
    assert count == 69


def test_enumeration_cap():
    """Candidate spaces larger than the cap are refused."""
    with pytest.raises(EnumerationCapExceeded):
        list(enumerate_operations(3, 3, cap=100))


def test_clone_of_xor3_at_arity_three():
    """The ternary part of the clone of x⊕y⊕z is the three projections and x⊕y⊕z."""
    closure = generate_clone([catalog.xor(3)], 3)
    assert closure.exhausted
    assert len(closure.layers[3]) == 4
    assert catalog.xor(3) in closure
    assert not any(is_majority(op) for op in closure.layers[3])


def test_clone_generation_stops_at_majority():
    """The Boolean majority is its own first majority witness."""
    closure = generate_clone([catalog.boolean_majority()], 3, stop_when=is_majority)
    assert closure.witness == catalog.boolean_majority()
    assert not closure.exhausted


def test_clone_generation_budget():
    """A tiny budget stops generation before the fixed point."""
    closure = generate_clone([catalog.affine_malcev(3)], 3, budget=1)
    assert not closure.exhausted
    assert closure.witness is None


def test_clone_budget_counts_tables():
    """The clone of x⊕y⊕z has 1 + 2 + 4 tables up to arity three."""
    closure = generate_clone([catalog.xor(3)], 3, budget=7)
    assert closure.exhausted
    assert closure.produced == 7

    short = generate_clone([catalog.xor(3)], 3, budget=6)
    assert not short.exhausted
    assert len(short.layers[3]) == 3
    assert catalog.xor(3) not in short


def test_clone_generators_tested_before_closing():
    """A ternary majority among the generators is found before any smaller arity is closed."""
    gens = [catalog.affine_malcev(3), catalog.min_operation(3, 2), catalog.symmetric_majority(0, 3)]
    closure = generate_clone(gens, 3, stop_when=is_majority)
    assert closure.witness == catalog.symmetric_majority(0, 3)
    assert list(closure.layers) == [3]
    assert closure.compositions == 0
    assert closure.produced == 5


def test_clone_top_arity_closed_first_with_stop_when():
    """The affine clone is closed from arity three down when looking for a majority."""
    closure = generate_clone([catalog.xor(3)], 3, stop_when=is_majority)
    assert closure.witness is None
    assert closure.exhausted
    assert list(closure.layers) == [3, 2, 1]


def test_clone_generation_needs_one_domain():
    """Generators over different domains are rejected."""
    with pytest.raises(OperationError):
        generate_clone([catalog.xor(3), catalog.affine_malcev(3)], 2)
    with pytest.raises(OperationError):
        generate_clone([], 2)
