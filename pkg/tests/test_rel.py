"""Tests for relations, structures, Pol/Inv and the essential tuple machinery."""

import pytest

from clonelab.algebra import catalog
from clonelab.algebra.ops import Symmetry, make_projection
from clonelab.algebra.rel import (
    CriticalityVerdict,
    Relation,
    RelationError,
    Structure,
    block_group_structure,
    blocks,
    essential_tuples,
    inv_closure,
    is_critical,
    is_essential,
    is_n_decomposable,
    pol,
    pol_structure,
    preserves,
)
from clonelab.errors import BudgetExceeded

LEQ = Relation(2, 2, [(0, 0), (0, 1), (1, 1)])
SWAP = Relation(2, 2, [(0, 1), (1, 0)])


@pytest.fixture
def parity():
    """Even-parity triples over {0, 1}."""
    return Relation.from_predicate(2, 3, lambda x, y, z: (x + y + z) % 2 == 0)


def test_relation_deduplicates_and_sorts():
    """Tuples are stored once, in lexicographic order."""
    relation = Relation(2, 2, [(1, 0), (0, 1), (1, 0)])
    assert len(relation) == 2
    assert relation.sorted_tuples() == [(0, 1), (1, 0)]
    assert (1, 0) in relation


def test_relation_rejects_bad_tuples():
    """Tuples must have the declared arity and stay inside the domain."""
    with pytest.raises(RelationError):
        Relation(2, 2, [(0, 1, 1)])
    with pytest.raises(RelationError):
        Relation(2, 2, [(0, 2)])


def test_structure_rejects_duplicate_names_and_foreign_domains():
    """Relation names are unique and every relation lives on the structure's domain."""
    with pytest.raises(RelationError):
        Structure(2, [("R", SWAP), ("R", LEQ)])
    with pytest.raises(RelationError):
        Structure(3, [("R", SWAP)])


def test_induced_substructure_relabels():
    """The path 0-1-2 restricted to {1, 2} is a single undirected edge."""
    induced = catalog.symmetric_path().induced([1, 2])
    assert induced.domain_size == 2
    assert induced.relation("E").sorted_tuples() == [(0, 1), (1, 0)]


def test_preserves():
    """∧ preserves ≤ and ⊕ does not."""
    assert preserves(catalog.boolean_and(2), LEQ)
    assert not preserves(catalog.xor(2), LEQ)


def test_binary_polymorphisms_of_the_two_cycle():
    """The self-dual binary operations: both projections and their negations."""
    ops = pol([SWAP], 2)
    assert [op.values() for op in ops] == [[0, 0, 1, 1], [0, 1, 0, 1], [1, 0, 1, 0], [1, 1, 0, 0]]
    assert make_projection(2, 2, 1) in ops


def test_no_commutative_binary_polymorphism_of_the_two_cycle():
    """Commutativity and self-duality clash on (0, 1)."""
    assert pol_structure(catalog.cycle_structure(2), 2, symmetry=Symmetry.CYCLIC) == []


def test_pol_without_relations_needs_domain():
    """Every operation preserves the empty set of relations."""
    assert len(pol([], 1, domain_size=2)) == 4
    with pytest.raises(RelationError):
        pol([], 1)


def test_inv_closure():
    """Closing {(0,1), (1,0)} under ∧ adds (0,0)."""
    closed = inv_closure([catalog.boolean_and(2)], [(0, 1), (1, 0)])
    assert closed.sorted_tuples() == [(0, 0), (0, 1), (1, 0)]


def test_inv_closure_budget():
    """Closure refuses to evaluate more tuple choices than its budget."""
    with pytest.raises(BudgetExceeded):
        inv_closure([catalog.affine_malcev(3)], [(0,), (1,)], budget=1)


def test_essential_tuples_of_swap():
    """(0,0) and (1,1) can be fixed by changing either coordinate."""
    assert essential_tuples(SWAP) == {(0, 0), (1, 1)}
    assert not is_essential(Relation.full(2, 2))


def test_parity_essential_tuples(parity):
    """The odd triples are the essential tuples of even parity."""
    odd = {t for t in Relation.full(2, 3) if sum(t) % 2}
    assert essential_tuples(parity) == odd


def test_parity_single_product_block(parity):
    """R together with Ess(R) is all of {0,1}^3: one non-trivial product block."""
    found = blocks(parity)
    assert len(found) == 1
    assert not found[0].is_trivial
    assert found[0].product_factors == ((0, 1), (0, 1), (0, 1))
    assert len(found[0].member_tuples) == 8


def test_parity_group_structure(parity):
    """Even parity is x1 + x2 + x3 = 0 in Z2 with identity maps."""
    block = blocks(parity)[0]
    structure = block_group_structure(parity, block)
    assert structure is not None
    assert structure.group.name == "Z2"
    assert all(phi == {0: 0, 1: 1} for phi in structure.maps)
    assert all(structure.satisfied_by(t) for t in parity)


def test_trivial_block_has_no_group_structure():
    """A block inside R is trivial."""
    relation = Relation(2, 2, [(0, 0)])
    (block,) = blocks(relation)
    assert block.is_trivial
    assert block_group_structure(relation, block) is None


def test_decomposability(parity):
    """Parity needs all three coordinates; a chain of ≤ does not."""
    chain = Relation.from_predicate(2, 3, lambda x, y, z: x <= y <= z)
    assert not is_n_decomposable(parity, 2)
    assert is_n_decomposable(parity, 3)
    assert is_n_decomposable(chain, 2)
    with pytest.raises(RelationError):
        is_n_decomposable(parity, 0)


def test_parity_is_critical(parity):
    """Adding any odd triple and closing under ⊕ gives all of {0,1}^3."""
    report = is_critical(parity, [catalog.xor(2)])
    assert report.verdict is CriticalityVerdict.CRITICAL
    assert report.cover == Relation.full(2, 3)


def test_disjunction_relation_is_critical():
    """{(0,1),(1,0),(1,1)} with its unary and binary polymorphisms: the only cover is {0,1}^2."""
    disjunction = Relation(2, 2, [(0, 1), (1, 0), (1, 1)])
    generators = pol([disjunction], 1) + pol([disjunction], 2)
    assert essential_tuples(disjunction) == frozenset({(0, 0)})
    report = is_critical(disjunction, generators)
    assert report.verdict is CriticalityVerdict.CRITICAL
    assert report.cover == Relation.full(2, 2)


def test_criticality_of_non_essential_relation():
    """Relations without essential tuples are never critical."""
    report = is_critical(Relation.full(2, 2), [catalog.xor(2)])
    assert report.verdict is CriticalityVerdict.NOT_CRITICAL


def test_criticality_with_incomplete_generators(parity):
    """Declared-incomplete generators give a provisional verdict."""
    report = is_critical(parity, [catalog.xor(2)], complete=False)
    assert report.verdict is CriticalityVerdict.UNKNOWN
    assert report.provisional is CriticalityVerdict.CRITICAL


def test_criticality_with_foreign_generators(parity):
    """Generators that do not preserve R cannot decide anything."""
    report = is_critical(parity, [catalog.boolean_and(2)])
    assert report.verdict is CriticalityVerdict.UNKNOWN
