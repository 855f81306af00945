"""Tests for homomorphisms, cores, pp-definitions, pp-powers, free structures and the dichotomy."""

import pytest

from clonelab.algebra import catalog
from clonelab.algebra.ops import EnumerationCapExceeded
from clonelab.algebra.ppcon import (
    C1_CONSTRUCTS,
    CONSTRUCTS_I2,
    Homomorphism,
    PPConError,
    PPFormula,
    collapse_idempotent,
    core_of,
    expand_by_singletons,
    find_homomorphism,
    free_structure_cycle,
    free_structure_malcev,
    hom_equivalent,
    is_core,
    iter_homomorphisms,
    operation_code,
    pp_define,
    pp_power,
    singleton_names,
    verify_dichotomy_c1_i2,
)
from clonelab.algebra.ops import make_projection
from clonelab.algebra.rel import Relation, Structure


@pytest.fixture
def directed_path():
    """0 -> 1 -> 2."""
    return Structure(3, [("R", Relation(3, 2, [(0, 1), (1, 2)]))])


def test_path_maps_to_two_cycle(directed_path):
    """A directed path folds onto C_2."""
    hom = find_homomorphism(directed_path, catalog.cycle_structure(2))
    assert hom is not None
    assert hom.verify()
    assert hom(0) != hom(1)


def test_odd_cycle_does_not_map_to_two_cycle():
    """C_3 -> C_2 does not exist."""
    assert find_homomorphism(catalog.cycle_structure(3), catalog.cycle_structure(2)) is None


def test_signature_mismatch():
    """Structures with different relation names are not comparable."""
    with pytest.raises(PPConError):
        find_homomorphism(catalog.symmetric_path(), catalog.cycle_structure(2))


def test_all_endomorphisms_of_two_cycle():
    """The identity and the swap."""
    homs = list(iter_homomorphisms(catalog.cycle_structure(2), catalog.cycle_structure(2)))
    assert sorted(h.mapping for h in homs) == [(0, 1), (1, 0)]


def test_search_budget():
    """A zero node budget cannot finish any search."""
    with pytest.raises(EnumerationCapExceeded):
        find_homomorphism(catalog.cycle_structure(3), catalog.cycle_structure(3), budget=0)


def test_homomorphism_checks_its_shape():
    """One image per source element, inside the target."""
    c2 = catalog.cycle_structure(2)
    with pytest.raises(PPConError):
        Homomorphism(c2, c2, (0,))
    with pytest.raises(PPConError):
        Homomorphism(c2, c2, (0, 2))
    assert Homomorphism(c2, c2, (0, 0)).violation() == ("R", (0, 1))


def test_hom_equivalence(directed_path):
    """C_2 and the path are not equivalent: C_2 does not map to the path."""
    result = hom_equivalent(directed_path, catalog.cycle_structure(2))
    assert result.forward is not None
    assert result.backward is None
    assert not result.equivalent


def test_core_of_undirected_path():
    """The path 0 - 1 - 2 retracts onto the edge {0, 1}."""
    core = core_of(catalog.symmetric_path())
    assert core.elements == (0, 1)
    assert core.retraction.mapping == (0, 1, 0)
    assert core.embedding.mapping == (0, 1)
    assert not is_core(catalog.symmetric_path())


def test_cores_of_cycles_and_loops():
    """Directed cycles are cores; a loop absorbs everything."""
    assert is_core(catalog.cycle_structure(3))
    assert core_of(catalog.loop_with_pendants()).elements == (0,)


def test_singletons():
    """Expansion adds const<a>; existing singleton relations are found by name."""
    assert expand_by_singletons(catalog.cycle_structure(2)).names == ["R", "const0", "const1"]
    assert singleton_names(catalog.b2()) == {0: "zero", 1: "one"}


def test_pp_define_two_steps_on_two_cycle():
    """∃y R(x0, y) ∧ R(y, x1) over C_2 is equality."""
    c2 = catalog.cycle_structure(2)
    two_steps = PPFormula(2, 1, atoms=(("R", (0, 2)), ("R", (2, 1))))
    assert pp_define(c2, two_steps).sorted_tuples() == [(0, 0), (1, 1)]
    equality = PPFormula(2, equalities=((0, 1),))
    assert pp_define(c2, equality).sorted_tuples() == [(0, 0), (1, 1)]


def test_pp_formula_validation():
    """Variables stay in range and atoms match the signature."""
    with pytest.raises(PPConError):
        PPFormula(1, atoms=(("R", (0, 1)),))
    with pytest.raises(PPConError):
        pp_define(catalog.cycle_structure(2), PPFormula(2, atoms=(("S", (0, 1)),)))
    with pytest.raises(PPConError):
        pp_define(catalog.cycle_structure(2), PPFormula(1, atoms=(("R", (0,)),)))


def test_pp_power_of_two_cycle():
    """The square of C_2 with coordinatewise edges."""
    formula = PPFormula(4, atoms=(("R", (0, 2)), ("R", (1, 3))))
    square = pp_power(catalog.cycle_structure(2), 2, {"R": formula})
    assert square.domain_size == 4
    assert square.relation("R").tuples == {(0, 3), (3, 0), (1, 2), (2, 1)}
    with pytest.raises(PPConError):
        pp_power(catalog.cycle_structure(2), 3, {"R": formula})


def test_malcev_free_structure_of_b2():
    """B2 has no Mal'cev polymorphism, so the free structure is equivalent to B2."""
    report = free_structure_malcev(catalog.b2())
    assert report.structure.domain_size == 16
    assert report.forward.mapping == (5, 3)
    assert report.forward.mapping[0] == operation_code(make_projection(2, 2, 2))
    assert report.condition_witness is None
    assert report.hom_equivalent


def test_malcev_free_structure_with_witness():
    """C_2 with constants has x ⊕ y ⊕ z, which blocks the map back to B2."""
    report = free_structure_malcev(expand_by_singletons(catalog.cycle_structure(2)))
    assert report.condition_witness is not None
    assert report.backward is None
    assert not report.hom_equivalent


def test_malcev_free_structure_needs_singletons():
    """The zero and one relations come from singleton relations."""
    with pytest.raises(PPConError):
        free_structure_malcev(catalog.cycle_structure(2))


def test_cycle_free_structure_of_two_cycle():
    """The binary polymorphisms of C_2 split into two shift classes."""
    report = free_structure_cycle(catalog.cycle_structure(2), 2)
    assert report.condition_witness is None
    assert report.classes == [frozenset({3, 10}), frozenset({5, 12})]
    assert report.backward.mapping == (3, 5)
    assert report.forward is not None
    assert report.hom_equivalent
    with pytest.raises(PPConError):
        free_structure_cycle(catalog.cycle_structure(2), 4)


def test_dichotomy():
    """C_2 constructs I_2; structures with a loop are constructed by C_1."""
    assert verify_dichotomy_c1_i2(catalog.cycle_structure(2)).verdict == CONSTRUCTS_I2
    assert verify_dichotomy_c1_i2(catalog.loop_with_pendants()).verdict == C1_CONSTRUCTS
    report = verify_dichotomy_c1_i2(catalog.one_element_structure())
    assert report.verdict == C1_CONSTRUCTS
    assert report.forward.verify() and report.backward.verify()


def test_dichotomy_rejects_empty_relation_on_c1_side():
    """Empty relations cannot be defined by R(x0, x0) over C_1."""
    structure = Structure(2, [("R", Relation(2, 2, [(0, 0)])), ("S", Relation(2, 1, []))])
    with pytest.raises(PPConError):
        verify_dichotomy_c1_i2(structure)


def test_collapse_idempotent():
    """I_n sits inside the pp-power of I_2 on the unit vectors."""
    report = collapse_idempotent(3)
    assert report.structure.domain_size == 8
    assert report.forward.mapping == (4, 2, 1)
    assert report.backward(4) == 0
    assert report.backward(7) == 0
    with pytest.raises(PPConError):
        collapse_idempotent(1)
