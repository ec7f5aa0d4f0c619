from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigidgen.core import (BudgetExceeded, DomainError, FrameworkConstants,
                           Instance, IsolationFamily, SparseDomainVector,
                           SymmetryWitness, UnsupportedFeatureError,
                           admissible_N, check_boundedness, check_divisibility,
                           expected_vector, phi_matrix, phi_of, phi_sum,
                           verify_isolation_family, verify_solution,
                           verify_symmetry)
from rigidgen.design import (DesignParams, build_design_instance,
                             design_symmetry_witness)
from rigidgen.oa import (OAParams, build_oa_instance, oa_isolation_family,
                         oa_symmetry_witness)
from rigidgen.perm import build_perm_spanning_instance


def constant_instance(size=3):
    """phi == (1) on a ground set of ``size`` labels."""
    return Instance(
        family="custom", params={"size": size}, size=size, index=("one",),
        elements_fn=lambda: iter(range(size)), phi_fn=lambda b: (1,),
        contains_fn=lambda b: b in range(size),
        constants=FrameworkConstants(m=1, c0=1, c1_sq=1, c2=size, c3_sq=1),
        constant_combination={"one": 1},
        isolation_fn=lambda a, **kw: IsolationFamily(
            a, 1, [SparseDomainVector({0: 1})]),
    )


# ---- phi_sum / expected_vector

def test_phi_sum_examples(oa221):
    assert phi_sum(oa221, []) == (0, 0, 0)
    assert phi_sum(oa221, [(1, 2), (2, 1)]) == (2, 1, 1)
    assert phi_sum(oa221, oa221.elements()) == (4, 2, 2)
    assert oa221.index == (((), ()), ((1,), (1,)), ((2,), (1,)))


def test_phi_sum_unknown_key_names_it(oa221):
    with pytest.raises(DomainError, match="3"):
        phi_sum(oa221, [(1, 3)])


def test_expected_vector(oa221, d431):
    ev = expected_vector(oa221, 2)
    assert ev.values == (2, 1, 1) and ev.integral
    full = expected_vector(oa221, 4)
    assert full.values == oa221.phi_total and full.integral
    half = expected_vector(d431, 2)
    assert half.values == (Fraction(3, 2),) * 4 and not half.integral
    with pytest.raises(DomainError):
        expected_vector(oa221, 5)


# ---- divisibility and boundedness

def test_divisibility(oa221, d431):
    rep = check_divisibility(oa221)
    assert (rep.c0_star, rep.declared_c0, rep.consistent) == (2, 2, True)
    assert check_divisibility(d431).c0_star == 4
    assert check_divisibility(constant_instance()).c0_star == 1


def test_boundedness(oa221, d431):
    rep = check_boundedness(oa221)
    assert rep.max_norm_sq == 3 and rep.c1_sq == 3 and rep.passed
    assert rep.argmax == (1, 1)
    # Each block of design(4,3,1) contains three points, so the max is sqrt(3),
    # inside the declared c1 = v^(t/2) = 2.
    rep = check_boundedness(d431)
    assert rep.max_norm_sq == 3 and rep.c1_sq == 4 and rep.passed
    assert check_boundedness(constant_instance()).max_norm_sq == 1


def test_boundedness_budget_is_loud():
    inst = build_oa_instance(OAParams(3, 5, 1))
    with pytest.raises(BudgetExceeded):
        check_boundedness(inst, budget=100)


# ---- symmetry

def test_identity_witness_passes_everywhere(oa221, d431):
    for inst in (oa221, d431, build_perm_spanning_instance(3, 1)):
        assert verify_symmetry(inst, SymmetryWitness.identity(inst)).passed


def test_oa_shift_witness(oa221):
    w = oa_symmetry_witness(OAParams(2, 2, 1), "21")
    rep = verify_symmetry(oa221, w)
    assert rep.passed and rep.checked == 4


def test_design_transposition_witness(d431):
    w = design_symmetry_witness(DesignParams(4, 3, 1), (2, 1, 3, 4))
    assert verify_symmetry(d431, w).passed
    for row in w.tau:
        assert sorted(row) == [0, 0, 0, 1]


def test_broken_witness_reports_first_violation(oa221):
    w = SymmetryWitness(lambda b: b, ((1, 0, 0), (0, 0, 1), (0, 1, 0)))
    rep = verify_symmetry(oa221, w)
    assert not rep.passed and rep.first_violation is not None
    sampled = verify_symmetry(oa221, w, mode="sample", count=50, seed=3)
    assert not sampled.passed


def test_witness_dimension_mismatch(oa221):
    with pytest.raises(DomainError):
        verify_symmetry(oa221, SymmetryWitness(lambda b: b, ((1,),)))


# ---- isolation

def test_unit_column_family(oa221):
    inst = constant_instance()
    rep = verify_isolation_family(inst, inst.isolation_family("one"))
    assert rep.certified and rep.count_ok


def test_oa231_family_certified():
    p = OAParams(2, 3, 1)
    inst = build_oa_instance(p)
    fam = oa_isolation_family(p, ((1,), (1,)))
    rep = verify_isolation_family(inst, fam)
    assert rep.certified and rep.count >= 1 and rep.required_count == 1


def test_overlapping_family_flagged(oa221):
    g = SparseDomainVector({(1, 1): 1, (2, 1): -1})
    fam = IsolationFamily(((1,), (1,)), 1, [g, g])
    rep = verify_isolation_family(oa221, fam)
    assert rep.targets_ok and not rep.disjoint_ok and not rep.certified
    assert verify_isolation_family(oa221, fam) == rep  # idempotent


def test_wrong_target_flagged(oa221):
    fam = IsolationFamily(((2,), (1,)), 1, [SparseDomainVector({(1, 1): 1})])
    assert not verify_isolation_family(oa221, fam).targets_ok


def test_perm_instance_refuses_isolation():
    inst = build_perm_spanning_instance(3, 1)
    with pytest.raises(UnsupportedFeatureError):
        inst.isolation_family(((1,), (1,)))


# ---- verify_solution

def test_verify_solution_examples(oa221):
    assert verify_solution(oa221, oa221.elements()).passed
    assert verify_solution(oa221, [(1, 2), (2, 1)]).passed
    cert = verify_solution(oa221, [(1, 1), (1, 2)])
    assert not cert.passed and cert.first_violation == ((1,), (1,))
    with pytest.raises(DomainError):
        verify_solution(oa221, [])
    with pytest.raises(DomainError):
        verify_solution(oa221, [(1, 1), (1, 1)])


@pytest.mark.parametrize("inst", [
    build_oa_instance(OAParams(3, 3, 2)),
    build_design_instance(DesignParams(6, 3, 2)),
    build_perm_spanning_instance(4, 2),
])
def test_ground_set_always_solves(inst):
    assert verify_solution(inst, inst.elements()).passed
    for b in inst.elements():
        assert sum(x * x for x in inst.phi(b)) <= inst.constants.c1_sq


def test_constant_combination_counts_T(d431):
    # The designated combination of basis functions is identically one.
    for inst in (d431, build_oa_instance(OAParams(3, 2, 2)),
                 build_perm_spanning_instance(3, 2)):
        for b in inst.elements():
            row = inst.phi(b)
            total = sum(Fraction(c) * row[inst.position(a)]
                        for a, c in inst.constant_combination.items())
            assert total == 1


# ---- admissible N

def test_admissible_N(oa221, d431):
    assert admissible_N(oa221).divisor == 2
    assert admissible_N(d431).divisor == 12
    assert admissible_N(constant_instance()).divisor == 1


def test_admissible_window_empty_at_desk_scale_and_tunable():
    inst = build_oa_instance(OAParams(2, 4, 2))
    win = admissible_N(inst)
    assert win.empty and win.lower_bound > win.upper_bound
    relaxed = admissible_N(inst, lower_scale=1e-40, upper_scale=1.0)
    assert relaxed.smallest == 4 and relaxed.lower_scale == 1e-40


# ---- SparseDomainVector

keys = st.integers(0, 6)
vectors = st.dictionaries(keys, st.integers(-5, 5)).map(SparseDomainVector)


@settings(max_examples=200, deadline=None)
@given(vectors, vectors)
def test_sparse_vector_algebra(u, v):
    assert 0 not in dict(u.items()).values()
    assert (u - u).support() == frozenset()
    w = u + v
    assert all(w[k] == u[k] + v[k] for k in u.support() | v.support())
    assert w.support() == {k for k in u.support() | v.support() if u[k] + v[k]}
    assert (u * 3).norm_sq() == 9 * u.norm_sq()
    assert -(-u) == u


def test_sparse_vector_drops_zeros():
    g = SparseDomainVector({1: 2})
    g.add(1, -2)
    assert len(g) == 0 and g.support() == frozenset()


def test_phi_of_gamma_and_matrix(oa221):
    g = SparseDomainVector({(1, 1): 1, (2, 1): -1})
    assert phi_of(oa221, g) == (0, 1, 0)
    M = phi_matrix(oa221)
    assert M.shape == (4, 3) and M.sum() == 8


def test_constants_validation():
    with pytest.raises(ValueError):
        FrameworkConstants(m=0, c0=1, c1_sq=1)
    c = FrameworkConstants.from_reals(1, 2, Fraction(3, 2), c3=2)
    assert c.c1_sq == Fraction(9, 4) and c.c3_sq == 4
