import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from oracles import hits_expectation, subset_probability
from rigidgen.core import DomainError, FrameworkConstants, Instance
from rigidgen.design import DesignParams, build_design_instance
from rigidgen.fourier import (bound_by_exp_grid, bound_by_exp_holds,
                              correlation_matrix, distance_to_set,
                              enumerate_lattice_L, exact_distribution,
                              exact_point_probability, fourier_coefficient,
                              gaussian_prediction, inversion_quadrature,
                              is_subgroup, lattice_M, lemma_far_from_M_check,
                              lemma_near_M_far_L_check, lemma_near_zero_check,
                              near_zero_radius, taylor_grid,
                              taylor_scalar_check, to_torus, torus_distance)
from rigidgen.oa import OAParams, build_oa_instance


def scalar_instance(values):
    """|A| = 1 toy: phi(b) = (values[b],)."""
    n = len(values)
    return Instance(
        family="custom", params={"values": tuple(values)}, size=n, index=("x",),
        elements_fn=lambda: iter(range(n)), phi_fn=lambda b: (values[b],),
        contains_fn=lambda b: b in range(n),
        constants=FrameworkConstants(m=1, c0=n, c1_sq=max(v * v for v in values)),
        constant_combination={},
    )


def duplicated_instance():
    return Instance(
        family="custom", params={}, size=3, index=("u", "w"),
        elements_fn=lambda: iter(range(3)), phi_fn=lambda b: (1, 1),
        contains_fn=lambda b: b in range(3),
        constants=FrameworkConstants(m=1, c0=1, c1_sq=2),
        constant_combination={"u": 1},
    )


GRID = [build_oa_instance(OAParams(*p)) for p in [(2, 2, 1), (2, 3, 1), (3, 2, 1),
                                                  (2, 3, 2)]] + \
       [build_design_instance(DesignParams(*p)) for p in [(4, 3, 1), (5, 3, 1)]]


# ---- correlation matrix

def test_correlation_matrix_oa221(oa221):
    R = correlation_matrix(oa221)
    assert R.entries == ((4, 2, 2), (2, 2, 1), (2, 1, 2))
    assert R.determinant() == 4 and R.is_psd()


def test_correlation_matrix_constant():
    assert correlation_matrix(scalar_instance([1, 1, 1])).entries == ((3,),)


@pytest.mark.parametrize("inst", GRID)
def test_correlation_psd_on_grid(inst):
    R = correlation_matrix(inst)
    assert R.is_psd() and (R.array() == R.array().T).all()


# ---- characteristic function

def test_coefficient_at_zero_is_one(oa231):
    assert fourier_coefficient(oa231, Fraction(1, 2), (0, 0, 0, 0)) == 1


def test_coefficient_vanishes(oa221):
    val = fourier_coefficient(oa221, Fraction(1, 2), (Fraction(1, 2), 0, 0))
    assert val == 0


def test_coefficient_is_bounded(oa231):
    rng = random.Random(0)
    for _ in range(200):
        theta = [rng.uniform(-0.5, 0.5) for _ in range(4)]
        assert abs(fourier_coefficient(oa231, 0.3, theta)) <= 1 + 1e-9


def test_coefficient_wrong_dimension(oa221):
    with pytest.raises(DomainError):
        fourier_coefficient(oa221, 0.5, (0, 0))


# ---- exact law

def test_exact_distribution_oa221(oa221):
    table = exact_distribution(oa221, 2)
    assert table.total() == 1
    assert table[(2, 1, 1)] == Fraction(1, 8)
    assert table[(4, 2, 2)] == Fraction(1, 2) ** 4
    marginal = table.marginal(0)
    assert marginal == {k: Fraction(math.comb(4, k), 16) for k in range(5)}


@pytest.mark.parametrize("inst,N", [(GRID[0], 2), (GRID[1], 4), (GRID[1], 2),
                                    (GRID[2], 3), (GRID[4], 4)])
def test_exact_probability_matches_subset_oracle(inst, N):
    ev = [Fraction(N * x, inst.size) for x in inst.phi_total]
    assert exact_point_probability(inst, N, ev) == \
        subset_probability(inst, N, hits_expectation(inst, N))


def test_frozen_probabilities():
    assert exact_point_probability(GRID[1], 4, (4, 2, 2, 2)) == Fraction(1, 32)
    oa242 = build_oa_instance(OAParams(2, 4, 2))
    ev = [8 * x // 16 for x in oa242.phi_total]
    assert exact_point_probability(oa242, 8, ev) == Fraction(5, 32768)


def test_non_integral_target_has_zero_probability(d431):
    assert exact_point_probability(d431, 2, [Fraction(3, 2)] * 4) == 0


def test_quadrature_inversion_matches_exact():
    inst = scalar_instance([1, 2])
    table = exact_distribution(inst, 1)
    for lam in range(4):
        for points in (8, 16, 32):
            approx = inversion_quadrature(inst, 1, (lam,), points)
            assert abs(approx - float(table[(lam,)])) < 1e-9


def test_quadrature_refuses_high_dimension(oa221):
    with pytest.raises(DomainError):
        inversion_quadrature(oa221, 2, (2, 1, 1), 8)


# ---- lattices

def test_lattice_trivial_when_m_is_one(oa221):
    assert enumerate_lattice_L(oa221) == [(0, 0, 0)]


def test_lattice_design431(d431):
    L = enumerate_lattice_L(d431)
    third = Fraction(1, 3)
    assert set(L) == {(0,) * 4, (third,) * 4, (-third,) * 4}
    assert set(L) <= set(lattice_M(d431)) and is_subgroup(L)
    for alpha in L:
        assert all((3 * x).denominator == 1 for x in alpha)
        assert abs(fourier_coefficient(d431, Fraction(3, 4), alpha) - 1) < 1e-12


def test_shift_invariance_on_L(d431):
    rng = random.Random(1)
    for alpha in enumerate_lattice_L(d431):
        for _ in range(20):
            theta = [rng.uniform(-0.5, 0.5) for _ in range(4)]
            moved = [to_torus(float(a) + x) for a, x in zip(alpha, theta)]
            a = fourier_coefficient(d431, 0.5, theta)
            b = fourier_coefficient(d431, 0.5, moved)
            assert abs(a - b) < 1e-12


def test_is_subgroup_detects_non_closure():
    h = Fraction(1, 3)
    assert not is_subgroup([(Fraction(0),), (h,)])


# ---- Gaussian prediction

def test_prediction_oa221(oa221):
    pred = gaussian_prediction(oa221, 2)
    assert pred.det_R == 4 and pred.lattice_size == 1
    assert pred.value == pytest.approx((2 * math.pi) ** -1.5 / 2, rel=1e-12)


def test_prediction_scaling(oa231):
    a = gaussian_prediction(oa231, 2).value
    b = gaussian_prediction(oa231, 4).value
    assert a / b == pytest.approx((2 / 4) ** (-4 / 2), rel=1e-12)


def test_prediction_degenerate():
    pred = gaussian_prediction(duplicated_instance(), 1)
    assert pred.degenerate and pred.det_R == 0 and pred.value == 0


# ---- lemma predicates

def test_near_zero_at_origin(oa231):
    chk = lemma_near_zero_check(oa231, 4, (0, 0, 0, 0))
    assert chk.abs_delta == 0 and chk.holds


def test_near_zero_precondition(oa231):
    eps = near_zero_radius(oa231, 4)
    with pytest.raises(DomainError):
        lemma_near_zero_check(oa231, 4, (eps, eps, 0, 0))


@pytest.mark.parametrize("variance", ["coarse", "bernoulli"])
def test_near_zero_decays_under_halving(oa231, variance):
    rng = np.random.default_rng(7)
    eps = near_zero_radius(oa231, 4)
    for _ in range(50):
        theta0 = rng.normal(size=4)
        theta0 *= eps * rng.uniform(0.2, 1.0) / np.linalg.norm(theta0)
        deltas = [lemma_near_zero_check(oa231, 4, s * theta0,
                                        variance=variance).abs_delta
                  for s in (1, 0.5, 0.25, 0.125)]
        assert all(x > y for x, y in zip(deltas, deltas[1:]))


def test_far_from_M_oa221(oa221):
    chk = lemma_far_from_M_check(oa221, 2, (0.5, 0, 0))
    assert chk.applicable and chk.abs_coefficient == 0 and chk.holds
    assert chk.bound > 0


def test_far_from_M_not_applicable_inside_radius(oa231):
    chk = lemma_far_from_M_check(oa231, 4, (0.01, 0, 0, 0), epsilon=0.1)
    assert not chk.applicable and chk.holds is None


def test_near_M_far_L_domain(d431):
    inside = lemma_near_M_far_L_check(d431, 4, (0, 0, 0, 0))
    assert not inside.applicable and inside.distance == pytest.approx(1 / 3)
    third = 1 / 3
    near = lemma_near_M_far_L_check(d431, 3, (third + 0.01, 0.0, 0.0, 0.0))
    assert near.applicable and near.bound is not None


def test_torus_distance_examples():
    assert torus_distance((0.1, 0.2), (0.1, 0.2)) == 0
    assert torus_distance((0.4,), (-0.4,)) == pytest.approx(0.2)
    theta = (0.1, -0.3, 0.2)
    assert distance_to_set(theta, [(0, 0, 0)]) == pytest.approx(
        math.sqrt(sum(x * x for x in theta)))
    with pytest.raises(DomainError):
        distance_to_set(theta, [])


# ---- scalar claims

def test_taylor_trivial_points():
    assert taylor_scalar_check(0.3, 0.0).delta == 0
    chk = taylor_scalar_check(0.0, 0.7)
    assert chk.f == 1 and chk.delta == 0
    with pytest.raises(DomainError):
        taylor_scalar_check(0.2, 1.5)


def test_exp_bound_holds_on_grid():
    assert bound_by_exp_grid() == []
    assert bound_by_exp_holds(0.5, 0.5)


def test_bernoulli_exponent_meets_budget_everywhere():
    grid = taylor_grid(C=10, variance="bernoulli")
    assert grid["failures"] == [] and grid["calibrated_constant"] < 1


def test_coarse_exponent_leaves_a_quadratic_residual():
    # log f(x) = -p(1-p) x^2 / 2 + O(p x^3), so against exp(-p x^2) the
    # relative error tends to p(1+p) x^2 / 2, which no multiple of
    # p^2 x^2 + p |x|^3 dominates once p and |x| are both small.
    for p in (0.01, 0.05, 0.2):
        x = 1e-3
        delta = taylor_scalar_check(p, x).delta
        assert abs(delta) == pytest.approx(p * (1 + p) * x * x / 2, rel=1e-2)
    ratio = abs(taylor_scalar_check(0.01, 1e-3).delta) / (0.01**2 * 1e-6 + 0.01 * 1e-9)
    assert ratio > 40
