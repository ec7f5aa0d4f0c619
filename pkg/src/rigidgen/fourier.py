"""Characteristic-function analysis of ``X = phi(T)`` under the Bernoulli model.

Exact objects (the law of ``X``, the correlation matrix ``R``, the lattice
``L`` of frequencies where the characteristic function equals 1) use
integers and :class:`fractions.Fraction`.  Floating point appears only when
evaluating the characteristic function and Gaussian formulas.

Torus points are tuples of coordinates reduced into ``[-1/2, 1/2)``; lattice
points are kept as Fractions with denominator dividing ``m``.

Constants hidden behind ``O(1)`` in the bounds checked here are parameters
(default 1, or the calibrated ``C = 10`` where noted) and are echoed back in
every report.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import BudgetExceeded, DomainError, Instance, expected_vector

DEFAULT_STATES_BUDGET = 2_000_000

# Gaussian exponent conventions for exp(-kappa * theta^T R theta):
#   "coarse":    kappa = 4 pi^2 p
#   "bernoulli": kappa = 2 pi^2 p (1 - p), the exact second-order term
VARIANCE_CONVENTIONS = ("coarse", "bernoulli")


def to_torus(x):
    """Reduce a real (float or Fraction) into ``[-1/2, 1/2)``."""
    if isinstance(x, Fraction):
        r = x - math.floor(x)
        return r - 1 if r >= Fraction(1, 2) else r
    r = x - math.floor(x)
    return r - 1.0 if r >= 0.5 else r


def torus_point(theta: Sequence) -> tuple:
    return tuple(to_torus(x) for x in theta)


def circle_abs(x) -> float:
    """``|x mod 1|`` with representative in ``[-1/2, 1/2]``."""
    return abs(float(to_torus(x)))


def torus_distance(theta1: Sequence, theta2: Sequence) -> float:
    if len(theta1) != len(theta2):
        raise DomainError("torus points of different dimension")
    return math.sqrt(math.fsum(_coord_gap(a, b) ** 2
                               for a, b in zip(theta1, theta2)))


def _coord_gap(a, b) -> float:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return circle_abs(a - b)
    return circle_abs(float(a) - float(b))


def distance_to_set(theta: Sequence, points) -> float:
    points = list(points)
    if not points:
        raise DomainError("distance to an empty set is undefined")
    return min(torus_distance(theta, alpha) for alpha in points)


def distance_to_M(theta: Sequence, m: int) -> float:
    """Distance to the grid ``(Z/m)^A``; coordinatewise rounding is optimal."""
    return math.sqrt(math.fsum(circle_abs(m * float(x)) ** 2 for x in theta)) / m


@dataclass(frozen=True)
class CorrelationMatrix:
    entries: tuple  # tuple of tuples of int

    @property
    def size(self) -> int:
        return len(self.entries)

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def determinant(self) -> int:
        import sympy

        return int(sympy.Matrix(self.entries).det(method="bareiss"))

    def is_psd(self) -> bool:
        """Exact check via symmetric pivoting (all principal pivots >= 0)."""
        import sympy

        return bool(sympy.Matrix(self.entries).is_positive_semidefinite)


def correlation_matrix(instance: Instance) -> CorrelationMatrix:
    """``R[a', a''] = sum_b phi(b)_a' phi(b)_a''`` as exact integers."""
    d = instance.dim
    R = [[0] * d for _ in range(d)]
    for b in instance.elements():
        row = instance.phi(b)
        nz = [(i, x) for i, x in enumerate(row) if x]
        for i, x in nz:
            for j, y in nz:
                R[i][j] += x * y
    assert all(R[i][j] == R[j][i] for i in range(d) for j in range(i))
    return CorrelationMatrix(tuple(tuple(r) for r in R))


def _phases(instance: Instance, theta: Sequence) -> list:
    """``<phi(b), theta> mod 1`` for every b, exact when theta is rational."""
    exact = all(isinstance(x, (Fraction, int)) for x in theta)
    out = []
    for b in instance.elements():
        row = instance.phi(b)
        if exact:
            s = sum(Fraction(x) * c for x, c in zip(row, theta) if x)
            out.append(float(to_torus(s)))
        else:
            s = math.fsum(x * float(c) for x, c in zip(row, theta) if x)
            out.append(to_torus(s))
    return out


def fourier_coefficient(instance: Instance, p, theta: Sequence) -> complex:
    """``prod_b (1 - p + p exp(2 pi i <phi(b), theta>))``."""
    if len(theta) != instance.dim:
        raise DomainError(f"theta must have {instance.dim} coordinates")
    p = float(p)
    if not 0 <= p <= 1:
        raise DomainError("p must lie in [0, 1]")
    value = 1 + 0j
    for nu in _phases(instance, theta):
        value *= (1 - p) + p * _turn(nu)
    return value


_QUARTER_TURNS = {0.0: 1 + 0j, 0.25: 1j, -0.5: -1 + 0j, -0.25: -1j}


def _turn(nu: float) -> complex:
    """``exp(2 pi i nu)``, exact at quarter turns."""
    exact = _QUARTER_TURNS.get(nu)
    return exact if exact is not None else cmath.exp(2j * math.pi * nu)


@dataclass(frozen=True)
class DistributionTable:
    probabilities: dict  # PhiVector -> Fraction

    def __getitem__(self, key) -> Fraction:
        return self.probabilities.get(tuple(key), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.probabilities.values(), Fraction(0))

    def __len__(self) -> int:
        return len(self.probabilities)

    def marginal(self, coordinate: int) -> dict:
        out = {}
        for key, pr in self.probabilities.items():
            out[key[coordinate]] = out.get(key[coordinate], Fraction(0)) + pr
        return out


def exact_distribution(instance: Instance, N: int,
                       states_budget: int = DEFAULT_STATES_BUDGET) -> DistributionTable:
    """Exact law of ``X`` by convolving the |B| independent two-point steps."""
    if not 1 <= N <= instance.size:
        raise DomainError(f"N = {N} outside 1..{instance.size}")
    p = Fraction(N, instance.size)
    q = 1 - p
    table = {(0,) * instance.dim: Fraction(1)}
    for b in instance.elements():
        step = instance.phi(b)
        nxt = {}
        for key, pr in table.items():
            if q:
                nxt[key] = nxt.get(key, 0) + pr * q
            moved = tuple(x + y for x, y in zip(key, step))
            nxt[moved] = nxt.get(moved, 0) + pr * p
        table = nxt
        if len(table) > states_budget:
            raise BudgetExceeded(
                f"distribution support exceeds {states_budget} states")
    return DistributionTable(table)


def exact_point_probability(instance: Instance, N: int, lam: Sequence,
                            table: DistributionTable | None = None) -> Fraction:
    """``Pr[X = lam]``; zero for non-integral ``lam``."""
    lam = tuple(Fraction(x) for x in lam)
    if any(x.denominator != 1 for x in lam):
        return Fraction(0)
    table = exact_distribution(instance, N) if table is None else table
    return table[tuple(int(x) for x in lam)]


def inversion_quadrature(instance: Instance, N: int, lam: Sequence,
                         points: int) -> float:
    """Fourier inversion by a uniform grid on the torus (``|A| <= 2``).

    The integrand is a trigonometric polynomial, so the rule is exact once
    ``points`` exceeds the spread of the support of ``X``.
    """
    d = instance.dim
    if d > 2:
        raise DomainError("quadrature inversion supports |A| <= 2 only")
    p = Fraction(N, instance.size)
    grid = [Fraction(k, points) - Fraction(1, 2) for k in range(points)]
    total = 0j
    for theta in itertools.product(grid, repeat=d):
        phase = sum(float(x) * float(c) for x, c in zip(lam, theta))
        total += fourier_coefficient(instance, p, theta) * cmath.exp(
            -2j * math.pi * phase)
    return (total / points**d).real


def enumerate_lattice_L(instance: Instance, budget: int = 10**6) -> list:
    """All ``theta`` in ``(Z/m)^A`` with ``<phi(b), theta>`` integral for every b."""
    m = instance.constants.m
    d = instance.dim
    if m**d > budget:
        raise BudgetExceeded(f"m^|A| = {m}^{d} exceeds budget {budget}")
    rows = sorted({instance.phi(b) for b in instance.elements()})
    out = []
    for ks in itertools.product(range(m), repeat=d):
        if all(sum(x * k for x, k in zip(row, ks)) % m == 0 for row in rows):
            out.append(tuple(to_torus(Fraction(k, m)) for k in ks))
    return sorted(out, key=lambda th: (sum(x != 0 for x in th), th))


def lattice_M(instance: Instance, budget: int = 10**6) -> list:
    m, d = instance.constants.m, instance.dim
    if m**d > budget:
        raise BudgetExceeded(f"m^|A| = {m}^{d} exceeds budget {budget}")
    return [tuple(to_torus(Fraction(k, m)) for k in ks)
            for ks in itertools.product(range(m), repeat=d)]


def is_subgroup(points: Sequence[tuple]) -> bool:
    pool = set(points)
    zero = tuple(Fraction(0) for _ in next(iter(pool)))
    if zero not in pool:
        return False
    return all(tuple(to_torus(x + y) for x, y in zip(a, b)) in pool
               for a in pool for b in pool)


def _kappa(p: float, variance: str) -> float:
    if variance == "coarse":
        return 4 * math.pi**2 * p
    if variance == "bernoulli":
        return 2 * math.pi**2 * p * (1 - p)
    raise DomainError(f"unknown variance convention {variance!r}")


@dataclass(frozen=True)
class Prediction:
    value: float
    det_R: int
    lattice_size: int
    p: Fraction
    variance: str
    degenerate: bool = False


def gaussian_prediction(instance: Instance, N: int, variance: str = "coarse",
                        R: CorrelationMatrix | None = None,
                        lattice_size: int | None = None) -> Prediction:
    """Local-limit estimate ``|L| (pi/kappa)^(|A|/2) det(R)^(-1/2)`` of Pr[X = E[X]].

    With the default convention this is ``|L| (4 pi p)^(-|A|/2) det(R)^(-1/2)``.
    """
    p = Fraction(N, instance.size)
    R = correlation_matrix(instance) if R is None else R
    det = R.determinant()
    L = len(enumerate_lattice_L(instance)) if lattice_size is None else lattice_size
    if det <= 0:
        return Prediction(0.0, det, L, p, variance, degenerate=True)
    kappa = _kappa(float(p), variance)
    d = instance.dim
    log_value = (math.log(L) + 0.5 * d * math.log(math.pi / kappa)
                 - 0.5 * math.log(det))
    return Prediction(math.exp(log_value), det, L, p, variance)


def quadratic_form(R: CorrelationMatrix, theta: Sequence) -> float:
    th = np.array([float(x) for x in theta])
    return float(th @ R.array() @ th)


@dataclass(frozen=True)
class NearZeroCheck:
    delta: complex
    abs_delta: float
    budget: float
    holds: bool
    theta_norm: float
    eps_max: float
    constant: float


def near_zero_radius(instance: Instance, N: int, scale: float = 1.0) -> float:
    """Largest admissible ``||theta||``: ``scale / (c1 N^(1/3))``."""
    return scale / (instance.constants.c1 * N ** (1 / 3))


def lemma_near_zero_check(instance: Instance, N: int, theta: Sequence,
                          C: float = 10.0, scale: float = 1.0,
                          variance: str = "coarse",
                          R: CorrelationMatrix | None = None) -> NearZeroCheck:
    """Relative error of the Gaussian approximation of ``X^(theta)`` near 0."""
    eps = near_zero_radius(instance, N, scale)
    norm = math.sqrt(math.fsum(float(x) ** 2 for x in theta))
    if norm > eps:
        raise DomainError(f"||theta|| = {norm:.3g} exceeds radius {eps:.3g}")
    R = correlation_matrix(instance) if R is None else R
    p = N / instance.size
    ev = expected_vector(instance, N).values
    phase = cmath.exp(2j * math.pi * math.fsum(float(e) * float(x)
                                               for e, x in zip(ev, theta)))
    approx = phase * math.exp(-_kappa(p, variance) * quadratic_form(R, theta))
    delta = fourier_coefficient(instance, p, theta) / approx - 1
    c1 = instance.constants.c1
    budget = C * (N**2 / instance.size + N * c1**3 * norm**3)
    return NearZeroCheck(delta, abs(delta), budget, abs(delta) <= budget,
                         norm, eps, C)


@dataclass(frozen=True)
class BoundCheck:
    applicable: bool
    abs_coefficient: float
    bound: float | None
    holds: bool | None
    distance: float
    epsilon: float | None
    constant: float


def lemma_far_from_M_check(instance: Instance, N: int, theta: Sequence,
                           epsilon: float | None = None,
                           C: float = 1.0) -> BoundCheck:
    """``|X^(theta)| <= exp(-C N eps^2 m^2 / (|A| c2 c3^2))`` when ``d(theta, M) >= eps``."""
    consts = instance.constants
    if consts.c2 is None or consts.c3_sq is None:
        raise DomainError("instance has no isolation constants c2, c3")
    d = distance_to_M(theta, consts.m)
    eps = d if epsilon is None else epsilon
    coef = abs(fourier_coefficient(instance, N / instance.size, theta))
    if d < eps or eps <= 0:
        return BoundCheck(False, coef, None, None, d, eps, C)
    bound = math.exp(-C * N * eps**2 * consts.m**2
                     / (instance.dim * float(consts.c2) * float(consts.c3_sq)))
    return BoundCheck(True, coef, bound, coef <= bound, d, eps, C)


def lemma_near_M_far_L_check(instance: Instance, N: int, theta: Sequence,
                             C: float = 1.0,
                             lattice: list | None = None) -> BoundCheck:
    """``|X^(theta)| <= exp(-C N / (m^2 |A| log(c1 |A|)))`` near ``M \\ L``.

    The radius is ``eps = 1 / (2 c1 m)``; points farther than that from
    ``M \\ L`` (in particular when ``M = L``) are reported as not applicable.
    """
    consts = instance.constants
    m, A, c1 = consts.m, instance.dim, consts.c1
    eps = 1 / (2 * c1 * m)
    L = set(enumerate_lattice_L(instance) if lattice is None else lattice)
    outside = [alpha for alpha in lattice_M(instance) if alpha not in L]
    d = distance_to_set(theta, outside) if outside else math.inf
    coef = abs(fourier_coefficient(instance, N / instance.size, theta))
    if d > eps:
        return BoundCheck(False, coef, None, None, d, eps, C)
    bound = math.exp(-C * N / (m**2 * A * math.log(c1 * A)))
    return BoundCheck(True, coef, bound, coef <= bound, d, eps, C)


def bound_by_exp_holds(p: float, x: float) -> bool:
    """``|1 - p + p e^(2 pi i x)| <= exp(-p x^2)`` for ``p <= 1/2, |x| <= 1/2``."""
    lhs = abs((1 - p) + p * cmath.exp(2j * math.pi * x))
    return lhs <= math.exp(-p * x * x) * (1 + 1e-15)


def bound_by_exp_grid(ps=None, xs=None) -> list:
    """Grid points where the inequality fails (empty list means it holds)."""
    ps = np.round(np.arange(1, 11) * 0.05, 10) if ps is None else ps
    xs = np.linspace(-0.5, 0.5, 1000) if xs is None else xs
    return [(float(p), float(x)) for p in ps for x in xs
            if not bound_by_exp_holds(float(p), float(x))]


@dataclass(frozen=True)
class TaylorCheck:
    f: complex
    gaussian: float
    delta: complex
    budget: float
    holds: bool


def taylor_scalar_check(p: float, x: float, C: float = 10.0,
                        variance: str = "coarse") -> TaylorCheck:
    """``f(x) = e^(-ipx)(1 - p + p e^(ix))`` against ``exp(-p x^2)``.

    ``variance="bernoulli"`` compares with ``exp(-p(1-p) x^2 / 2)`` instead.
    """
    if abs(x) > 1:
        raise DomainError("|x| must be at most 1")
    f = cmath.exp(-1j * p * x) * ((1 - p) + p * cmath.exp(1j * x))
    if variance == "coarse":
        g = math.exp(-p * x * x)
    elif variance == "bernoulli":
        g = math.exp(-p * (1 - p) * x * x / 2)
    else:
        raise DomainError(f"unknown variance convention {variance!r}")
    delta = f / g - 1
    budget = C * (p * p * x * x + p * abs(x) ** 3)
    return TaylorCheck(f, g, delta, budget, abs(delta) <= budget + 1e-15)


def taylor_grid(C: float = 10.0, variance: str = "coarse", ps=None, xs=None) -> dict:
    """Evaluate the scalar Taylor budget on a grid; report failures and the
    smallest constant that would make the budget hold."""
    ps = np.round(np.arange(1, 11) * 0.05, 10) if ps is None else ps
    xs = np.linspace(-1.0, 1.0, 1001) if xs is None else xs
    failures, worst = [], 0.0
    for p in ps:
        for x in xs:
            chk = taylor_scalar_check(float(p), float(x), C, variance)
            scale = p * p * x * x + p * abs(x) ** 3
            if scale > 0:
                worst = max(worst, abs(chk.delta) / scale)
            if not chk.holds:
                failures.append((float(p), float(x)))
    return {"constant": C, "variance": variance, "points": len(ps) * len(xs),
            "failures": failures, "calibrated_constant": worst}


def analyzer_report(instance: Instance, N: int, with_exact: bool = True) -> dict:
    """Machine-readable summary: R, det(R), |L|, prediction(s), exact value."""
    R = correlation_matrix(instance)
    L = enumerate_lattice_L(instance)
    preds = {v: gaussian_prediction(instance, N, v, R=R, lattice_size=len(L))
             for v in VARIANCE_CONVENTIONS}
    ev = expected_vector(instance, N)
    report = {
        "N": N,
        "p": str(Fraction(N, instance.size)),
        "R": [list(r) for r in R.entries],
        "det_R": preds["coarse"].det_R,
        "lattice_L_size": len(L),
        "expected_integral": ev.integral,
        "prediction": preds["coarse"].value,
        "prediction_bernoulli_variance": preds["bernoulli"].value,
        "degenerate": preds["coarse"].degenerate,
    }
    if with_exact:
        exact = exact_point_probability(instance, N, ev.values)
        report["exact"] = str(exact)
        report["exact_float"] = float(exact)
        if exact:
            report["ratio"] = preds["coarse"].value / float(exact)
            report["ratio_bernoulli_variance"] = preds["bernoulli"].value / float(exact)
    return report
