"""
Characteristic function and Gaussian prediction
===============================================

For the Bernoulli model the law of X = phi(T) is computed exactly and
compared with a Gaussian local-limit estimate under two exponent choices.
"""

# %%
import numpy as np

from rigidgen.core import expected_vector
from rigidgen.fourier import (analyzer_report, correlation_matrix,
                              enumerate_lattice_L, exact_distribution,
                              lemma_near_zero_check, near_zero_radius,
                              taylor_grid)
from rigidgen.design import DesignParams, build_design_instance
from rigidgen.oa import OAParams, build_oa_instance

for (q, n, t), N in [((2, 2, 1), 2), ((2, 3, 1), 4)]:
    rep = analyzer_report(build_oa_instance(OAParams(q, n, t)), N)
    print(f"OA({q},{n},{t}) N={N}: det R={rep['det_R']} exact={rep['exact']}"
          f" ratio={rep['ratio']:.3f} (p(1-p) exponent: {rep['ratio_bernoulli_variance']:.3f})")

# %%
# The exact law has total mass one and its constant row is binomial.
inst = build_oa_instance(OAParams(2, 3, 1))
table = exact_distribution(inst, 4)
print("states", len(table), "mass", table.total())
print("size marginal", dict(sorted(table.marginal(0).items())))

# %%
# Relative error near zero, shrinking theta by halves.
R = correlation_matrix(inst)
eps = near_zero_radius(inst, 4)
theta0 = np.array([0.6, -0.3, 0.5, 0.2])
theta0 *= eps / np.linalg.norm(theta0)
for variance in ("coarse", "bernoulli"):
    deltas = [lemma_near_zero_check(inst, 4, s * theta0, variance=variance, R=R).abs_delta
              for s in (1, 0.5, 0.25, 0.125)]
    print(variance, ["%.2e" % d for d in deltas])

# %%
# Scalar expansion: smallest constant that covers the grid.
for variance in ("coarse", "bernoulli"):
    g = taylor_grid(variance=variance)
    print(variance, "calibrated C =", round(g["calibrated_constant"], 3),
          "points over C=10:", len(g["failures"]))

# %%
# A nontrivial lattice: blocks of size 3 make the all-thirds vector integral.
print(enumerate_lattice_L(build_design_instance(DesignParams(4, 3, 1))))
print("E[X] for design(4,3,1), N=2:", expected_vector(
    build_design_instance(DesignParams(4, 3, 1)), 2).values)
