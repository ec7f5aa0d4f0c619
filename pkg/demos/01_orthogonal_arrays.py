"""
Orthogonal arrays: basis, isolation vectors, random search
==========================================================

Strings over {1..q} of length n form the ground set.  Each string maps to
its indicator vector over the pairs (I, v) with |I| <= t and v avoiding the
symbol q.
"""

# %%
from rigidgen.core import phi_of, verify_isolation_family, verify_solution
from rigidgen.oa import (OAParams, build_oa_instance, oa_gamma,
                         oa_isolation_family, verify_oa)
from rigidgen.sampler import SampleConfig, search

p = OAParams(q=2, n=4, t=2)
inst = build_oa_instance(p)
print("ground set", inst.size, "basis", inst.dim)
print("constants", inst.constants.as_dict())

# %%
# One isolation vector: a signed combination of strings whose image is a
# single basis coordinate.
gamma = oa_gamma(p, (1, 1, 2, 1), (1, 2))
print("gamma", gamma)
print("phi(gamma)", phi_of(inst, gamma))

# %%
# A greedy family of such vectors with pairwise disjoint supports.
fam = oa_isolation_family(p, ((1, 2), (1, 1)))
rep = verify_isolation_family(inst, fam)
print("family size", fam.count, "certified", rep.certified,
      "largest squared norm", rep.max_norm_sq)

# %%
# Random search for eight rows with every pair of columns balanced.
res = search(inst, SampleConfig(N=8, seed=0, trials=10**6))
print("found after", res.attempts, "trials")
for row in res.subset:
    print("  ", " ".join(map(str, row)))
print("strength-2 check", verify_oa(res.subset, p).passed,
      "framework check", verify_solution(inst, res.subset).passed)
