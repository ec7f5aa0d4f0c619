"""
Block designs
=============

Blocks are k-subsets of {1..v}; the basis is indexed by t-subsets and a
block contributes a 1 for every t-subset it contains.
"""

# %%
from rigidgen.core import phi_of, verify_isolation_family
from rigidgen.design import (DesignParams, build_design_instance,
                             design_gamma, design_isolation_family,
                             verify_design)
from rigidgen.sampler import SampleConfig, search

fano = [(1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (1, 5, 6), (2, 6, 7), (1, 3, 7)]
verdict = verify_design(fano, DesignParams(7, 3, 2))
print("Fano plane:", verdict.passed, "lambda =", verdict.lam)
print("without its last block:", verify_design(fano[:-1], DesignParams(7, 3, 2)).passed)

# %%
# The smallest isolation vector: one block avoiding point 1, against the
# three blocks through point 1.
p = DesignParams(4, 3, 1)
inst = build_design_instance(p)
g = design_gamma(p, (2, 3, 4), (1,))
print("gamma", g)
print("phi(gamma)", phi_of(inst, g), "= m * e_{1} with m =", p.modulus)

# %%
p = DesignParams(8, 5, 2)
inst = build_design_instance(p)
fam = design_isolation_family(p, (1, 2))
print("(8,5,2) family for {1,2}:", fam.count, "vectors,",
      "certified" if verify_isolation_family(inst, fam).certified else "FAILED")

# %%
# Search at the smallest N divisible by c0 * m.
p = DesignParams(6, 3, 1)
inst = build_design_instance(p)
N = inst.constants.c0 * inst.constants.m
res = search(inst, SampleConfig(N=N, seed=0, trials=10**6))
print(f"N = {N}: found on trial {res.trial}, lambda =",
      verify_design(res.subset, p).lam)
