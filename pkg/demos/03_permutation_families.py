"""
t-wise permutation families
===========================

A family is t-wise when every ordered t-tuple of distinct points goes to
every other such tuple equally often.
"""

# %%
from rigidgen.perm import (affine_fixture, alternating_group, cyclic_fixture,
                           mobius_fixture, verify_t_wise)

for name, fam, n in [("cyclic 6", cyclic_fixture(6), 6),
                     ("affine 5", affine_fixture(5), 5),
                     ("A_5", alternating_group(5), 5)]:
    strengths = [t for t in range(1, n + 1) if verify_t_wise(fam, n, t).passed]
    print(f"{name:10s} size {len(fam):3d}  t-wise for t in {strengths}")

# %%
# Moebius maps: all invertible matrices versus determinant one.
for q in (2, 3, 4, 5, 7, 8):
    full = mobius_fixture(q)
    unit = mobius_fixture(q, "unit-determinant")
    print(f"q={q}: {len(full):4d} maps 3-wise={verify_t_wise(full, q + 1, 3).passed}"
          f" | det 1: {len(unit):4d} maps 3-wise={verify_t_wise(unit, q + 1, 3).passed}")
