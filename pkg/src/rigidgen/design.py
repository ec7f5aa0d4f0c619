"""t-designs: k-subsets of {1, ..., v} balanced on t-subsets.

Blocks and basis indices are sorted tuples of 1-based points, both listed in
lexicographic order.  ``phi_a(b) = [a subset of b]``.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import (DEFAULT_BUDGET, BudgetExceeded, DomainError,
                   FrameworkConstants, Instance, IsolationFamily,
                   SparseDomainVector, SymmetryWitness, ceil_div)


@dataclass(frozen=True)
class DesignParams:
    v: int
    k: int
    t: int

    def __post_init__(self):
        if self.v < 1:
            raise DomainError("v must be >= 1")
        if not 1 <= self.t <= self.k <= self.v:
            raise DomainError("need 1 <= t <= k <= v")

    @property
    def isolation_supported(self) -> bool:
        return self.k > 2 * self.t

    @property
    def modulus(self) -> int:
        return math.perm(self.k, self.t)

    def as_dict(self) -> dict:
        return {"v": self.v, "k": self.k, "t": self.t}


def parse_block(block, size: int, v: int) -> tuple:
    b = tuple(sorted(int(s) for s in block))
    if len(b) != size or len(set(b)) != size or any(not 1 <= s <= v for s in b):
        raise DomainError(f"{block!r} is not a {size}-subset of [{v}]")
    return b


def unrank_combination(rank: int, v: int, k: int) -> tuple:
    """The ``rank``-th k-subset of [v] in lexicographic order."""
    out, start = [], 1
    for slots in range(k, 0, -1):
        for s in range(start, v + 1):
            below = math.comb(v - s, slots - 1)
            if rank < below:
                out.append(s)
                start = s + 1
                break
            rank -= below
    return tuple(out)


def build_design_instance(p: DesignParams, budget: int = DEFAULT_BUDGET) -> Instance:
    """Blocks as ground set, t-subsets as basis; k <= 2t gives a verification-only instance."""
    v, k, t = p.v, p.k, p.t
    size = math.comb(v, k)
    if size > budget or math.comb(v, t) > budget:
        raise BudgetExceeded(f"design{p.as_dict()} exceeds budget {budget}")
    index = tuple(itertools.combinations(range(1, v + 1), t))
    consts = FrameworkConstants(
        m=p.modulus,
        c0=math.comb(v, t),
        c1_sq=v**t,
        c2=(v * k)**(2 * t),
        c3_sq=(2 * k)**(3 * t),
    )

    @lru_cache(maxsize=1 << 16)
    def phi(b):
        bs = set(b)
        return tuple(int(bs.issuperset(a)) for a in index)

    def contains(b):
        return (isinstance(b, tuple) and len(b) == k
                and all(isinstance(s, int) for s in b)
                and list(b) == sorted(set(b)) and 1 <= b[0] and b[-1] <= v)

    def phi_total():
        return (math.comb(v - t, k - t),) * len(index)

    isolation = None
    if p.isolation_supported:
        def isolation(a, budget=DEFAULT_BUDGET, seed=0):
            return design_isolation_family(p, a, budget=budget, seed=seed)

    return Instance(
        family="design", params=p, size=size, index=index,
        elements_fn=lambda: itertools.combinations(range(1, v + 1), k),
        phi_fn=phi, contains_fn=contains, constants=consts,
        # sum_a phi_a == C(k, t); unit coefficients scaled by 1/C(k, t)
        constant_combination={a: Fraction(1, math.comb(k, t)) for a in index},
        element_at_fn=lambda i: unrank_combination(i, v, k),
        phi_total_fn=phi_total, isolation_fn=isolation,
        verification_only=not p.isolation_supported, budget=budget,
    )


def binomial_identity_check(a: int, b: int, c: int) -> int:
    """``sum_i (-1)^i C(a, i) C(c + i, b)``; zero whenever ``a > b``."""
    if min(a, b, c) < 0:
        raise DomainError("a, b, c must be nonnegative")
    return sum((-1)**i * math.comb(a, i) * math.comb(c + i, b)
               for i in range(a + 1))


def _check_pair(p: DesignParams, x, a) -> tuple[tuple, tuple]:
    x = parse_block(x, p.k, p.v)
    a = parse_block(a, p.t, p.v)
    if set(x) & set(a):
        raise DomainError(f"block {x} must be disjoint from {a}")
    return x, a


def design_delta(p: DesignParams, x, a, j: int) -> SparseDomainVector:
    """Indicator of blocks ``b`` inside ``a u x`` meeting ``a`` in ``j`` points."""
    x, a = _check_pair(p, x, a)
    if not 0 <= j <= p.t:
        raise DomainError(f"j = {j} outside 0..{p.t}")
    out = SparseDomainVector()
    if p.k - j > len(x):
        return out
    for inner in itertools.combinations(a, j):
        for outer in itertools.combinations(x, p.k - j):
            out.add(tuple(sorted(inner + outer)), 1)
    return out


def gamma_coefficient(k: int, t: int, j: int) -> int:
    """``(-1)^(t-j) j! (k-j-1)! / (k-t-1)!``, asserted integral."""
    num = math.factorial(j) * math.factorial(k - j - 1)
    den = math.factorial(k - t - 1)
    coef, rem = divmod(num, den)
    assert rem == 0, (k, t, j)
    return (-1)**(t - j) * coef


def design_gamma(p: DesignParams, x, a) -> SparseDomainVector:
    """Isolation vector with ``phi(gamma) = k!/(k-t)! e_a``."""
    if not p.isolation_supported:
        raise DomainError(f"isolation vectors need k > 2t, got k={p.k}, t={p.t}")
    out = SparseDomainVector()
    for j in range(p.t + 1):
        out = out + design_delta(p, x, a, j) * gamma_coefficient(p.k, p.t, j)
    return out


def design_isolation_family(p: DesignParams, a, budget: int = DEFAULT_BUDGET,
                            seed: int = 0) -> IsolationFamily:
    """Greedy centers ``x`` disjoint from ``a`` with pairwise overlap <= k - 2t - 1."""
    if not p.isolation_supported:
        raise DomainError(f"isolation families need k > 2t, got k={p.k}, t={p.t}")
    a = parse_block(a, p.t, p.v)
    others = [s for s in range(1, p.v + 1) if s not in a]
    total = math.comb(len(others), p.k)
    centers, complete = [], True
    if total:
        start = random.Random(seed).randrange(total)
        limit = p.k - 2 * p.t - 1
        for step in range(total):
            if step >= budget:
                complete = False
                break
            pick = unrank_combination((start + step) % total, len(others), p.k)
            x = tuple(others[i - 1] for i in pick)
            if all(len(set(x) & set(c)) <= limit for c in centers):
                centers.append(x)
    vectors = [design_gamma(p, x, a) for x in centers]
    return IsolationFamily(a, p.modulus, vectors, complete)


def lemma_count_bound(p: DesignParams) -> int:
    """``ceil(C(v, k) / (vk)^(2t))``."""
    return ceil_div(math.comb(p.v, p.k), (p.v * p.k)**(2 * p.t))


@dataclass(frozen=True)
class DesignVerdict:
    passed: bool
    blocks: int
    lam: Fraction
    simple: bool
    first_violation: tuple | None = None  # (t-subset, count)


def verify_design(T, p: DesignParams) -> DesignVerdict:
    """Count blocks through every t-subset; lambda is derived, never supplied."""
    blocks = [parse_block(b, p.k, p.v) for b in T]
    if not blocks:
        raise DomainError("a design needs at least one block")
    lam = Fraction(len(blocks) * math.comb(p.k, p.t), math.comb(p.v, p.t))
    simple = len(set(blocks)) == len(blocks)
    counts = Counter()
    for b in blocks:
        counts.update(itertools.combinations(b, p.t))
    for a in itertools.combinations(range(1, p.v + 1), p.t):
        if counts.get(a, 0) != lam:
            return DesignVerdict(False, len(blocks), lam, simple,
                                 (a, counts.get(a, 0)))
    return DesignVerdict(True, len(blocks), lam, simple)


def design_symmetry_witness(p: DesignParams, sigma) -> SymmetryWitness:
    """Relabel points by ``sigma`` (a tuple of 1-based images)."""
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, p.v + 1)):
        raise DomainError(f"{sigma!r} is not a permutation of [{p.v}]")
    inverse = {s: i + 1 for i, s in enumerate(sigma)}
    index = tuple(itertools.combinations(range(1, p.v + 1), p.t))
    pos = {a: i for i, a in enumerate(index)}

    def pi(b):
        return tuple(sorted(sigma[s - 1] for s in b))

    rows = []
    for a in index:
        row = [0] * len(index)
        row[pos[tuple(sorted(inverse[s] for s in a))]] = 1
        rows.append(tuple(row))
    return SymmetryWitness(pi, tuple(rows))


def relabelling_between(p: DesignParams, b1, b2) -> tuple:
    """A point permutation carrying block ``b1`` onto block ``b2``."""
    b1, b2 = parse_block(b1, p.k, p.v), parse_block(b2, p.k, p.v)
    rest1 = [s for s in range(1, p.v + 1) if s not in b1]
    rest2 = [s for s in range(1, p.v + 1) if s not in b2]
    sigma = [0] * p.v
    for x, y in zip(list(b1) + rest1, list(b2) + rest2):
        sigma[x - 1] = y
    return tuple(sigma)


def complete_design(p: DesignParams) -> list:
    return list(itertools.combinations(range(1, p.v + 1), p.k))
