"""Brute-force reference implementations used to freeze expected values.

These deliberately avoid the library's fast paths: subsets are enumerated
outright and counts are taken from first principles.
"""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction


def all_subsets(elements):
    elements = list(elements)
    for mask in range(1 << len(elements)):
        yield [e for i, e in enumerate(elements) if mask >> i & 1]


def subset_probability(instance, N, predicate) -> Fraction:
    """Pr[predicate(T)] under Bernoulli(N/|B|), by listing all 2^|B| subsets."""
    B = list(instance.elements())
    p = Fraction(N, len(B))
    total = Fraction(0)
    for T in all_subsets(B):
        if predicate(T):
            total += p ** len(T) * (1 - p) ** (len(B) - len(T))
    return total


def hits_expectation(instance, N):
    """Predicate: sum of phi over T equals (N/|B|) phi(B), checked in Fractions."""
    B = list(instance.elements())
    dim = instance.dim
    phi_B = [sum(instance.phi(b)[a] for b in B) for a in range(dim)]
    target = [Fraction(N * x, len(B)) for x in phi_B]

    def pred(T):
        got = [sum(instance.phi(b)[a] for b in T) for a in range(dim)]
        return all(g == x for g, x in zip(got, target))

    return pred


def oa_strength_ok(rows, q, t) -> bool:
    n = len(rows[0])
    for cols in itertools.combinations(range(n), t):
        seen = Counter(tuple(r[c] for c in cols) for r in rows)
        values = [seen[v] for v in itertools.product(range(1, q + 1), repeat=t)]
        if len(set(values)) != 1:
            return False
    return True


def design_ok(blocks, v, t) -> bool:
    counts = [sum(set(a) <= set(b) for b in blocks)
              for a in itertools.combinations(range(1, v + 1), t)]
    return len(set(counts)) == 1


def t_wise_ok(perms, n, t) -> bool:
    for i in itertools.permutations(range(1, n + 1), t):
        images = Counter(tuple(pi[s - 1] for s in i) for pi in perms)
        if len(images) != len(list(itertools.permutations(range(1, n + 1), t))):
            return False
        if len(set(images.values())) != 1:
            return False
    return True
