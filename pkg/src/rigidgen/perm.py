"""t-wise permutation families.

Permutations of ``{1, ..., n}`` are image tuples: ``pi[i - 1] = pi(i)``.
Only verification is provided here; the framework instance for ``S_n`` uses
the spanning set ``f_(i, j)`` without extracting a basis, so it carries no
isolation families.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Sequence

from .core import (DEFAULT_BUDGET, BudgetExceeded, DomainError,
                   FrameworkConstants, Instance, SymmetryWitness)


def parse_perm(pi, n: int) -> tuple:
    pi = tuple(int(s) for s in pi)
    if len(pi) != n or sorted(pi) != list(range(1, n + 1)):
        raise DomainError(f"{pi!r} is not a permutation of [{n}]")
    return pi


def compose(f: tuple, g: tuple) -> tuple:
    """``f o g`` (apply ``g`` first)."""
    return tuple(f[g[i] - 1] for i in range(len(g)))


def inverse(f: tuple) -> tuple:
    out = [0] * len(f)
    for i, s in enumerate(f):
        out[s - 1] = i + 1
    return tuple(out)


@dataclass(frozen=True)
class TWiseVerdict:
    passed: bool
    size: int
    first_violation: tuple | None = None  # (i-tuple, j-tuple, count)


def verify_t_wise(T, n: int, t: int) -> TWiseVerdict:
    """Uniform action on ordered t-tuples of distinct points, by exact counting."""
    perms = [parse_perm(pi, n) for pi in T]
    if not perms:
        raise DomainError("T must be nonempty")
    if not 1 <= t <= n:
        raise DomainError("need 1 <= t <= n")
    falling = math.perm(n, t)
    size = len(perms)
    for i in itertools.permutations(range(1, n + 1), t):
        counts = Counter(tuple(pi[s - 1] for s in i) for pi in perms)
        for j in itertools.permutations(range(1, n + 1), t):
            c = counts.get(j, 0)
            if falling * c != size:
                return TWiseVerdict(False, size, (i, j, c))
    return TWiseVerdict(True, size)


def symmetric_group(n: int) -> list:
    return list(itertools.permutations(range(1, n + 1)))


def sign(pi: tuple) -> int:
    s, seen = 1, set()
    for i in range(len(pi)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = pi[j] - 1
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def alternating_group(n: int) -> list:
    return [pi for pi in symmetric_group(n) if sign(pi) == 1]


def assert_group(elements: Sequence[tuple]) -> None:
    """Closure under composition (identity and inverses follow for finite sets)."""
    pool = set(elements)
    for f in elements:
        for g in elements:
            if compose(f, g) not in pool:
                raise AssertionError("family is not closed under composition")


class FiniteField:
    """GF(q) for a prime power ``q``; elements are 0..q-1 (base-p digits)."""

    def __init__(self, q: int):
        p, k = _prime_power(q)
        self.q, self.p, self.k = q, p, k
        if k == 1:
            self.add = [[(a + b) % p for b in range(p)] for a in range(p)]
            self.mul = [[(a * b) % p for b in range(p)] for a in range(p)]
        else:
            self._build_extension()
        self.inv = {a: next(b for b in range(1, q) if self.mul[a][b] == 1)
                    for a in range(1, q)}

    def _digits(self, a):
        return [(a // self.p**i) % self.p for i in range(self.k)]

    def _number(self, digits):
        return sum(d * self.p**i for i, d in enumerate(digits))

    def _build_extension(self):
        p, k, q = self.p, self.k, self.q
        self.add = [[self._number([(x + y) % p for x, y in
                                   zip(self._digits(a), self._digits(b))])
                     for b in range(q)] for a in range(q)]
        for tail in itertools.product(range(p), repeat=k):
            modulus = list(tail) + [1]  # monic, low degree first
            table = [[self._polymul(a, b, modulus) for b in range(q)]
                     for a in range(q)]
            if all(any(table[a][b] == 1 for b in range(1, q)) for a in range(1, q)):
                self.mul = table
                self.modulus = modulus
                return
        raise AssertionError(f"no irreducible polynomial found for q={q}")

    def _polymul(self, a, b, modulus):
        p, k = self.p, self.k
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(self._digits(a)):
            for j, y in enumerate(self._digits(b)):
                prod[i + j] = (prod[i + j] + x * y) % p
        for deg in range(2 * k - 2, k - 1, -1):
            c = prod[deg]
            if c:
                for i in range(k + 1):
                    prod[deg - k + i] = (prod[deg - k + i] - c * modulus[i]) % p
        return self._number(prod[:k])

    def sub(self, a, b):
        neg = next(c for c in range(self.q) if self.add[b][c] == 0)
        return self.add[a][neg]


def _prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise DomainError(f"unsupported field size {q}")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    if r != 1:
        raise DomainError(f"unsupported field size {q}: not a prime power")
    return p, k


def cyclic_fixture(n: int) -> list:
    """Shifts ``x -> x + a (mod n)`` on ``{1..n}``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    perms = [tuple((x + a) % n + 1 for x in range(n)) for a in range(n)]
    assert_group(perms)
    return perms


def affine_fixture(q: int) -> list:
    """Maps ``x -> a x + b`` (``a != 0``) over GF(q); point ``i`` is element ``i-1``."""
    F = FiniteField(q)
    perms = sorted({tuple(F.add[F.mul[a][x]][b] + 1 for x in range(q))
                    for a in range(1, q) for b in range(q)})
    assert_group(perms)
    return perms


def mobius_fixture(q: int, variant: str = "nonzero-determinant") -> list:
    """Moebius maps on the projective line; point ``q + 1`` is infinity.

    ``variant="unit-determinant"`` keeps only matrices with ``ad - bc = 1``;
    the default keeps every invertible matrix.
    """
    if variant not in ("unit-determinant", "nonzero-determinant"):
        raise DomainError(f"unknown variant {variant!r}")
    F = FiniteField(q)
    INF = q
    perms = set()
    for a, b, c, d in itertools.product(range(q), repeat=4):
        det = F.sub(F.mul[a][d], F.mul[b][c])
        if det == 0 or (variant == "unit-determinant" and det != 1):
            continue
        image = []
        for x in range(q + 1):
            if x == INF:
                num, den = a, c
            else:
                num = F.add[F.mul[a][x]][b]
                den = F.add[F.mul[c][x]][d]
            image.append(INF if den == 0 else F.mul[num][F.inv[den]]
                         if num else 0)
        perms.add(tuple(y + 1 for y in image))
    perms = sorted(perms)
    assert_group(perms)
    return perms


@dataclass(frozen=True)
class GroupAction:
    elements: tuple
    points: tuple
    act: Callable[[Any, Any], Any]

    @classmethod
    def of_permutations(cls, perms, n: int) -> "GroupAction":
        return cls(tuple(perms), tuple(range(1, n + 1)),
                   lambda g, x: g[x - 1])


@dataclass(frozen=True)
class UniformityVerdict:
    passed: bool
    first_violation: tuple | None = None


def verify_x_uniform(T, action: GroupAction) -> UniformityVerdict:
    """``|X| * #{g in T: g(x) = y} == |T|`` for all points ``x, y``."""
    T = list(T)
    if not T:
        raise DomainError("T must be nonempty")
    X = action.points
    point_set = set(X)
    for g in T:
        images = [action.act(g, x) for x in X]
        if set(images) != point_set or len(images) != len(point_set):
            raise DomainError(f"element {g!r} does not act bijectively")
    for x in X:
        counts = Counter(action.act(g, x) for g in T)
        for y in X:
            c = counts.get(y, 0)
            if len(X) * c != len(T):
                return UniformityVerdict(False, (x, y, c))
    return UniformityVerdict(True)


def unrank_permutation(rank: int, n: int) -> tuple:
    pool = list(range(1, n + 1))
    out = []
    for i in range(n, 0, -1):
        idx, rank = divmod(rank, math.factorial(i - 1))
        out.append(pool.pop(idx))
    return tuple(out)


def build_perm_spanning_instance(n: int, t: int,
                                 budget: int = DEFAULT_BUDGET) -> Instance:
    """``B = S_n`` with the spanning set ``f_(i, j)``; verification only."""
    if not 1 <= t <= n:
        raise DomainError("need 1 <= t <= n")
    falling = math.perm(n, t)
    if math.factorial(n) > budget or falling * falling > budget:
        raise BudgetExceeded(f"S_{n} with t={t} exceeds budget {budget}")
    tuples = list(itertools.permutations(range(1, n + 1), t))
    index = tuple((i, j) for i in tuples for j in tuples)
    consts = FrameworkConstants(m=1, c0=falling, c1_sq=falling)

    @lru_cache(maxsize=1 << 16)
    def phi(pi):
        return tuple(int(all(pi[s - 1] == r for s, r in zip(i, j)))
                     for i, j in index)

    def contains(pi):
        return (isinstance(pi, tuple) and len(pi) == n
                and sorted(pi) == list(range(1, n + 1)))

    first = tuples[0]
    return Instance(
        family="perm", params={"n": n, "t": t}, size=math.factorial(n),
        index=index, elements_fn=lambda: itertools.permutations(range(1, n + 1)),
        phi_fn=phi, contains_fn=contains, constants=consts,
        constant_combination={(first, j): Fraction(1) for j in tuples},
        element_at_fn=lambda r: unrank_permutation(r, n),
        phi_total_fn=lambda: (math.factorial(n - t),) * len(index),
        isolation_fn=None, verification_only=True, is_basis=False,
        budget=budget,
    )


def perm_symmetry_witness(n: int, t: int, g) -> SymmetryWitness:
    """Right translation ``sigma -> sigma o g`` on the spanning instance.

    ``f_(i, j)(sigma o g) = f_(g(i), j)(sigma)``, so ``tau`` permutes the
    spanning functions.
    """
    g = parse_perm(g, n)
    tuples = list(itertools.permutations(range(1, n + 1), t))
    index = [(i, j) for i in tuples for j in tuples]
    pos = {a: k for k, a in enumerate(index)}
    rows = []
    for i, j in index:
        row = [0] * len(index)
        row[pos[(tuple(g[s - 1] for s in i), j)]] = 1
        rows.append(tuple(row))
    return SymmetryWitness(lambda sigma: compose(sigma, g), tuple(rows))
