"""Orthogonal arrays over the alphabet {1, ..., q}.

Ground set ``B = [q]^n`` (elements are tuples of 1-based symbols).  The basis
is indexed by pairs ``(I, v)`` with ``I`` a strictly increasing tuple of
1-based coordinates, ``|I| <= t``, and ``v`` a tuple of symbols in
``{1, ..., q-1}``; ``phi_(I,v)(x) = [x_i = v_i for i in I]``.  Symbol ``q`` is
the excluded one.

Canonical order of the basis index set is by ``(|I|, I, v)``, so the
constant function ``(I, v) = ((), ())`` comes first.

Restrictions ``x|_S`` used by the isolation vectors pad coordinates outside
``S`` with the excluded symbol ``q``.
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
class OAParams:
    q: int
    n: int
    t: int

    def __post_init__(self):
        if self.q < 2:
            raise DomainError("alphabet size q must be >= 2")
        if self.n < 1:
            raise DomainError("length n must be >= 1")
        if not 1 <= self.t <= self.n:
            raise DomainError("strength t must satisfy 1 <= t <= n")

    @property
    def ground_size(self) -> int:
        return self.q**self.n

    @property
    def basis_size(self) -> int:
        return sum(math.comb(self.n, i) * (self.q - 1)**i
                   for i in range(self.t + 1))

    def as_dict(self) -> dict:
        return {"q": self.q, "n": self.n, "t": self.t}


def parse_element(text: str | tuple, p: OAParams) -> tuple:
    """Accept ``"121"`` / ``"1 2 1"`` / ``(1, 2, 1)`` and validate."""
    if isinstance(text, str):
        parts = text.split() if " " in text.strip() else list(text.strip())
        x = tuple(int(s) for s in parts)
    else:
        x = tuple(int(s) for s in text)
    if len(x) != p.n or any(not 1 <= s <= p.q for s in x):
        raise DomainError(f"{text!r} is not a string in [{p.q}]^{p.n}")
    return x


def basis_indices(p: OAParams) -> tuple:
    out = []
    for size in range(p.t + 1):
        for I in itertools.combinations(range(1, p.n + 1), size):
            for v in itertools.product(range(1, p.q), repeat=size):
                out.append((I, v))
    return tuple(out)


def indicator(x: tuple, I: tuple, v: tuple) -> int:
    return int(all(x[i - 1] == s for i, s in zip(I, v)))


def _phi_factory(p: OAParams, index: tuple):
    @lru_cache(maxsize=1 << 16)
    def phi(x):
        return tuple(indicator(x, I, v) for I, v in index)
    return phi


def build_oa_instance(p: OAParams, budget: int = DEFAULT_BUDGET) -> Instance:
    """The orthogonal-array instance with its theorem constants."""
    if p.basis_size > budget or p.ground_size > budget:
        raise BudgetExceeded(f"OA{p.as_dict()} exceeds budget {budget}")
    index = basis_indices(p)
    q, n, t = p.q, p.n, p.t
    consts = FrameworkConstants(
        m=1,
        c0=q**t,
        c1_sq=(n + 1)**t,
        c2=q**t * n**(2 * t),
        c3_sq=2**(3 * t) * n**(2 * t),
    )

    def elements():
        return itertools.product(range(1, q + 1), repeat=n)

    def contains(x):
        return (isinstance(x, tuple) and len(x) == n
                and all(isinstance(s, int) and 1 <= s <= q for s in x))

    def element_at(i):
        digits = []
        for _ in range(n):
            i, r = divmod(i, q)
            digits.append(r + 1)
        return tuple(reversed(digits))

    def phi_total():
        return tuple(q**(n - len(I)) for I, _ in index)

    def isolation(a, budget=DEFAULT_BUDGET, seed=0):
        return oa_isolation_family(p, a, budget=budget, seed=seed)

    return Instance(
        family="oa", params=p, size=q**n, index=index,
        elements_fn=elements, phi_fn=_phi_factory(p, index),
        contains_fn=contains, constants=consts,
        constant_combination={((), ()): 1},
        element_at_fn=element_at, phi_total_fn=phi_total,
        isolation_fn=isolation, budget=budget,
    )


def _check_index_set(p: OAParams, I) -> tuple:
    I = tuple(I)
    if list(I) != sorted(set(I)) or any(not 1 <= i <= p.n for i in I):
        raise DomainError(f"{I!r} is not an increasing subset of [{p.n}]")
    if len(I) > p.t:
        raise DomainError(f"|I| = {len(I)} exceeds strength t = {p.t}")
    return I


def expand_indicator(p: OAParams, I, v, verify: int = 16, seed: int = 0) -> dict:
    """Integer coefficients of ``f_(I,v)`` (``v`` in ``[q]^I``) in the basis.

    Coordinates of ``v`` equal to ``q`` are peeled off one at a time with
    ``f_(I,v) = f_(I - i, v - v_i) - sum_{s < q} f_(I, v with v_i = s)``.
    The result is spot-checked pointwise on ``verify`` seeded elements.
    """
    I = _check_index_set(p, I)
    v = tuple(v)
    if len(v) != len(I) or any(not 1 <= s <= p.q for s in v):
        raise DomainError(f"values {v!r} do not match I = {I!r}")
    coeffs = dict(_expand(p.q, I, v))
    if verify:
        rng = random.Random(seed)
        for _ in range(verify):
            x = tuple(rng.randint(1, p.q) for _ in range(p.n))
            rhs = sum(c * indicator(x, J, w) for (J, w), c in coeffs.items())
            if rhs != indicator(x, I, v):
                raise AssertionError(f"expansion of {(I, v)} fails at {x}")
    return coeffs


@lru_cache(maxsize=None)
def _expand(q: int, I: tuple, v: tuple) -> tuple:
    try:
        pos = v.index(q)
    except ValueError:
        return (((I, v), 1),)
    acc = Counter()
    for key, c in _expand(q, I[:pos] + I[pos + 1:], v[:pos] + v[pos + 1:]):
        acc[key] += c
    for s in range(1, q):
        for key, c in _expand(q, I, v[:pos] + (s,) + v[pos + 1:]):
            acc[key] -= c
    return tuple(sorted((k, c) for k, c in acc.items() if c))


def _pad(x: tuple, keep, q: int) -> tuple:
    """``x|_keep`` as a full string: coordinates outside ``keep`` become q."""
    return tuple(s if i + 1 in keep else q for i, s in enumerate(x))


def oa_delta(p: OAParams, x, K) -> SparseDomainVector:
    """Signed sum of ``e_{x|_(J u K^c)}`` over ``J`` subset of ``K``."""
    x = parse_element(x, p)
    K = _check_index_set(p, K)
    rest = set(range(1, p.n + 1)) - set(K)
    out = SparseDomainVector()
    for size in range(len(K) + 1):
        for J in itertools.combinations(K, size):
            out.add(_pad(x, rest | set(J), p.q), (-1)**(len(K) - size))
    return out


def oa_gamma(p: OAParams, x, I) -> SparseDomainVector:
    """Isolation vector with ``phi(gamma) = e_(I, x|_I)``.

    Built by backward induction on ``|I|``: ``gamma_K = delta_K - sum of
    gamma_K'`` over strict supersets ``K'`` with ``|K'| <= t`` on which ``x``
    avoids the excluded symbol.
    """
    x = parse_element(x, p)
    I = _check_index_set(p, I)
    if any(x[i - 1] == p.q for i in I):
        raise DomainError(f"x restricted to {I} must avoid symbol {p.q}")
    free = [i for i in range(1, p.n + 1) if i not in I and x[i - 1] != p.q]
    chain = []
    for extra in range(p.t - len(I), -1, -1):
        for E in itertools.combinations(free, extra):
            chain.append(tuple(sorted(I + E)))
    gammas = {}
    for K in chain:  # largest sets first
        g = oa_delta(p, x, K)
        Kset = set(K)
        for K2, g2 in gammas.items():
            if len(K2) > len(K) and Kset.issubset(K2):
                g = g - g2
        gammas[K] = g
    return gammas[I]


def gamma_norm_bound_sq(p: OAParams, size_I: int) -> int:
    """Square of ``2^(t/2) (2n)^(t - |I|)``."""
    return 2**p.t * (2 * p.n)**(2 * (p.t - size_I))


def hamming(x: tuple, y: tuple) -> int:
    return sum(a != b for a, b in zip(x, y))


def oa_isolation_family(p: OAParams, a, budget: int = DEFAULT_BUDGET,
                        seed: int = 0) -> IsolationFamily:
    """Greedy family of disjoint isolation vectors for ``a = (I, v)``.

    Centers ``x`` with ``x|_I = v`` are scanned lexicographically starting at
    a seeded offset; a center is kept when its Hamming distance to every kept
    center is at least ``2t + 1``.
    """
    I, v = a
    I = _check_index_set(p, I)
    v = tuple(v)
    if len(v) != len(I) or any(not 1 <= s <= p.q - 1 for s in v):
        raise DomainError(f"{a!r} is not a basis index")
    free = [i for i in range(1, p.n + 1) if i not in I]
    total = p.q**len(free)
    start = random.Random(seed).randrange(total)
    centers, complete = [], True
    for step in range(total):
        if step >= budget:
            complete = False
            break
        r = (start + step) % total
        x = [0] * p.n
        for i, s in zip(I, v):
            x[i - 1] = s
        for i in reversed(free):
            r, d = divmod(r, p.q)
            x[i - 1] = d + 1
        x = tuple(x)
        if all(hamming(x, c) >= 2 * p.t + 1 for c in centers):
            centers.append(x)
    vectors = [oa_gamma(p, x, I) for x in centers]
    return IsolationFamily((I, v), 1, vectors, complete)


def lemma_count_bound(p: OAParams) -> int:
    """``ceil(q^(n-t) / n^(2t))``, the guaranteed greedy family size."""
    return ceil_div(p.q**(p.n - p.t), p.n**(2 * p.t))


@dataclass(frozen=True)
class OAVerdict:
    passed: bool
    rows: int
    first_violation: tuple | None = None  # (I, v, count, |T|/q^t)


def verify_oa(T, p: OAParams) -> OAVerdict:
    """Direct strength-t check: every t columns see every t-string equally."""
    rows = [parse_element(x, p) for x in T]
    if not rows:
        raise DomainError("an orthogonal array needs at least one row")
    N = len(rows)
    qt = p.q**p.t
    for I in itertools.combinations(range(p.n), p.t):
        counts = Counter(tuple(x[i] for i in I) for x in rows)
        for v in itertools.product(range(1, p.q + 1), repeat=p.t):
            c = counts.get(v, 0)
            if qt * c != N:
                return OAVerdict(False, N, (tuple(i + 1 for i in I), v, c,
                                            Fraction(N, qt)))
    return OAVerdict(True, N)


def _sym_add(s: int, x: int, q: int) -> int:
    r = (s + x) % q
    return r if r else q


def _sym_sub(s: int, x: int, q: int) -> int:
    r = (s - x) % q
    return r if r else q


def shift_between(p: OAParams, b1, b2) -> tuple:
    """The translation carrying ``b1`` to ``b2`` (symbol q is the zero)."""
    b1, b2 = parse_element(b1, p), parse_element(b2, p)
    return tuple(_sym_sub(y, x, p.q) for x, y in zip(b1, b2))


def oa_symmetry_witness(p: OAParams, shift) -> SymmetryWitness:
    """Translation ``b -> b + shift (mod q)`` and its induced map on the basis."""
    x = parse_element(shift, p)
    q = p.q
    index = basis_indices(p)
    pos = {a: i for i, a in enumerate(index)}

    def pi(b):
        return tuple(_sym_add(s, d, q) for s, d in zip(b, x))

    rows = []
    for I, v in index:
        w = tuple(_sym_sub(s, x[i - 1], q) for i, s in zip(I, v))
        row = [0] * len(index)
        for key, c in expand_indicator(p, I, w, verify=0).items():
            row[pos[key]] = c
        rows.append(tuple(row))
    return SymmetryWitness(pi, tuple(rows))

