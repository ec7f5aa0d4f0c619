"""Framework-level types and exact checkers.

An :class:`Instance` packages a finite ground set ``B`` together with an
integer-valued map ``phi: B -> Z^A``.  Everything in this module works on
arbitrary instances; the family modules (:mod:`rigidgen.oa`,
:mod:`rigidgen.design`, :mod:`rigidgen.perm`) only build instances and
family-specific witnesses.

All comparisons are exact.  Ratios such as ``|T| / |B|`` are never formed at
a comparison site; both sides are cross-multiplied instead.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

DEFAULT_BUDGET = 10**7

ElementKey = Hashable
PhiVector = tuple  # tuple[int, ...], indexed like Instance.index


class RigidgenError(Exception):
    """Base class for errors raised by this package."""


class BudgetExceeded(RigidgenError):
    """An exhaustive operation would touch more elements than allowed."""


class DomainError(RigidgenError, ValueError):
    """An argument lies outside the instance or the operation's domain."""


class DivisibilityError(DomainError):
    """The requested size ``N`` cannot give an integral expected vector."""


class UnsupportedFeatureError(RigidgenError, NotImplementedError):
    """The instance does not provide the requested capability."""


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def ceil_fraction(x: Fraction | int) -> int:
    x = Fraction(x)
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class FrameworkConstants:
    """The constants ``m, c0, c1, c2, c3`` of the existence theorem.

    ``c1`` and ``c3`` enter every check squared, so they are stored through
    their exact squares.  ``c2`` and ``c3_sq`` may be ``None`` for
    verification-only instances that have no isolation families.
    """

    m: int
    c0: int
    c1_sq: Fraction
    c2: Fraction | None = None
    c3_sq: Fraction | None = None

    def __post_init__(self):
        if self.m < 1 or self.c0 < 1:
            raise ValueError("m and c0 must be positive integers")
        object.__setattr__(self, "c1_sq", Fraction(self.c1_sq))
        if self.c1_sq <= 0:
            raise ValueError("c1 must be positive")
        if self.c2 is not None:
            object.__setattr__(self, "c2", Fraction(self.c2))
        if self.c3_sq is not None:
            object.__setattr__(self, "c3_sq", Fraction(self.c3_sq))

    @classmethod
    def from_reals(cls, m, c0, c1, c2=None, c3=None):
        return cls(m, c0, Fraction(c1) ** 2, c2,
                   None if c3 is None else Fraction(c3) ** 2)

    @property
    def c1(self) -> float:
        return math.sqrt(self.c1_sq)

    @property
    def c3(self) -> float | None:
        return None if self.c3_sq is None else math.sqrt(self.c3_sq)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "c0": self.c0,
            "c1": self.c1,
            "c1_squared": str(self.c1_sq),
            "c2": None if self.c2 is None else str(self.c2),
            "c3": self.c3,
            "c3_squared": None if self.c3_sq is None else str(self.c3_sq),
        }


@dataclass(eq=False)
class Instance:
    """A ground set ``B`` with its integer map ``phi`` and theorem constants.

    ``index`` lists the basis index set ``A`` in canonical order; PhiVectors
    are tuples aligned with it.  ``elements`` must yield ``B`` in canonical
    order without materializing it.  ``constant_combination`` maps basis
    indices to rational coefficients whose combination is identically 1 on B.
    """

    family: str
    params: Any
    size: int
    index: tuple
    elements_fn: Callable[[], Iterator[ElementKey]] = field(repr=False)
    phi_fn: Callable[[ElementKey], PhiVector] = field(repr=False)
    contains_fn: Callable[[ElementKey], bool] = field(repr=False)
    constants: FrameworkConstants
    constant_combination: dict
    element_at_fn: Callable[[int], ElementKey] | None = field(default=None, repr=False)
    phi_total_fn: Callable[[], PhiVector] | None = field(default=None, repr=False)
    isolation_fn: Callable[..., Any] | None = field(default=None, repr=False)
    verification_only: bool = False
    is_basis: bool = True
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if len(self.index) < 1:
            raise ValueError("index set A must be nonempty")
        self._position = {a: i for i, a in enumerate(self.index)}

    @property
    def dim(self) -> int:
        return len(self.index)

    def position(self, a) -> int:
        try:
            return self._position[a]
        except KeyError:
            raise DomainError(f"unknown basis index {a!r}") from None

    def contains(self, b) -> bool:
        try:
            return bool(self.contains_fn(b))
        except (TypeError, ValueError):
            return False

    def require(self, b) -> None:
        if not self.contains(b):
            raise DomainError(f"element {b!r} is not in the ground set")

    def phi(self, b) -> PhiVector:
        return self.phi_fn(b)

    def elements(self, budget: int | None = None) -> Iterator[ElementKey]:
        """Stream the ground set, refusing up front if it exceeds the budget."""
        limit = self.budget if budget is None else budget
        if self.size > limit:
            raise BudgetExceeded(
                f"|B| = {self.size} exceeds the enumeration budget {limit}")
        return self.elements_fn()

    def element_at(self, i: int) -> ElementKey:
        if not 0 <= i < self.size:
            raise DomainError(f"element rank {i} out of range")
        if self.element_at_fn is None:
            for j, b in enumerate(self.elements()):
                if j == i:
                    return b
        return self.element_at_fn(i)

    @cached_property
    def phi_total(self) -> PhiVector:
        """phi(B), from the family's closed form when one is supplied."""
        if self.phi_total_fn is not None:
            return tuple(self.phi_total_fn())
        return phi_sum(self, self.elements())

    def isolation_family(self, a, **kwargs):
        if self.isolation_fn is None:
            raise UnsupportedFeatureError(
                f"{self.family} instance provides no isolation families")
        return self.isolation_fn(a, **kwargs)

    def summary(self) -> dict:
        return {
            "family": self.family,
            "params": _jsonable(self.params),
            "ground_set_size": self.size,
            "basis_size": self.dim,
            "is_basis": self.is_basis,
            "verification_only": self.verification_only,
            "constants": self.constants.as_dict(),
        }


def _jsonable(params):
    if hasattr(params, "as_dict"):
        return params.as_dict()
    if hasattr(params, "__dataclass_fields__"):
        return {k: getattr(params, k) for k in params.__dataclass_fields__}
    return params


class SparseDomainVector:
    """A finitely supported integer vector over ``B`` (an element of Z^B).

    Zero coefficients are never stored, so ``support()`` is exactly the key
    set.
    """

    __slots__ = ("_data",)

    def __init__(self, data: dict | Iterable | None = None):
        self._data = {}
        if data is None:
            return
        items = data.items() if isinstance(data, dict) else data
        for key, coef in items:
            self.add(key, coef)

    @classmethod
    def unit(cls, key, coef: int = 1) -> "SparseDomainVector":
        return cls({key: coef})

    def add(self, key, coef: int) -> None:
        if isinstance(coef, bool) or int(coef) != coef:
            raise TypeError(f"coefficients must be integers, got {coef!r}")
        value = self._data.get(key, 0) + int(coef)
        if value:
            self._data[key] = value
        else:
            self._data.pop(key, None)

    def __getitem__(self, key) -> int:
        return self._data.get(key, 0)

    def __iter__(self):
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def items(self):
        return self._data.items()

    def support(self) -> frozenset:
        return frozenset(self._data)

    def norm_sq(self) -> int:
        return sum(c * c for c in self._data.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def __add__(self, other: "SparseDomainVector") -> "SparseDomainVector":
        out = SparseDomainVector(self._data)
        for key, coef in other.items():
            out.add(key, coef)
        return out

    def __neg__(self) -> "SparseDomainVector":
        return SparseDomainVector({k: -c for k, c in self._data.items()})

    def __sub__(self, other: "SparseDomainVector") -> "SparseDomainVector":
        return self + (-other)

    def __mul__(self, scalar: int) -> "SparseDomainVector":
        return SparseDomainVector({k: c * scalar for k, c in self._data.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseDomainVector):
            return NotImplemented
        return self._data == other._data

    def as_dict(self) -> dict:
        return dict(self._data)

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {c}" for k, c in sorted(self._data.items()))
        return f"SparseDomainVector({{{body}}})"


@dataclass(frozen=True)
class SymmetryWitness:
    """A pair ``(pi, tau)`` with ``phi(pi(b)) = tau @ phi(b)``.

    ``tau`` is a square matrix of exact rationals (rows indexed like A).
    """

    pi: Callable[[ElementKey], ElementKey]
    tau: tuple

    @classmethod
    def identity(cls, instance: Instance) -> "SymmetryWitness":
        d = instance.dim
        tau = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
        return cls(lambda b: b, tau)

    def apply_tau(self, vec: Sequence) -> tuple:
        return tuple(sum(Fraction(c) * x for c, x in zip(row, vec) if c)
                     for row in self.tau)


@dataclass
class IsolationFamily:
    """Disjoint-support vectors each mapping to ``modulus * e_target``."""

    target: Any
    modulus: int
    vectors: list
    complete: bool = True

    @property
    def count(self) -> int:
        return len(self.vectors)

    @property
    def max_norm_sq(self) -> int:
        return max((g.norm_sq() for g in self.vectors), default=0)

    @property
    def max_norm(self) -> float:
        return math.sqrt(self.max_norm_sq)


def phi_sum(instance: Instance, subset: Iterable) -> PhiVector:
    """Exact coordinatewise sum of ``phi`` over ``subset`` (sets or multisets)."""
    total = [0] * instance.dim
    for b in subset:
        instance.require(b)
        for i, x in enumerate(instance.phi(b)):
            if x:
                total[i] += x
    return tuple(total)


def phi_of(instance: Instance, gamma: SparseDomainVector) -> PhiVector:
    """Linear extension of ``phi`` to Z^B."""
    total = [0] * instance.dim
    for b, coef in gamma.items():
        instance.require(b)
        for i, x in enumerate(instance.phi(b)):
            if x:
                total[i] += coef * x
    return tuple(total)


def unit_vector(instance: Instance, a, scale: int = 1) -> PhiVector:
    pos = instance.position(a)
    return tuple(scale if i == pos else 0 for i in range(instance.dim))


@dataclass(frozen=True)
class ExpectedVector:
    values: tuple
    integral: bool


def expected_vector(instance: Instance, N: int) -> ExpectedVector:
    """``E[X] = (N/|B|) phi(B)`` as exact rationals."""
    if not 1 <= N <= instance.size:
        raise DomainError(f"N = {N} outside 1..{instance.size}")
    vals = tuple(Fraction(N * x, instance.size) for x in instance.phi_total)
    return ExpectedVector(vals, all(v.denominator == 1 for v in vals))


@dataclass(frozen=True)
class DivisibilityReport:
    c0_star: int
    declared_c0: int
    consistent: bool


def check_divisibility(instance: Instance) -> DivisibilityReport:
    """Smallest ``c`` with ``(c/|B|) phi(B)`` integral, versus the declared c0."""
    size = instance.size
    c0_star = reduce(math.lcm,
                     (size // math.gcd(size, x) for x in instance.phi_total), 1)
    declared = instance.constants.c0
    return DivisibilityReport(c0_star, declared, declared % c0_star == 0)


@dataclass(frozen=True)
class BoundednessReport:
    max_norm_sq: int
    c1_sq: Fraction
    passed: bool
    argmax: Any

    @property
    def max_norm(self) -> float:
        return math.sqrt(self.max_norm_sq)


def check_boundedness(instance: Instance, budget: int | None = None) -> BoundednessReport:
    """Exhaustive ``max_b ||phi(b)||^2`` compared exactly with ``c1^2``."""
    best, arg = -1, None
    for b in instance.elements(budget):
        s = sum(x * x for x in instance.phi(b))
        if s > best:
            best, arg = s, b
    c1_sq = instance.constants.c1_sq
    return BoundednessReport(best, c1_sq, best <= c1_sq, arg)


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    checked: int
    first_violation: Any = None


def verify_symmetry(instance: Instance, witness: SymmetryWitness,
                    mode: str = "exhaustive", count: int = 100,
                    seed: int = 0) -> SymmetryReport:
    """Check ``phi(pi(b)) == tau phi(b)`` on all of B or on a seeded sample."""
    d = instance.dim
    if len(witness.tau) != d or any(len(row) != d for row in witness.tau):
        raise DomainError(f"tau must be {d}x{d}")
    if mode == "exhaustive":
        elements = instance.elements()
    elif mode == "sample":
        rng = random.Random(seed)
        elements = (instance.element_at(rng.randrange(instance.size))
                    for _ in range(count))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    checked = 0
    for b in elements:
        image = witness.pi(b)
        checked += 1
        if not instance.contains(image):
            return SymmetryReport(False, checked, {"element": b, "image": image,
                                                   "reason": "image outside B"})
        lhs = instance.phi(image)
        rhs = witness.apply_tau(instance.phi(b))
        if any(Fraction(x) != y for x, y in zip(lhs, rhs)):
            return SymmetryReport(False, checked, {"element": b, "image": image})
    return SymmetryReport(True, checked)


@dataclass(frozen=True)
class IsolationReport:
    targets_ok: bool
    disjoint_ok: bool
    norms_ok: bool
    count: int
    required_count: int | None
    max_norm_sq: int
    failures: tuple = ()

    @property
    def certified(self) -> bool:
        return self.targets_ok and self.disjoint_ok and self.norms_ok

    @property
    def count_ok(self) -> bool:
        return self.required_count is None or self.count >= self.required_count


def verify_isolation_family(instance: Instance, fam: IsolationFamily) -> IsolationReport:
    """Re-derive every isolation bullet from scratch; failures are reported."""
    target = unit_vector(instance, fam.target, fam.modulus)
    c3_sq = instance.constants.c3_sq
    failures = []
    targets_ok = disjoint_ok = norms_ok = True
    owner = {}
    for i, gamma in enumerate(fam.vectors):
        if phi_of(instance, gamma) != target:
            targets_ok = False
            failures.append(("target", i))
        if c3_sq is not None and gamma.norm_sq() > c3_sq:
            norms_ok = False
            failures.append(("norm", i))
        for b in gamma:
            if b in owner:
                disjoint_ok = False
                failures.append(("overlap", owner[b], i, b))
            else:
                owner[b] = i
    c2 = instance.constants.c2
    required = None if c2 is None else ceil_fraction(Fraction(instance.size) / c2)
    return IsolationReport(targets_ok, disjoint_ok, norms_ok, fam.count,
                           required, fam.max_norm_sq, tuple(failures))


@dataclass(frozen=True)
class SolutionCertificate:
    passed: bool
    size: int
    first_violation: Any = None


def verify_solution(instance: Instance, T: Iterable) -> SolutionCertificate:
    """Exact check of ``|B| phi(T)_a == |T| phi(B)_a`` for every basis index."""
    T = list(T)
    if not T:
        raise DomainError("T must be nonempty")
    if len(set(T)) != len(T):
        raise DomainError("T must not contain repeated elements")
    got = phi_sum(instance, T)
    size = instance.size
    for a, x, total in zip(instance.index, got, instance.phi_total):
        if size * x != len(T) * total:
            return SolutionCertificate(False, len(T), a)
    return SolutionCertificate(True, len(T))


@dataclass(frozen=True)
class NConstraints:
    """Admissible sizes ``N`` for the random construction.

    ``lower_scale`` and ``upper_scale`` stand in for the unspecified
    ``Omega(1)`` and ``O(1)`` factors and are echoed back for auditability.
    """

    divisor: int
    lower_bound: float
    upper_bound: float
    lower_scale: float
    upper_scale: float
    terms: dict
    smallest: int | None

    @property
    def empty(self) -> bool:
        return self.smallest is None


def admissible_N(instance: Instance, lower_scale: float = 1.0,
                 upper_scale: float = 1.0) -> NConstraints:
    consts = instance.constants
    A = instance.dim
    m, c0, c1 = consts.m, consts.c0, consts.c1
    divisor = c0 * m
    if consts.c2 is None or consts.c3_sq is None:
        terms = {"m^3": float(m**3)}
    else:
        c2 = float(consts.c2)
        c3 = math.sqrt(consts.c3_sq)
        log_term = math.log(A * m * c0 * c1 * c2 * c3)
        terms = {
            "m^3": float(m**3),
            "|A|^2 m^2 log^2": A**2 * m**2 * log_term**2,
            "|A|^6 c1^6 c2^3 c3^6 log^3":
                A**6 * c1**6 * c2**3 * c3**6 * log_term**3,
        }
    lower = lower_scale * max(terms.values())
    upper = upper_scale * math.sqrt(instance.size)
    first = max(divisor, ceil_div(math.ceil(lower), divisor) * divisor)
    smallest = first if first <= upper and first <= instance.size else None
    return NConstraints(divisor, lower, upper, lower_scale, upper_scale,
                        terms, smallest)


def isolation_family(instance: Instance, a, **kwargs) -> IsolationFamily:
    return instance.isolation_family(a, **kwargs)


def phi_matrix(instance: Instance, budget: int | None = None):
    """``|B| x |A|`` int64 array of phi rows in canonical element order."""
    import numpy as np

    rows = [instance.phi(b) for b in instance.elements(budget)]
    return np.array(rows, dtype=np.int64).reshape(len(rows), instance.dim)
