"""Random models for ``T`` and the search loop for ``X = E[X]``.

Randomness is organised so that results do not depend on how trials are
scheduled.  Trials are grouped into fixed-size blocks; block ``k`` draws from
its own Philox stream seeded by ``SeedSequence(seed, spawn_key=(k,))``, and
row ``i`` of the block is trial ``k * block + i``.  The reported success is
always the lowest-index successful trial.

Bernoulli inclusion with the rational probability ``p = N/|B|`` is decided
exactly against a 128-bit uniform integer: element kept iff
``u < floor(N * 2**128 / |B|)``.  The floor makes the effective probability
smaller than ``p`` by less than ``2**-128``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (DivisibilityError, DomainError, Instance, NConstraints,
                   SolutionCertificate, admissible_N, expected_vector,
                   phi_matrix, verify_solution)

MODELS = ("bernoulli-subset", "iid-multiset")
_BLOCK_CELLS = 1 << 20


@dataclass(frozen=True)
class SampleConfig:
    N: int
    seed: int = 0
    trials: int = 10**6
    model: str = "bernoulli-subset"
    threads: int = 1
    strict_divisibility: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown model {self.model!r}")
        if self.trials < 1 or self.N < 1:
            raise DomainError("N and trials must be positive")


def block_size(instance: Instance, model: str = "bernoulli-subset", N: int = 1) -> int:
    width = instance.size if model == "bernoulli-subset" else N
    return max(1, min(4096, _BLOCK_CELLS // max(1, width)))


def _generator(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _threshold(N: int, size: int) -> tuple[int, int]:
    thr = (N << 128) // size
    return thr >> 64, thr & ((1 << 64) - 1)


def _bernoulli_block(instance: Instance, N: int, seed: int, block: int,
                     rows: int) -> np.ndarray:
    """Boolean inclusion matrix of shape ``(rows, |B|)``."""
    size = instance.size
    if N >= size:
        return np.ones((rows, size), dtype=bool)
    # Row-major draws make row r independent of how many rows follow it.
    words = _generator(seed, block).integers(
        0, 2**64, size=(rows, size, 2), dtype=np.uint64, endpoint=False)
    hi, lo = words[..., 0], words[..., 1]
    th, tl = _threshold(N, size)
    th, tl = np.uint64(th), np.uint64(tl)
    return (hi < th) | ((hi == th) & (lo < tl))


def _multiset_block(instance: Instance, N: int, seed: int, block: int,
                    rows: int) -> np.ndarray:
    """Element ranks of shape ``(rows, N)``, drawn uniformly with replacement."""
    gen = _generator(seed, block)
    return gen.integers(0, instance.size, size=(rows, N))


def bernoulli_sample(instance: Instance, N: int, seed: int, trial: int = 0) -> set:
    """Trial ``trial`` of the Bernoulli(N/|B|) model under ``seed``."""
    if not 1 <= N <= instance.size:
        raise DomainError(f"N = {N} outside 1..{instance.size}")
    block, row = divmod(trial, block_size(instance))
    mask = _bernoulli_block(instance, N, seed, block, row + 1)[row]
    elements = list(instance.elements())
    return {elements[i] for i in np.flatnonzero(mask)}


def iid_multiset_sample(instance: Instance, N: int, seed: int, trial: int = 0) -> list:
    """``N`` uniform draws from ``B`` with replacement (sorted multiset)."""
    if N < 1:
        raise DomainError("N must be >= 1")
    block, row = divmod(trial, block_size(instance, "iid-multiset", N))
    ranks = _multiset_block(instance, N, seed, block, row + 1)[row]
    return sorted(instance.element_at(int(i)) for i in ranks)


@dataclass
class SearchResult:
    found: bool
    subset: list | None
    trial: int | None
    attempts: int
    seed: int
    N: int
    model: str
    elapsed: float
    certificate: SolutionCertificate | None
    window: NConstraints
    notes: list = field(default_factory=list)

    def telemetry(self) -> dict:
        return {"attempts": self.attempts, "seed": self.seed,
                "trial": self.trial, "model": self.model,
                "elapsed_s": self.elapsed}


def _target(instance: Instance, N: int) -> np.ndarray | None:
    ev = expected_vector(instance, N)
    if not ev.integral:
        return None
    return np.array([int(x) for x in ev.values], dtype=np.int64)


def _check_search_size(instance: Instance, cfg: SampleConfig) -> np.ndarray:
    if not 1 <= cfg.N <= instance.size:
        raise DomainError(f"N = {cfg.N} outside 1..{instance.size}")
    divisor = instance.constants.c0 * instance.constants.m
    if cfg.strict_divisibility and cfg.N % divisor:
        raise DivisibilityError(
            f"c0*m = {divisor} does not divide N = {cfg.N}")
    target = _target(instance, cfg.N)
    if target is None:
        raise DivisibilityError(f"E[X] is not integral for N = {cfg.N}")
    return target


def _block_hits(instance, cfg, Phi, target, block, rows):
    if cfg.model == "bernoulli-subset":
        mask = _bernoulli_block(instance, cfg.N, cfg.seed, block, rows)
        X = mask.astype(np.int64) @ Phi
    else:
        ranks = _multiset_block(instance, cfg.N, cfg.seed, block, rows)
        X = Phi[ranks].sum(axis=1)
        mask = ranks
    hits = np.flatnonzero((X == target).all(axis=1))
    return mask, hits


def _scan(instance: Instance, cfg: SampleConfig, Phi, target, stop_at_first: bool):
    """Yield ``(block, rows, mask, hits)`` in block order."""
    bs = block_size(instance, cfg.model, cfg.N)
    nblocks = math.ceil(cfg.trials / bs)
    threads = max(1, cfg.threads)

    def work(k):
        rows = min(bs, cfg.trials - k * bs)
        mask, hits = _block_hits(instance, cfg, Phi, target, k, rows)
        return k, rows, mask, hits

    if threads == 1:
        for k in range(nblocks):
            yield work(k)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, nblocks, threads):
            batch = list(pool.map(work, range(start, min(nblocks, start + threads))))
            yield from batch
            if stop_at_first and any(len(h) for _, _, _, h in batch):
                return


def search(instance: Instance, cfg: SampleConfig) -> SearchResult:
    """Sample until ``X = E[X]`` or the trial budget is spent."""
    target = _check_search_size(instance, cfg)
    window = admissible_N(instance)
    notes = []
    if window.empty or cfg.N < window.lower_bound or cfg.N > window.upper_bound:
        notes.append("N lies outside the theorem's admissible window "
                     f"[{window.lower_bound:.3g}, {window.upper_bound:.3g}]")
    Phi = phi_matrix(instance)
    elements = list(instance.elements())
    bs = block_size(instance, cfg.model, cfg.N)
    t0 = time.perf_counter()
    for k, rows, mask, hits in _scan(instance, cfg, Phi, target, True):
        if len(hits):
            row = int(hits[0])
            if cfg.model == "bernoulli-subset":
                subset = sorted(elements[i] for i in np.flatnonzero(mask[row]))
            else:
                subset = sorted(elements[int(i)] for i in mask[row])
            cert = None
            if len(set(subset)) == len(subset):
                cert = verify_solution(instance, subset)
                assert cert.passed, "sampler hit failed exact re-verification"
            else:
                notes.append("multiset hit contains repeated elements")
            trial = k * bs + row
            return SearchResult(True, subset, trial, trial + 1, cfg.seed, cfg.N,
                                cfg.model, time.perf_counter() - t0, cert,
                                window, notes)
    return SearchResult(False, None, None, cfg.trials, cfg.seed, cfg.N, cfg.model,
                        time.perf_counter() - t0, None, window, notes)


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int
    frequency: float
    interval: tuple[float, float]
    short_circuit: bool = False

    def contains(self, value: float) -> bool:
        return self.interval[0] <= value <= self.interval[1]


def wilson_interval(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint

    lo, hi = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def estimate_success_probability(instance: Instance, N: int, trials: int,
                                 seed: int = 0, model: str = "bernoulli-subset",
                                 threads: int = 1) -> Estimate:
    """Empirical ``Pr[X = E[X]]`` with a 95% Wilson interval."""
    if not 1 <= N <= instance.size:
        raise DomainError(f"N = {N} outside 1..{instance.size}")
    target = _target(instance, N)
    if target is None:
        return Estimate(0, trials, 0.0, (0.0, 0.0), short_circuit=True)
    cfg = SampleConfig(N=N, seed=seed, trials=trials, model=model,
                       threads=threads, strict_divisibility=False)
    Phi = phi_matrix(instance)
    successes = sum(len(h) for _, _, _, h in _scan(instance, cfg, Phi, target, False))
    return Estimate(successes, trials, successes / trials,
                    wilson_interval(successes, trials))
