import math

import numpy as np
import pytest

from rigidgen.core import DivisibilityError, DomainError, verify_solution
from rigidgen.design import DesignParams, build_design_instance, verify_design
from rigidgen.fourier import exact_point_probability
from rigidgen.oa import OAParams, build_oa_instance, verify_oa
from rigidgen.perm import build_perm_spanning_instance
from rigidgen.sampler import (SampleConfig, _bernoulli_block,
                              bernoulli_sample, block_size,
                              estimate_success_probability,
                              iid_multiset_sample, search, wilson_interval)


def test_bernoulli_sample_is_deterministic(oa231):
    assert bernoulli_sample(oa231, 4, seed=9) == bernoulli_sample(oa231, 4, seed=9)
    draws = {frozenset(bernoulli_sample(oa231, 4, seed=s)) for s in range(20)}
    assert len(draws) > 1


def test_full_probability_takes_everything(oa231):
    assert bernoulli_sample(oa231, 8, seed=3) == set(oa231.elements())


def test_rows_do_not_depend_on_block_length(oa231):
    short = _bernoulli_block(oa231, 4, 0, 0, 3)
    long = _bernoulli_block(oa231, 4, 0, 0, 50)
    assert (short == long[:3]).all()


def test_mean_size_matches_binomial(oa231):
    sizes = np.array([_bernoulli_block(oa231, 4, s, 0, 1)[0].sum()
                      for s in range(100_000)])
    sigma = math.sqrt(8 * 0.25 / 100_000)
    assert abs(sizes.mean() - 4) < 3 * sigma


def test_inclusion_probability_is_unbiased():
    inst = build_oa_instance(OAParams(3, 2, 1))  # p = 2/9, not dyadic
    mask = _bernoulli_block(inst, 2, 1, 0, 20_000)
    freq = mask.mean()
    sd = math.sqrt((2 / 9) * (7 / 9) / mask.size)
    assert abs(freq - 2 / 9) < 4 * sd


def test_iid_multiset(oa221):
    for N in (1, 2, 7):
        draw = iid_multiset_sample(oa221, N, seed=4)
        assert len(draw) == N and draw == sorted(draw)


def test_search_oa221(oa221):
    res = search(oa221, SampleConfig(N=2, seed=0, trials=1000))
    assert res.found
    assert sorted(res.subset) in ([(1, 1), (2, 2)], [(1, 2), (2, 1)])
    assert res.certificate.passed and len(res.subset) == 2
    assert res.attempts == res.trial + 1


def test_search_rejects_bad_N(oa221, d431):
    with pytest.raises(DivisibilityError):
        search(oa221, SampleConfig(N=3, trials=10))
    with pytest.raises(DivisibilityError):
        search(d431, SampleConfig(N=2, trials=10, strict_divisibility=False))
    with pytest.raises(DomainError):
        SampleConfig(N=2, model="bogus")


def test_search_is_thread_independent():
    inst = build_oa_instance(OAParams(2, 4, 2))
    one = search(inst, SampleConfig(N=8, seed=1, trials=200_000, threads=1))
    four = search(inst, SampleConfig(N=8, seed=1, trials=200_000, threads=4))
    assert one.found and (one.trial, one.subset) == (four.trial, four.subset)
    assert verify_oa(one.subset, OAParams(2, 4, 2)).passed


def test_search_result_is_trial_budget_independent():
    inst = build_oa_instance(OAParams(2, 4, 2))
    big = search(inst, SampleConfig(N=8, seed=2, trials=500_000))
    just = search(inst, SampleConfig(N=8, seed=2, trials=big.trial + 1))
    assert just.found and just.trial == big.trial


def test_exhausted_search_is_structured():
    inst = build_oa_instance(OAParams(2, 4, 2))
    res = search(inst, SampleConfig(N=8, seed=0, trials=5))
    assert not res.found and res.subset is None and res.attempts == 5


def test_design_search_smallest_multiple():
    p = DesignParams(6, 3, 1)
    inst = build_design_instance(p)
    res = search(inst, SampleConfig(N=18, seed=0, trials=10**5))
    assert res.found and verify_design(res.subset, p).passed


def test_estimate_oa221(oa221):
    est = estimate_success_probability(oa221, 2, 20_000, seed=0)
    assert est.contains(1 / 8)
    assert est.trials == 20_000 and 0 <= est.frequency <= 1


def test_estimate_short_circuits(d431):
    est = estimate_success_probability(d431, 2, 10)
    assert est.short_circuit and est.successes == 0 and est.frequency == 0


@pytest.mark.parametrize("inst,N", [
    (build_oa_instance(OAParams(2, 3, 1)), 4),
    (build_oa_instance(OAParams(2, 3, 1)), 2),
    (build_oa_instance(OAParams(3, 2, 1)), 3),
    (build_oa_instance(OAParams(2, 4, 1)), 8),
    (build_design_instance(DesignParams(5, 2, 1)), 5),
    (build_design_instance(DesignParams(6, 2, 1)), 6),
    (build_perm_spanning_instance(3, 1), 3),
])
def test_estimate_agrees_with_exact_oracle(inst, N):
    exact = float(exact_point_probability(inst, N, [N * x // inst.size
                                                    for x in inst.phi_total]))
    trials = 40_000
    est = estimate_success_probability(inst, N, trials, seed=5)
    sigma = math.sqrt(exact * (1 - exact) / trials)
    assert abs(est.frequency - exact) <= 3 * sigma + 1e-12


def test_estimate_is_reproducible(oa231):
    a = estimate_success_probability(oa231, 4, 10_000, seed=8, threads=1)
    b = estimate_success_probability(oa231, 4, 10_000, seed=8, threads=3)
    assert a == b


def test_models_side_by_side(oa221):
    bern = estimate_success_probability(oa221, 2, 20_000, seed=1)
    iid = estimate_success_probability(oa221, 2, 20_000, seed=1, model="iid-multiset")
    # Two iid draws hit E[X] iff they form {11,22} or {12,21} in either order.
    assert iid.contains(0.25) and bern.contains(0.125)


def test_wilson_interval_bounds():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    assert block_size(build_oa_instance(OAParams(2, 2, 1))) == 4096


def test_search_hits_are_re_verified(oa231):
    res = search(oa231, SampleConfig(N=4, seed=3, trials=10_000))
    assert res.found and verify_solution(oa231, res.subset).passed
