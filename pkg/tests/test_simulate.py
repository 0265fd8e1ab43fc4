from fractions import Fraction

import numpy as np
import pytest

from tdl.errors import DomainError, UnknownPrime
from tdl.ff import FpMatrix, primes_up_to
from tdl.groups import GroupModelSpec
from tdl.rng import stream
from tdl.simulate import (
    EventModel, binomial_z, chi_square_events, chi_square_threshold, divergence_profile,
    event_model, exact_event_prob, independence_chi_square, run_bc_trials, sample_events,
)


def trivial_model(ell):
    return event_model(GroupModelSpec.explicit([FpMatrix.identity(2, ell)], ell))


def test_exact_prob_examples():
    assert exact_event_prob(GroupModelSpec.gl(2, 2)) == Fraction(2, 3)
    assert exact_event_prob(GroupModelSpec.gl(2, 3)) == Fraction(7, 16)
    assert exact_event_prob(GroupModelSpec.explicit([FpMatrix.identity(2, 5)], 5)) == 1


@pytest.mark.parametrize("ell", primes_up_to(31))
def test_exact_prob_lower_bound(ell):
    spec = GroupModelSpec.gl(2, ell)
    p = exact_event_prob(spec)
    assert p >= Fraction(1, 2 * ell)
    if ell <= 7:
        assert p == exact_event_prob(spec, "scan")


def test_certain_events():
    rep = run_bc_trials([trivial_model(ell) for ell in (2, 3, 5)], 50, seed=1)
    assert rep.success_counts == [0, 0, 0, 50]


def test_zero_trials_rejected():
    with pytest.raises(DomainError):
        run_bc_trials([trivial_model(5)], 0, seed=1)


def test_frequencies_within_bands():
    models = [event_model(GroupModelSpec.gl(2, ell)) for ell in (7, 13, 19)]
    rep = run_bc_trials(models, 10**5, seed=12345)
    for ell, p, c in zip(rep.primes, rep.p_exact, rep.event_counts):
        assert abs(binomial_z(c, rep.trials, p)) <= 5, ell


def test_determinism_and_jobs():
    models = [event_model(GroupModelSpec.gl(2, ell)) for ell in (5, 7, 11)]
    a = run_bc_trials(models, 3000, seed=7).to_json()
    b = run_bc_trials(models, 3000, seed=7).to_json()
    c = run_bc_trials(list(reversed(models)), 3000, seed=7, jobs=2).to_json()
    assert a == b == c
    assert run_bc_trials(models, 3000, seed=8).to_json() != a
    assert "product-uniform" in a


def test_streams_are_per_prime():
    # one prime's events do not depend on which other primes are simulated
    m7 = event_model(GroupModelSpec.gl(2, 7))
    solo = run_bc_trials([m7], 2000, seed=3)
    both = run_bc_trials([m7, event_model(GroupModelSpec.gl(2, 11))], 2000, seed=3)
    assert solo.event_counts[0] == both.event_counts[0]
    assert np.array_equal(sample_events(m7, 2000, 3)[:100], sample_events(m7, 100, 3))


def test_report_consistency():
    models = [event_model(GroupModelSpec.gl(2, ell)) for ell in (3, 5, 7)]
    rep = run_bc_trials(models, 5000, seed=2)
    assert sum(rep.success_counts) == 5000
    assert [rep.pair_counts[i][i] for i in range(3)] == rep.event_counts
    assert sum(k * n for k, n in enumerate(rep.success_counts)) == sum(rep.event_counts)
    assert rep.harmonic_sum == Fraction(1, 3) + Fraction(1, 5) + Fraction(1, 7)


def test_chi_square_threshold():
    assert chi_square_threshold() == pytest.approx(10.8276, abs=1e-3)


def test_chi_square_independent_synthetic():
    passes = 0
    for seed in range(200):
        rng = stream(seed, 99)
        e1, e2 = rng.random(4000) < 0.5, rng.random(4000) < 0.3
        passes += chi_square_events(e1, e2).passes
    assert passes >= 198


def test_chi_square_correlated_synthetic():
    e = stream(1, 98).random(4000) < 0.5
    res = chi_square_events(e, e)
    assert res.statistic > res.threshold and not res.passes


def test_chi_square_degenerate_and_unknown():
    rep = run_bc_trials([trivial_model(3), event_model(GroupModelSpec.gl(2, 5))], 500, seed=4)
    res = independence_chi_square(rep, (3, 5))
    assert res.degenerate and res.statistic is None
    with pytest.raises(UnknownPrime):
        independence_chi_square(rep, (3, 7))


def test_divergence_profile_examples():
    prof = divergence_profile([trivial_model(ell) for ell in (5, 2, 3)])
    assert [p.ell for p in prof] == [2, 3, 5]
    assert prof[-1].harmonic_sum == Fraction(31, 30)
    assert prof[-1].prob_sum == 3
    assert divergence_profile([]) == []
    gl = divergence_profile([event_model(GroupModelSpec.gl(2, ell)) for ell in primes_up_to(31)])
    assert all(p.prob_sum >= p.harmonic_sum / 2 for p in gl)


def test_event_model_validation():
    with pytest.raises(DomainError):
        EventModel(5, GroupModelSpec.gl(2, 5), Fraction(3, 2))
