"""Monte Carlo model of the events "h has 1 as an eigenvalue" across primes.

One uniform element is drawn per prime per trial, independently across
primes (product-uniform sampling over the finite image groups stands in for
Haar measure on the Galois group). Streams are keyed by (seed, ell, block),
so any prime's draws can be regenerated alone and worker count never changes
the result.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from .errors import DomainError, UnknownPrime
from .ff import batch_eigen1
from .groups import Target, count_eigen1, sample_batch, target_order
from .rng import stream

TRIAL_BLOCK = 1 << 16
CHI2_LEVEL = 0.999
MODEL_NOTE = "product-uniform sampling over per-prime image groups"


@dataclass(frozen=True)
class EventModel:
    ell: int
    target: Target
    p_exact: Fraction

    def __post_init__(self):
        if not 0 <= self.p_exact <= 1:
            raise DomainError("probability outside [0, 1]")


def exact_event_prob(target: Target, method: str = "auto", budget=None) -> Fraction:
    return Fraction(count_eigen1(target, method, budget), target_order(target))


def event_model(target: Target, method: str = "auto", budget=None) -> EventModel:
    return EventModel(target.ell, target, exact_event_prob(target, method, budget))


def sample_events(model: EventModel, trials: int, seed: int) -> np.ndarray:
    """Event bits for trials 0..trials-1 of one prime."""
    out = np.empty(trials, dtype=bool)
    for b, start in enumerate(range(0, trials, TRIAL_BLOCK)):
        k = min(TRIAL_BLOCK, trials - start)
        rng = stream(seed, model.ell, b)
        out[start : start + k] = batch_eigen1(sample_batch(model.target, rng, k), model.ell)
    return out


def _sample_events_args(args):
    return sample_events(*args)


@dataclass
class TrialReport:
    seed: int
    trials: int
    primes: list[int]
    p_exact: list[Fraction]
    event_counts: list[int]
    success_counts: list[int]
    pair_counts: list[list[int]] = field(repr=False)
    expected_sum: Fraction = Fraction(0)
    harmonic_sum: Fraction = Fraction(0)

    @property
    def per_ell(self) -> list[tuple[int, Fraction, float]]:
        return [
            (ell, p, c / self.trials)
            for ell, p, c in zip(self.primes, self.p_exact, self.event_counts)
        ]

    def mean_successes(self) -> float:
        return sum(k * n for k, n in enumerate(self.success_counts)) / self.trials

    def to_dict(self) -> dict:
        return {
            "model": MODEL_NOTE,
            "seed": self.seed,
            "trials": self.trials,
            "per_ell": [
                {"ell": ell, "p_exact": str(p), "events": c, "empirical_freq": c / self.trials}
                for ell, p, c in zip(self.primes, self.p_exact, self.event_counts)
            ],
            "success_counts": self.success_counts,
            "expected_sum": str(self.expected_sum),
            "harmonic_sum": str(self.harmonic_sum),
            "pair_counts": self.pair_counts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def csv_rows(self) -> list[list]:
        return [[ell, str(p), c / self.trials] for ell, p, c in zip(self.primes, self.p_exact, self.event_counts)]


def run_bc_trials(models: Sequence[EventModel], trials: int, seed: int, jobs: int = 1) -> TrialReport:
    if trials < 1:
        raise DomainError("trials must be >= 1")
    models = sorted(models, key=lambda m: m.ell)
    if len({m.ell for m in models}) != len(models):
        raise DomainError("one event model per prime")
    args = [(m, trials, seed) for m in models]
    if jobs > 1 and len(models) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sample_events_args, args))
    else:
        rows = [sample_events(*a) for a in args]
    E = np.array(rows, dtype=bool).reshape(len(models), trials)
    Ef = E.astype(np.float64)
    pair = np.rint(Ef @ Ef.T).astype(np.int64)
    hist = np.bincount(E.sum(axis=0), minlength=len(models) + 1)
    return TrialReport(
        seed=seed,
        trials=trials,
        primes=[m.ell for m in models],
        p_exact=[m.p_exact for m in models],
        event_counts=[int(c) for c in E.sum(axis=1)],
        success_counts=[int(c) for c in hist],
        pair_counts=pair.tolist(),
        expected_sum=sum((m.p_exact for m in models), Fraction(0)),
        harmonic_sum=sum((Fraction(1, m.ell) for m in models), Fraction(0)),
    )


@dataclass
class ChiSquareResult:
    statistic: float | None
    degenerate: bool
    threshold: float
    passes: bool | None


def chi_square_threshold(level: float = CHI2_LEVEL) -> float:
    return float(chi2.ppf(level, 1))


def chi_square_2x2(joint: int, count1: int, count2: int, total: int, level: float = CHI2_LEVEL) -> ChiSquareResult:
    """Pearson statistic of a 2x2 table given the joint and marginal counts."""
    threshold = chi_square_threshold(level)
    n11 = joint
    n10 = count1 - joint
    n01 = count2 - joint
    n00 = total - count1 - count2 + joint
    denom = count1 * (total - count1) * count2 * (total - count2)
    if denom == 0:
        return ChiSquareResult(None, True, threshold, None)
    stat = total * (n11 * n00 - n10 * n01) ** 2 / denom
    return ChiSquareResult(stat, False, threshold, stat < threshold)


def chi_square_events(e1: np.ndarray, e2: np.ndarray, level: float = CHI2_LEVEL) -> ChiSquareResult:
    e1, e2 = np.asarray(e1, bool), np.asarray(e2, bool)
    return chi_square_2x2(int((e1 & e2).sum()), int(e1.sum()), int(e2.sum()), len(e1), level)


def independence_chi_square(report: TrialReport, pair: tuple[int, int], level: float = CHI2_LEVEL) -> ChiSquareResult:
    try:
        i, j = report.primes.index(pair[0]), report.primes.index(pair[1])
    except ValueError:
        raise UnknownPrime(f"{pair} not among simulated primes") from None
    return chi_square_2x2(
        report.pair_counts[i][j], report.event_counts[i], report.event_counts[j], report.trials, level
    )


def all_pair_chi_square(report: TrialReport, level: float = CHI2_LEVEL) -> list[tuple[tuple[int, int], ChiSquareResult]]:
    out = []
    for i, a in enumerate(report.primes):
        for b in report.primes[i + 1 :]:
            out.append(((a, b), independence_chi_square(report, (a, b), level)))
    return out


@dataclass
class ProfilePoint:
    ell: int
    prob_sum: Fraction
    harmonic_sum: Fraction


def divergence_profile(models: Sequence[EventModel]) -> list[ProfilePoint]:
    """Partial sums of p_exact and of 1/ell, in increasing ell."""
    out = []
    ps, hs = Fraction(0), Fraction(0)
    for m in sorted(models, key=lambda m: m.ell):
        ps += m.p_exact
        hs += Fraction(1, m.ell)
        out.append(ProfilePoint(m.ell, ps, hs))
    return out


def binomial_z(count: int, trials: int, p: Fraction) -> float:
    """(count - trials p) / sqrt(trials p (1 - p)); 0 for a degenerate p."""
    var = trials * float(p) * (1 - float(p))
    if var == 0:
        return 0.0 if count == trials * p else math.inf
    return (count - trials * float(p)) / math.sqrt(var)
