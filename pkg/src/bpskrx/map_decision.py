"""Maximum-a-posteriori decisions between two Poisson-count hypotheses.

Posteriors, the correct-decision probability of the optimal count rule, and
the equivalent threshold form: with rates r1 > r0 the likelihood ratio is
monotone in the count, so the MAP rule is "decide the high-rate hypothesis
iff n >= n_th" with n_th the ceiling of the logarithmic mean of the rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import (
    IDEAL_DETECTOR,
    DetectorModel,
    _check_rate,
    pnr_outcome_pmf,
    pnr_outcome_vector,
)


@dataclass(frozen=True)
class BinaryHypothesis:
    """One branch of a binary discrimination problem."""

    label: int
    count_rate: float
    prior: float = 0.5

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        _check_rate(self.count_rate, "count_rate")
        if not 0.0 <= self.prior <= 1.0:
            raise ValueError(f"prior must be in [0, 1], got {self.prior}")


@dataclass(frozen=True)
class ThresholdRule:
    """Count rule: decide ``high_label`` iff the outcome n >= n_th.

    ``degenerate`` flags exact-nulling inputs (zero or equal rates) where
    the ceiling formula is undefined and the on-off convention n_th = 1 is
    returned instead.
    """

    n_th: int
    high_label: int = 1
    degenerate: bool = False

    def __post_init__(self):
        if self.n_th < 1:
            raise ValueError(f"n_th must be >= 1, got {self.n_th}")

    def decide(self, n: int) -> int:
        if n >= self.n_th:
            return self.high_label
        return 1 - self.high_label


def _check_pair(hyp0: BinaryHypothesis, hyp1: BinaryHypothesis) -> None:
    if abs(hyp0.prior + hyp1.prior - 1.0) > 1e-12:
        raise ValueError("priors must sum to 1")


def posterior(
    n: int,
    hyp0: BinaryHypothesis,
    hyp1: BinaryHypothesis,
    detector: DetectorModel = IDEAL_DETECTOR,
) -> tuple[float, float]:
    """Bayes posteriors (p(hyp0|n), p(hyp1|n)) for an observed count n."""
    _check_pair(hyp0, hyp1)
    w0 = hyp0.prior * pnr_outcome_pmf(n, hyp0.count_rate, detector.resolution)
    w1 = hyp1.prior * pnr_outcome_pmf(n, hyp1.count_rate, detector.resolution)
    total = w0 + w1
    if total == 0.0:
        raise ValueError(f"outcome {n} has zero probability under both hypotheses")
    return w0 / total, w1 / total


def correct_probability(
    hyp0: BinaryHypothesis,
    hyp1: BinaryHypothesis,
    detector: DetectorModel = IDEAL_DETECTOR,
) -> float:
    """Success probability of the MAP count decision: sum_n max of the
    prior-weighted likelihoods."""
    _check_pair(hyp0, hyp1)
    p0 = hyp0.prior * pnr_outcome_vector(hyp0.count_rate, detector.resolution)
    p1 = hyp1.prior * pnr_outcome_vector(hyp1.count_rate, detector.resolution)
    overlap = min(p0.size, p1.size)
    terms = [max(a, b) for a, b in zip(p0[:overlap], p1[:overlap])]
    terms.extend(p0[overlap:])
    terms.extend(p1[overlap:])
    return math.fsum(terms)


def map_error_probability(
    hyp0: BinaryHypothesis,
    hyp1: BinaryHypothesis,
    detector: DetectorModel = IDEAL_DETECTOR,
) -> float:
    """Error probability of the MAP count decision.

    Summed termwise as min of the prior-weighted likelihoods, which equals
    1 - correct_probability without the cancellation of subtracting two
    near-unit numbers, and is term-for-term identical to the threshold-rule
    error whenever the likelihood ratio is monotone.
    """
    _check_pair(hyp0, hyp1)
    p0 = hyp0.prior * pnr_outcome_vector(hyp0.count_rate, detector.resolution)
    p1 = hyp1.prior * pnr_outcome_vector(hyp1.count_rate, detector.resolution)
    overlap = min(p0.size, p1.size)
    return math.fsum(min(a, b) for a, b in zip(p0[:overlap], p1[:overlap]))


def threshold_from_rates(
    low_rate: float,
    high_rate: float,
    resolution: int | None,
    log_prior_ratio: float = 0.0,
) -> ThresholdRule:
    """MAP threshold for Poissonian counts at rates low_rate < high_rate.

    ``log_prior_ratio`` is ln(prior_low / prior_high); zero for equal
    priors. Exact nulling (low_rate == 0) degenerates to the on-off rule
    n_th = 1: the low-rate branch never clicks, so any click decides high.
    """
    low_rate = _check_rate(low_rate, "low_rate")
    high_rate = _check_rate(high_rate, "high_rate")
    if high_rate <= low_rate:
        raise ValueError("high_rate must exceed low_rate")
    if low_rate == 0.0:
        return ThresholdRule(n_th=1, degenerate=True)
    raw = (high_rate - low_rate + log_prior_ratio) / math.log(high_rate / low_rate)
    n_th = max(1, math.ceil(raw))
    if resolution is not None:
        n_th = min(n_th, int(resolution))
    return ThresholdRule(n_th=n_th)


def threshold_dark(alpha: float, nu: float, resolution: int | None) -> ThresholdRule:
    """Count threshold against dark counts for a nulling receiver.

    Rates are nu (nulled branch) versus 4 alpha^2 + nu, giving
    n_th = min(ceil(4 alpha^2 / ln(1 + 4 alpha^2 / nu)), M). nu = 0 is the
    exact-nulling degeneracy and returns the on-off rule.
    """
    _check_rate(nu, "nu")
    energy = 4.0 * alpha * alpha
    if nu == 0.0 or energy == 0.0:
        return ThresholdRule(n_th=1, degenerate=True)
    n_th = math.ceil(energy / math.log1p(energy / nu))
    if resolution is not None:
        n_th = min(n_th, int(resolution))
    return ThresholdRule(n_th=max(1, n_th))


def threshold_visibility(alpha: float, xi: float, resolution: int | None) -> ThresholdRule:
    """Count threshold for an imperfect-interference nulling receiver.

    Rates are 2 alpha^2 (1 -+ xi), giving
    n_th = min(ceil(4 xi alpha^2 / (ln(1 + xi) - ln(1 - xi))), M). xi = 1 is
    exact nulling and returns the on-off rule.
    """
    if not 0.0 < xi <= 1.0:
        raise ValueError(f"visibility must be in (0, 1], got {xi}")
    if xi == 1.0 or alpha == 0.0:
        return ThresholdRule(n_th=1, degenerate=True)
    raw = 4.0 * xi * alpha * alpha / (math.log(1.0 + xi) - math.log(1.0 - xi))
    n_th = math.ceil(raw)
    if resolution is not None:
        n_th = min(n_th, int(resolution))
    return ThresholdRule(n_th=max(1, n_th))


def threshold_general(alpha: float, beta: float) -> ThresholdRule:
    """Count threshold for displacing +-alpha by beta before counting.

    The displaced rates are |alpha +- beta|^2 and
    n_th = ceil((|a+b|^2 - |a-b|^2) / (ln|a+b|^2 - ln|a-b|^2)). Exact
    nulling (beta = alpha) and zero displacement (beta = 0, symmetric
    rates) are degenerate and return the on-off convention.
    """
    r_low = (alpha - beta) ** 2
    r_high = (alpha + beta) ** 2
    if r_low == 0.0 or r_high == r_low:
        return ThresholdRule(n_th=1, degenerate=True)
    raw = (r_high - r_low) / (math.log(r_high) - math.log(r_low))
    return ThresholdRule(n_th=max(1, math.ceil(raw)))


def threshold_error_probability(
    hyp0: BinaryHypothesis,
    hyp1: BinaryHypothesis,
    rule: ThresholdRule,
    detector: DetectorModel = IDEAL_DETECTOR,
) -> float:
    """Error probability of an explicit threshold rule.

    Accumulated term-for-term in the same order as
    :func:`map_error_probability`, so a MAP-consistent rule reproduces that
    value exactly (bitwise), not merely approximately.
    """
    _check_pair(hyp0, hyp1)
    p0 = hyp0.prior * pnr_outcome_vector(hyp0.count_rate, detector.resolution)
    p1 = hyp1.prior * pnr_outcome_vector(hyp1.count_rate, detector.resolution)
    low_hyp, high_hyp = (p0, p1) if rule.high_label == 1 else (p1, p0)
    overlap = min(p0.size, p1.size)
    terms = []
    for n in range(overlap):
        # deciding high for n >= n_th loses the low-hypothesis mass there
        terms.append(low_hyp[n] if n >= rule.n_th else high_hyp[n])
    return math.fsum(terms)
