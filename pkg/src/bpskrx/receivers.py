"""Error probabilities of binary phase-shift-keyed coherent-state receivers.

The two signals carry amplitudes -alpha ("0") and +alpha ("1"). Implemented
discrimination strategies:

* quantum-optimal bound (minimum error probability of any measurement),
* ideal homodyne detection (the standard quantum limit),
* homodyne-like detection: balanced mixing with a weak local oscillator and
  PNR counting on both arms, deciding on the sign of the count difference,
* nulling displacement followed by on-off detection (``kennedy_error``),
* nulling displacement followed by PNR(M) counting with a MAP count
  threshold (``dpnrm_error``),
* the feed-forward hybrid: a splitter of transmissivity tau sends the
  reflected part to a homodyne-like stage whose outcome conditions the sign
  of the nulling displacement applied to the transmitted part before a
  final PNR stage (``hybrid_error``).

Detector imperfections (resolution M, efficiency eta, dark counts nu,
visibility xi) enter through the shared rate algebra of
:mod:`bpskrx.distributions`. All functions are pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy import special

from .distributions import (
    IDEAL_DETECTOR,
    DetectorModel,
    difference_sign_masses,
    homodyne_like_rates,
    pnr_outcome_vector,
    poisson_pmf,
)
from .map_decision import ThresholdRule, threshold_from_rates


@dataclass(frozen=True)
class SignalConfig:
    """Signal amplitude alpha, LO amplitude z, splitter transmissivity tau
    and the prior probabilities of the two symbols."""

    alpha: float
    z: float = 0.0
    tau: float = 1.0
    q0: float = 0.5
    q1: float = 0.5

    def __post_init__(self):
        if self.alpha < 0.0 or self.z < 0.0:
            raise ValueError("amplitudes must be >= 0")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if self.q0 < 0.0 or self.q1 < 0.0 or abs(self.q0 + self.q1 - 1.0) > 1e-12:
            raise ValueError("priors must be >= 0 and sum to 1")

    @property
    def alpha_sq(self) -> float:
        return self.alpha * self.alpha


@dataclass(frozen=True)
class ReceiverResult:
    """Error probability plus the decision parameters used to obtain it."""

    p_err: float
    tau_used: float | None = None
    n_th_used: int | None = None
    breakdown: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()


class NoiseCase(enum.Enum):
    """Which imperfection family drives a displacement-PNR receiver."""

    DARK_COUNTS = "dark_counts"
    VISIBILITY = "visibility"


def helstrom_bound(alpha: float, q0: float = 0.5, q1: float = 0.5) -> float:
    """Minimum discrimination error of any measurement on +-alpha."""
    if q0 < 0.0 or q1 < 0.0 or abs(q0 + q1 - 1.0) > 1e-12:
        raise ValueError("priors must be >= 0 and sum to 1")
    overlap_sq = math.exp(-4.0 * alpha * alpha)
    return 0.5 * (1.0 - math.sqrt(1.0 - 4.0 * q0 * q1 * overlap_sq))


def kennedy_error(alpha: float, eta: float = 1.0) -> float:
    """Error of nulling displacement + on-off detection: exp(-4 eta alpha^2)/2."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency must be in (0, 1], got {eta}")
    return 0.5 * math.exp(-4.0 * eta * alpha * alpha)


def homodyne_sql(alpha: float) -> float:
    """Error of ideal homodyne discrimination: erfc(sqrt(2) alpha) / 2."""
    return 0.5 * special.erfc(math.sqrt(2.0) * alpha)


def homodyne_like_error(
    alpha: float,
    z: float,
    detector: DetectorModel = IDEAL_DETECTOR,
    q0: float = 0.5,
    q1: float = 0.5,
) -> ReceiverResult:
    """Error of the standalone homodyne-like receiver.

    Decide "1" for a positive count difference, "0" for a negative one, and
    flip a fair coin on a tie. With a strong LO (z^2 >> alpha^2) this
    converges to the homodyne standard quantum limit.
    """
    if abs(q0 + q1 - 1.0) > 1e-12:
        raise ValueError("priors must sum to 1")
    mu_c_p, mu_d_p = homodyne_like_rates(alpha, z, detector.visibility)
    neg_p, zero_p, _ = difference_sign_masses(mu_c_p, mu_d_p, detector)
    mu_c_m, mu_d_m = homodyne_like_rates(-alpha, z, detector.visibility)
    _, zero_m, pos_m = difference_sign_masses(mu_c_m, mu_d_m, detector)
    err_given_1 = neg_p + 0.5 * zero_p
    err_given_0 = pos_m + 0.5 * zero_m
    return ReceiverResult(
        p_err=q0 * err_given_0 + q1 * err_given_1,
        breakdown={"err_given_0": err_given_0, "err_given_1": err_given_1},
    )


def hybrid_error_hd(alpha: float, tau: float) -> float:
    """Hybrid receiver error with a true homodyne front end (strong-LO limit):
    exp(-4 tau alpha^2)/2 * erfc(sqrt(2 (1 - tau)) alpha)."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    return 0.5 * math.exp(-4.0 * tau * alpha * alpha) * special.erfc(
        math.sqrt(2.0 * (1.0 - tau)) * alpha
    )


def _hybrid_final_stage(
    config: SignalConfig, detector: DetectorModel
) -> tuple[float, float, ThresholdRule | None]:
    """Final-stage count rates (nulled, anti-nulled) and MAP threshold.

    The transmitted amplitude sqrt(tau) alpha is displaced by +-sqrt(tau)
    alpha with visibility xi, so the two possible registered rates are
    eta * tau * 2 alpha^2 (1 -+ xi) + nu. The threshold is MAP for that
    actual rate pair (the transmitted branch carries the split energy
    tau alpha^2, not the full pulse energy). A ``None`` rule means the
    stage is uninformative (equal rates): the decision then rests on the
    count-difference sign alone.
    """
    a_sq = config.alpha_sq
    eta, nu, xi = detector.efficiency, detector.dark_rate, detector.visibility
    r_null = eta * config.tau * 2.0 * a_sq * (1.0 - xi) + nu
    r_anti = eta * config.tau * 2.0 * a_sq * (1.0 + xi) + nu
    if r_anti == r_null:
        return r_null, r_anti, None
    log_prior_ratio = 0.0
    if config.q0 != config.q1:
        log_prior_ratio = math.log(config.q0 / config.q1)
    rule = threshold_from_rates(r_null, r_anti, detector.resolution, log_prior_ratio)
    return r_null, r_anti, rule


def _below_threshold_mass(n_th: int, rate: float) -> float:
    """P(n < n_th) of a PNR count; interior outcomes are plain Poisson."""
    return float(special.pdtr(n_th - 1, rate))


def hybrid_error(config: SignalConfig, detector: DetectorModel = IDEAL_DETECTOR) -> ReceiverResult:
    """Error of the feed-forward hybrid receiver.

    The reflected branch (amplitude sqrt(1-tau) alpha, sign opposite to the
    transmitted one) is read out by the homodyne-like stage; the sign of
    its count difference selects the displacement sign of the final PNR
    stage. A final count at or above the MAP threshold flips the
    difference-sign decision. Ties delta = 0 group with the positive branch
    by convention, unlike the standalone homodyne-like receiver which
    splits them evenly.
    """
    alpha, tau, z = config.alpha, config.tau, config.z
    if config.q0 == 0.0 or config.q1 == 0.0:
        # certain prior: the MAP decision always declares the sure symbol
        return ReceiverResult(
            p_err=0.0, tau_used=tau, notes=("extension: degenerate priors",)
        )
    refl = math.sqrt(1.0 - tau) * alpha

    # symbol "0" = -alpha reflects to +refl, symbol "1" = +alpha to -refl
    mu_c0, mu_d0 = homodyne_like_rates(refl, z, detector.visibility)
    neg0, zero0, pos0 = difference_sign_masses(mu_c0, mu_d0, detector)
    mu_c1, mu_d1 = homodyne_like_rates(-refl, z, detector.visibility)
    neg1, zero1, pos1 = difference_sign_masses(mu_c1, mu_d1, detector)
    geq0 = zero0 + pos0
    geq1 = zero1 + pos1

    r_null, r_anti, rule = _hybrid_final_stage(config, detector)
    notes = []
    if config.q0 != config.q1:
        notes.append("extension: non-equal priors")
    if detector.dark_rate > 0.0 and detector.visibility < 1.0:
        notes.append("extension: combined dark counts and reduced visibility")

    if rule is None:
        # uninformative final stage: decide on the difference sign alone
        err_given_0 = neg0
        err_given_1 = geq1
        n_th_used = None
        breakdown = {"err_given_0": err_given_0, "err_given_1": err_given_1}
    else:
        p_low_anti = _below_threshold_mass(rule.n_th, r_anti)
        p_high_null = 1.0 - _below_threshold_mass(rule.n_th, r_null)
        err_given_0 = neg0 * p_low_anti + geq0 * p_high_null
        err_given_1 = geq1 * p_low_anti + neg1 * p_high_null
        n_th_used = rule.n_th
        breakdown = {
            "err_given_0": err_given_0,
            "err_given_1": err_given_1,
            "p_low_anti": p_low_anti,
            "p_high_null": p_high_null,
        }

    return ReceiverResult(
        p_err=config.q0 * err_given_0 + config.q1 * err_given_1,
        tau_used=tau,
        n_th_used=n_th_used,
        breakdown=breakdown,
        notes=tuple(notes),
    )


def _dpnrm_rates(
    alpha: float, detector: DetectorModel, noise_case: NoiseCase | None
) -> tuple[float, float, NoiseCase, tuple[str, ...]]:
    """Registered rate pair (nulled, anti-nulled) of a D-PNR(M) receiver.

    Both noise cases share one algebra, eta * 2 alpha^2 (1 -+ xi) + nu: at
    xi = 1 it reduces to (nu, 4 eta alpha^2 + nu), at nu = 0 to the pure
    interference-mismatch pair. An explicit case must be consistent with
    the detector fields.
    """
    nu, xi, eta = detector.dark_rate, detector.visibility, detector.efficiency
    if noise_case is NoiseCase.DARK_COUNTS and xi < 1.0:
        raise ValueError("dark-count case requires unit visibility; pass noise_case=None to combine")
    if noise_case is NoiseCase.VISIBILITY and xi == 1.0:
        raise ValueError("visibility case requires xi < 1")
    if noise_case is None:
        noise_case = NoiseCase.VISIBILITY if xi < 1.0 else NoiseCase.DARK_COUNTS
    notes = []
    if nu > 0.0 and xi < 1.0:
        notes.append("extension: combined dark counts and reduced visibility")
    if eta < 1.0 and (nu > 0.0 or xi < 1.0):
        notes.append("extension: efficiency composed with noise rates")
    a_sq = alpha * alpha
    r_null = eta * 2.0 * a_sq * (1.0 - xi) + nu
    r_anti = eta * 2.0 * a_sq * (1.0 + xi) + nu
    return r_null, r_anti, noise_case, tuple(notes)


def dpnrm_error(
    alpha: float,
    detector: DetectorModel,
    noise_case: NoiseCase | None = None,
) -> ReceiverResult:
    """Error of a nulling displacement followed by PNR(M) MAP detection.

    1 - (1/2) sum_n max[p(n; nulled rate), p(n; anti-nulled rate)] over the
    M + 1 outcomes. With M = 1 and vanishing noise this is the on-off
    nulling receiver.
    """
    if detector.resolution is None:
        raise ValueError("displacement-PNR receiver requires a finite resolution")
    r_null, r_anti, case, notes = _dpnrm_rates(alpha, detector, noise_case)
    p_null = pnr_outcome_vector(r_null, detector.resolution)
    p_anti = pnr_outcome_vector(r_anti, detector.resolution)
    # min-form of the MAP error: termwise identical to the threshold rule
    p_err = math.fsum(0.5 * min(a, b) for a, b in zip(p_null, p_anti))
    if r_anti > r_null:
        rule = threshold_from_rates(r_null, r_anti, detector.resolution)
        n_th_used = rule.n_th
    else:
        n_th_used = None
    return ReceiverResult(
        p_err=p_err,
        n_th_used=n_th_used,
        breakdown={"rate_null": r_null, "rate_anti": r_anti, "noise_case": case.value},
        notes=notes,
    )


def dpnrm_asymptote(
    detector: DetectorModel,
    noise_case: NoiseCase | None = None,
    alpha: float | None = None,
) -> float:
    """Large-energy limit of :func:`dpnrm_error`.

    Once the threshold saturates at M, only outcome M pooled from the
    nulled branch misleads the decision, so the error tends to
    p(M; nulled rate)/2: a constant (1/2)(1 - e^-nu sum_{j<M} nu^j/j!) for
    dark counts, and an increasing function of alpha^2 when the visibility
    keeps the nulled rate energy-dependent (``alpha`` is then required).
    """
    if detector.resolution is None:
        raise ValueError("displacement-PNR receiver requires a finite resolution")
    if noise_case is None:
        noise_case = NoiseCase.VISIBILITY if detector.visibility < 1.0 else NoiseCase.DARK_COUNTS
    if noise_case is NoiseCase.DARK_COUNTS and detector.visibility == 1.0:
        r_null = detector.dark_rate
    else:
        if alpha is None:
            raise ValueError("alpha is required when the nulled rate depends on the energy")
        r_null, _, _, _ = _dpnrm_rates(alpha, detector, noise_case)
    tail = 1.0 - math.fsum(poisson_pmf(j, r_null) for j in range(detector.resolution))
    return 0.5 * max(0.0, tail)
