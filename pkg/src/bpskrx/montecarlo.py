"""Monte Carlo simulation of the full receiver measurement chains.

Independent stochastic realization of each receiver (state draw, beam
splitting, two-arm counting, feed-forward displacement, final PNR count,
table decision) used to validate the analytic error probabilities.

Randomness comes from PCG64 streams derived from ``SeedSequence((seed,
chunk_index))``: trials are generated in fixed-size chunks whose substreams
depend only on the seed and the chunk index, so the integer error counts
(and hence the estimate) are reproducible bit-for-bit regardless of how the
chunks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .distributions import IDEAL_DETECTOR, DetectorModel, homodyne_like_rates
from .map_decision import threshold_from_rates
from .optimizer import optimize_tau
from .receivers import (
    NoiseCase,
    SignalConfig,
    _dpnrm_rates,
    _hybrid_final_stage,
    dpnrm_error,
    hybrid_error,
)

CHUNK = 1 << 16


@dataclass(frozen=True)
class TrialOutcome:
    """One simulated shot of the hybrid chain."""

    sent: int
    delta: int
    final_count: int
    decided: int


@dataclass(frozen=True)
class McEstimate:
    p_err_hat: float
    std_err: float
    trials: int
    seed: int

    def agrees_with(self, p_analytic: float, n_sigma: float = 3.0) -> bool:
        """Gaussian n-sigma test against a reference probability, with the
        spread taken from the reference (the estimate's own spread is zero
        whenever no error occurred)."""
        sigma = math.sqrt(p_analytic * (1.0 - p_analytic) / self.trials)
        return abs(self.p_err_hat - p_analytic) <= n_sigma * sigma


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, chunk_index))))


def _clamp(counts: np.ndarray, resolution: int | None) -> np.ndarray:
    if resolution is None:
        return counts
    return np.minimum(counts, resolution)


def _check_trials(trials: int) -> int:
    trials = int(trials)
    if trials < 1000:
        raise ValueError(f"at least 1000 trials are required, got {trials}")
    return trials


def simulate_hybrid(
    config: SignalConfig,
    detector: DetectorModel = IDEAL_DETECTOR,
    trials: int = 1_000_000,
    seed: int = 0,
) -> McEstimate:
    """Sampled error frequency of the feed-forward hybrid receiver."""
    trials = _check_trials(trials)
    alpha, tau, z = config.alpha, config.tau, config.z
    xi, eta, nu = detector.visibility, detector.efficiency, detector.dark_rate
    refl = math.sqrt(1.0 - tau) * alpha

    # arm rates for each symbol: "0" reflects to +refl, "1" to -refl
    rates_c = np.empty(2)
    rates_d = np.empty(2)
    rates_c[0], rates_d[0] = homodyne_like_rates(refl, z, xi)
    rates_c[1], rates_d[1] = homodyne_like_rates(-refl, z, xi)
    rates_c = eta * rates_c + nu
    rates_d = eta * rates_d + nu

    r_null, r_anti, rule = _hybrid_final_stage(config, detector)
    n_th = rule.n_th if rule is not None else None

    errors = 0
    done = 0
    chunk_index = 0
    while done < trials:
        n = min(CHUNK, trials - done)
        rng = _chunk_rng(seed, chunk_index)
        sent = (rng.random(n) < config.q1).astype(np.int8)
        n_c = _clamp(rng.poisson(rates_c[sent]), detector.resolution)
        n_d = _clamp(rng.poisson(rates_d[sent]), detector.resolution)
        delta_ge0 = n_c >= n_d
        # displacement sign follows the difference sign; it anti-nulls the
        # transmitted branch exactly when it matches the sent amplitude sign
        anti = delta_ge0 == (sent == 1)
        n_f = _clamp(rng.poisson(np.where(anti, r_anti, r_null)), detector.resolution)
        if n_th is None:
            flip = np.zeros(n, dtype=bool)
        else:
            flip = n_f >= n_th
        decided = np.where(delta_ge0, flip, ~flip).astype(np.int8)
        errors += int(np.sum(decided != sent))
        done += n
        chunk_index += 1

    p_hat = errors / trials
    return McEstimate(
        p_err_hat=p_hat,
        std_err=math.sqrt(p_hat * (1.0 - p_hat) / trials),
        trials=trials,
        seed=seed,
    )


def simulate_hybrid_trials(
    config: SignalConfig,
    detector: DetectorModel = IDEAL_DETECTOR,
    trials: int = 1000,
    seed: int = 0,
) -> list[TrialOutcome]:
    """Per-trial record of the hybrid chain, for inspection and invariant
    tests (same chain as :func:`simulate_hybrid`, small trial counts)."""
    trials = int(trials)
    alpha, tau, z = config.alpha, config.tau, config.z
    xi, eta, nu = detector.visibility, detector.efficiency, detector.dark_rate
    refl = math.sqrt(1.0 - tau) * alpha
    r_null, r_anti, rule = _hybrid_final_stage(config, detector)
    n_th = rule.n_th if rule is not None else None

    rng = _chunk_rng(seed, 0)
    outcomes = []
    for _ in range(trials):
        sent = int(rng.random() < config.q1)
        amp = refl if sent == 0 else -refl
        mu_c, mu_d = homodyne_like_rates(amp, z, xi)
        n_c = int(_clamp(rng.poisson(eta * mu_c + nu), detector.resolution))
        n_d = int(_clamp(rng.poisson(eta * mu_d + nu), detector.resolution))
        delta = n_c - n_d
        anti = (delta >= 0) == (sent == 1)
        n_f = int(_clamp(rng.poisson(r_anti if anti else r_null), detector.resolution))
        flip = n_th is not None and n_f >= n_th
        decided = int(flip) if delta >= 0 else int(not flip)
        outcomes.append(TrialOutcome(sent=sent, delta=delta, final_count=n_f, decided=decided))
    return outcomes


def simulate_dpnrm(
    alpha: float,
    detector: DetectorModel,
    noise_case: NoiseCase | None = None,
    trials: int = 1_000_000,
    seed: int = 0,
) -> McEstimate:
    """Sampled error frequency of the displacement-PNR(M) receiver."""
    trials = _check_trials(trials)
    if detector.resolution is None:
        raise ValueError("displacement-PNR receiver requires a finite resolution")
    r_null, r_anti, _, _ = _dpnrm_rates(alpha, detector, noise_case)
    if r_anti > r_null:
        n_th = threshold_from_rates(r_null, r_anti, detector.resolution).n_th
    else:
        n_th = None

    rates = np.array([r_null, r_anti])
    errors = 0
    done = 0
    chunk_index = 0
    while done < trials:
        n = min(CHUNK, trials - done)
        rng = _chunk_rng(seed, chunk_index)
        sent = (rng.random(n) < 0.5).astype(np.int8)
        counts = _clamp(rng.poisson(rates[sent]), detector.resolution)
        if n_th is None:
            decided = rng.integers(0, 2, size=n).astype(np.int8)
        else:
            decided = (counts >= n_th).astype(np.int8)
        errors += int(np.sum(decided != sent))
        done += n
        chunk_index += 1

    p_hat = errors / trials
    return McEstimate(
        p_err_hat=p_hat,
        std_err=math.sqrt(p_hat * (1.0 - p_hat) / trials),
        trials=trials,
        seed=seed,
    )


def validation_matrix() -> list[dict]:
    """Cross of energies, resolutions and imperfections used to validate
    every receiver path against its analytic error probability."""
    alpha_sqs = (0.25, 1.0, 4.0)
    resolutions = (1, 3, 30)
    etas = (1.0, 0.7)
    nus = (0.0, 1e-3)
    xis = (1.0, 0.998)
    z_sq = 5.0
    matrix = []
    for receiver in ("hybrid", "dpnrm"):
        for a_sq in alpha_sqs:
            for m in resolutions:
                for eta in etas:
                    for nu in nus:
                        for xi in xis:
                            matrix.append(
                                {
                                    "receiver": receiver,
                                    "alpha_sq": a_sq,
                                    "resolution": m,
                                    "eta": eta,
                                    "nu": nu,
                                    "xi": xi,
                                    "z_sq": z_sq,
                                }
                            )
    return matrix


def expected_outlier_allowance(n_cells: int, n_sigma: float = 3.0) -> int:
    """How many cells may sit outside n sigma before the matrix fails:
    the ceiling of the expected count for independent Gaussian deviates."""
    p_out = float(2.0 * 0.5 * math.erfc(n_sigma / math.sqrt(2.0)))
    return max(1, math.ceil(n_cells * p_out))


def run_validation(trials: int = 100_000, seed: int = 0, matrix: list[dict] | None = None) -> list[dict]:
    """Run the validation matrix; one row per cell.

    Each row gains the analytic probability, the estimate, its standard
    error, the deviation in units of the analytic sigma, and an ``ok``
    flag from an exact binomial two-sided test at the 3-sigma significance
    level (valid also for rare-error cells where the Gaussian rule is not).
    """
    if matrix is None:
        matrix = validation_matrix()
    rows = []
    for index, cell in enumerate(matrix):
        detector = DetectorModel(
            resolution=cell["resolution"],
            efficiency=cell["eta"],
            dark_rate=cell["nu"],
            visibility=cell["xi"],
        )
        alpha = math.sqrt(cell["alpha_sq"])
        cell_seed = seed + index
        if cell["receiver"] == "hybrid":
            z = math.sqrt(cell["z_sq"])
            tau = optimize_tau(alpha, z, detector).tau_opt
            config = SignalConfig(alpha=alpha, z=z, tau=tau)
            analytic = hybrid_error(config, detector).p_err
            estimate = simulate_hybrid(config, detector, trials=trials, seed=cell_seed)
        else:
            analytic = dpnrm_error(alpha, detector).p_err
            estimate = simulate_dpnrm(alpha, detector, trials=trials, seed=cell_seed)
        sigma_ref = math.sqrt(analytic * (1.0 - analytic) / trials)
        deviation = abs(estimate.p_err_hat - analytic)
        errors_seen = round(estimate.p_err_hat * trials)
        p_value = stats.binomtest(errors_seen, trials, analytic).pvalue
        alpha_level = float(math.erfc(3.0 / math.sqrt(2.0)))
        row = dict(cell)
        row.update(
            analytic=analytic,
            estimate=estimate.p_err_hat,
            std_err=estimate.std_err,
            sigma_dev=deviation / sigma_ref if sigma_ref > 0 else 0.0,
            ok=bool(p_value >= alpha_level),
            seed=cell_seed,
        )
        rows.append(row)
    return rows
