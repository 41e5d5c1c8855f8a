"""Transmissivity optimization for the hybrid receiver.

The hybrid error probability is non-convex in the splitter transmissivity
tau: noisy detectors make the MAP count threshold jump as tau varies, which
carves sawtooth-shaped pieces into the landscape, and on whole energy
intervals the exact minimum sits at tau = 1 (the receiver then degenerates
into the plain displacement-PNR scheme). The optimizer therefore scans a
dense grid, refines the best bracket by golden-section search, and snaps to
an exact endpoint whenever the endpoint is at least as good.

Also here: the strong-LO saturation constants of the optimized receiver
(the 1/alpha^2 ansatz coefficient lambda, the threshold energy at which
splitting starts to pay, and the saturation ratio against the nulling
receiver) and grid sweeps for figure data.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize, special

from .distributions import IDEAL_DETECTOR, DetectorModel
from .receivers import (
    ReceiverResult,
    SignalConfig,
    dpnrm_error,
    hybrid_error,
    kennedy_error,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Benchmark(enum.Enum):
    KENNEDY = "kennedy"
    D_PNRM = "dpnrm"


@dataclass(frozen=True)
class OptimizationResult:
    tau_opt: float
    p_err_opt: float
    p_benchmark: float
    ratio_vs_benchmark: float
    benchmark: Benchmark
    grid_info: dict = field(default_factory=dict)
    receiver: ReceiverResult | None = None


@dataclass(frozen=True)
class AnsatzFit:
    """Fit of the optimized transmissivity to tau_opt = 1 - lambda_z/alpha^2."""

    lambda_z: float
    n_th_energy: float
    fit_range: tuple[float, float]
    residual: float
    uncertainty: float


@dataclass(frozen=True)
class SweepTable:
    """Columnar sweep result: one row per energy grid point."""

    alpha_sq: np.ndarray
    tau_opt: np.ndarray
    p_receiver: np.ndarray
    p_benchmark: np.ndarray
    ratio: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.alpha_sq.size

    def rows(self):
        for i in range(len(self)):
            yield (
                float(self.alpha_sq[i]),
                float(self.tau_opt[i]),
                float(self.p_receiver[i]),
                float(self.p_benchmark[i]),
                float(self.ratio[i]),
            )

    def write_csv(self, stream, header=("alpha_sq", "tau_opt", "p_hyb", "p_benchmark", "ratio")) -> None:
        """Delimited output with a '#'-prefixed metadata block; 12 significant
        digits per numeric field."""
        for key, value in self.metadata.items():
            stream.write(f"# {key} = {value}\n")
        stream.write(",".join(header) + "\n")
        for row in self.rows():
            stream.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(value: float) -> str:
    if value != value:  # nan: receiver has no tau
        return "nan"
    return f"{value:.12g}"


def _golden_section(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section minimization on [a, b]; returns the best point actually
    evaluated (the landscape may be discontinuous inside the bracket)."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        if f1 < best_f:
            best_x, best_f = x1, f1
        if f2 < best_f:
            best_x, best_f = x2, f2
    return best_x, best_f


def _benchmark_error(alpha: float, detector: DetectorModel, benchmark: Benchmark) -> float:
    if benchmark is Benchmark.KENNEDY:
        return kennedy_error(alpha, detector.efficiency)
    return dpnrm_error(alpha, detector).p_err


def optimize_tau(
    alpha: float,
    z: float,
    detector: DetectorModel = IDEAL_DETECTOR,
    benchmark: Benchmark = Benchmark.KENNEDY,
    coarse_points: int = 1001,
    tau_tol: float = 1e-5,
) -> OptimizationResult:
    """Globally minimize the hybrid error over the transmissivity.

    Dense coarse scan (1001 points by default), a finer scan of the best
    coarse bracket, golden-section refinement down to ``tau_tol``, then a
    snap to tau = 0 or tau = 1 exactly whenever the endpoint value is not
    worse than the refined interior value (within 1e-12 relative), so the
    plateau regions report exact endpoints.
    """

    def f(tau: float) -> float:
        return hybrid_error(SignalConfig(alpha=alpha, z=z, tau=tau), detector).p_err

    grid = np.linspace(0.0, 1.0, coarse_points)
    values = np.array([f(t) for t in grid])
    i_best = int(np.argmin(values))
    lo = grid[max(i_best - 1, 0)]
    hi = grid[min(i_best + 1, coarse_points - 1)]

    fine = np.linspace(lo, hi, 41)
    fine_values = np.array([f(t) for t in fine])
    j_best = int(np.argmin(fine_values))
    a = fine[max(j_best - 1, 0)]
    b = fine[min(j_best + 1, 40)]
    tau_ref, f_ref = _golden_section(f, a, b, tau_tol)

    candidates = [
        (float(tau_ref), float(f_ref)),
        (float(fine[j_best]), float(fine_values[j_best])),
        (float(grid[i_best]), float(values[i_best])),
    ]
    best_tau, best_f = min(candidates, key=lambda c: c[1])
    # prefer exact endpoints when they are as good as the refined interior
    slack = best_f * 1e-12
    for endpoint, f_end in ((1.0, float(values[-1])), (0.0, float(values[0]))):
        if f_end <= best_f + slack:
            best_tau, best_f = endpoint, f_end
            break

    p_bench = _benchmark_error(alpha, detector, benchmark)
    receiver = hybrid_error(SignalConfig(alpha=alpha, z=z, tau=best_tau), detector)
    return OptimizationResult(
        tau_opt=best_tau,
        p_err_opt=best_f,
        p_benchmark=p_bench,
        ratio_vs_benchmark=best_f / p_bench if p_bench > 0.0 else math.inf,
        benchmark=benchmark,
        grid_info={
            "coarse_points": coarse_points,
            "fine_points": 41,
            "tau_tol": tau_tol,
            "refined_interval": (float(a), float(b)),
        },
        receiver=receiver,
    )


def solve_lambda_hd() -> float:
    """Root of sqrt(2/(pi L)) - 4 e^(2L) erfc(sqrt(2L)) = 0 on (1e-4, 1).

    This is the stationarity condition of the strong-LO hybrid ratio under
    the tau = 1 - L/alpha^2 ansatz; the root is close to 0.094.
    """

    def g(lam: float) -> float:
        return math.sqrt(2.0 / (math.pi * lam)) - 4.0 * math.exp(2.0 * lam) * special.erfc(
            math.sqrt(2.0 * lam)
        )

    return float(optimize.brentq(g, 1e-4, 1.0, xtol=1e-12, rtol=8.9e-16))


def r_infinity_hd() -> float:
    """Saturation ratio of the optimized strong-LO hybrid against the
    nulling receiver: e^(4 lambda) erfc(sqrt(2 lambda)) ~ 0.786."""
    lam = solve_lambda_hd()
    return math.exp(4.0 * lam) * special.erfc(math.sqrt(2.0 * lam))


def threshold_energy(
    z: float,
    detector: DetectorModel = IDEAL_DETECTOR,
    hi: float = 1.0,
    alpha_sq_tol: float = 1e-3,
    tau_cut: float = 1e-4,
) -> float:
    """Smallest pulse energy at which splitting pays (tau_opt > tau_cut),
    located by bisection on alpha^2."""

    def splits(a_sq: float) -> bool:
        return optimize_tau(math.sqrt(a_sq), z, detector).tau_opt > tau_cut

    lo = 1e-4
    if splits(lo):
        return lo
    while not splits(hi):
        hi *= 2.0
        if hi > 64.0:
            raise RuntimeError("no threshold energy found below alpha^2 = 64")
    while hi - lo > alpha_sq_tol:
        mid = 0.5 * (lo + hi)
        if splits(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def ansatz_fit(
    z: float,
    detector: DetectorModel = IDEAL_DETECTOR,
    alpha_sq_range: tuple[float, float] = (10.0, 50.0),
    fit_points: int = 5,
) -> AnsatzFit:
    """Estimate the ansatz coefficient lambda(z) and the threshold energy.

    lambda(z) is read off as alpha^2 (1 - tau_opt) at the top of the fit
    range, with the same estimate at half that energy serving as a
    consistency check (their difference is reported as the uncertainty).
    The residual is the worst deviation of the observed tau_opt from the
    fitted 1 - lambda/alpha^2 law over the fit grid.
    """
    a_sq_lo, a_sq_hi = alpha_sq_range
    if a_sq_lo <= 0 or a_sq_hi <= a_sq_lo:
        raise ValueError("alpha_sq_range must be an increasing positive interval")

    def tau_opt_at(a_sq: float) -> float:
        return optimize_tau(math.sqrt(a_sq), z, detector).tau_opt

    tau_hi = tau_opt_at(a_sq_hi)
    if tau_hi <= 1e-4:
        raise RuntimeError("optimized transmissivity does not saturate over the fit range")
    lam = a_sq_hi * (1.0 - tau_hi)
    lam_check = (0.5 * a_sq_hi) * (1.0 - tau_opt_at(0.5 * a_sq_hi))

    grid = np.linspace(a_sq_lo, a_sq_hi, fit_points)
    residual = max(abs(tau_opt_at(a) - (1.0 - lam / a)) for a in grid)
    n_th = threshold_energy(z, detector)
    return AnsatzFit(
        lambda_z=lam,
        n_th_energy=n_th,
        fit_range=(a_sq_lo, a_sq_hi),
        residual=residual,
        uncertainty=abs(lam - lam_check),
    )


def ratio_curve(
    alpha_sq_grid,
    z: float,
    detector: DetectorModel = IDEAL_DETECTOR,
    benchmark: Benchmark = Benchmark.KENNEDY,
) -> SweepTable:
    """Optimized hybrid error and benchmark ratio on an energy grid."""
    grid = np.asarray(alpha_sq_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("alpha_sq grid must be non-empty")
    if np.any(np.diff(grid) <= 0) and grid.size > 1:
        raise ValueError("alpha_sq grid must be strictly increasing")
    tau = np.empty(grid.size)
    p_rec = np.empty(grid.size)
    p_ben = np.empty(grid.size)
    for i, a_sq in enumerate(grid):
        res = optimize_tau(math.sqrt(a_sq), z, detector, benchmark)
        tau[i] = res.tau_opt
        p_rec[i] = res.p_err_opt
        p_ben[i] = res.p_benchmark
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(p_ben > 0.0, p_rec / p_ben, np.inf)
    return SweepTable(
        alpha_sq=grid,
        tau_opt=tau,
        p_receiver=p_rec,
        p_benchmark=p_ben,
        ratio=ratio,
        metadata={
            "receiver": "hybrid",
            "benchmark": benchmark.value,
            "z_sq": z * z,
            "resolution": detector.resolution if detector.resolution is not None else "inf",
            "eta": detector.efficiency,
            "nu": detector.dark_rate,
            "xi": detector.visibility,
        },
    )
