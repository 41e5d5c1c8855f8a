"""Command-line front end.

Subcommands:

* ``sweep``      error probabilities of one receiver over an energy grid,
                 written as CSV with a ``#`` metadata header,
* ``figure``     data (and quick-look PNGs) for the bundled benchmark
                 figures fig2..fig6,
* ``constants``  strong-LO saturation constants of the optimized hybrid,
* ``validate``   Monte Carlo concordance matrix against the analytic
                 probabilities.

Exit codes: 0 success, 2 configuration error, 3 validation failure.
All diagnostics go to standard error; data goes to files or standard out.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import DetectorModel
from .optimizer import Benchmark, SweepTable, optimize_tau, r_infinity_hd, ratio_curve, solve_lambda_hd
from .receivers import (
    SignalConfig,
    dpnrm_error,
    helstrom_bound,
    homodyne_like_error,
    homodyne_sql,
    hybrid_error,
    hybrid_error_hd,
    kennedy_error,
)
from .montecarlo import expected_outlier_allowance, run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3

RECEIVERS = ("hybrid", "hybrid-hd", "kennedy", "homodyne-like", "homodyne", "helstrom", "dpnrm")

_DEFAULTS = {
    "receiver": "hybrid",
    "alpha_sq": "0.05:5:50",
    "log": False,
    "z_sq": 5.0,
    "resolution": "inf",
    "eta": 1.0,
    "nu": 0.0,
    "xi": 1.0,
    "benchmark": "kennedy",
    "tau": None,
    "trials": 100_000,
    "seed": 7,
    "output": "-",
    "plot": False,
}


class ConfigError(ValueError):
    pass


def _parse_grid(text: str, log: bool) -> np.ndarray:
    try:
        lo_s, hi_s, n_s = text.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError as exc:
        raise ConfigError(f"bad alpha_sq grid '{text}', expected MIN:MAX:POINTS") from exc
    if n < 1 or (n > 1 and hi <= lo) or lo < 0:
        raise ConfigError(f"bad alpha_sq grid '{text}': need MIN < MAX and POINTS >= 1")
    if n == 1:
        return np.array([lo])
    if log:
        if lo <= 0:
            raise ConfigError("log-spaced grid requires MIN > 0")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _parse_resolution(value) -> int | None:
    if value is None:
        return None
    if isinstance(value, str):
        if value.lower() in ("inf", "none", "unbounded"):
            return None
        try:
            value = int(value)
        except ValueError as exc:
            raise ConfigError(f"bad resolution '{value}'") from exc
    if value < 1:
        raise ConfigError(f"resolution must be >= 1, got {value}")
    return int(value)


@dataclass
class RunConfig:
    receiver: str
    alpha_sq: np.ndarray
    z_sq: float
    detector: DetectorModel
    benchmark: Benchmark
    tau: float | None
    trials: int
    seed: int
    output: str
    plot: bool
    raw: dict

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        merged = dict(_DEFAULTS)
        if getattr(args, "config", None):
            try:
                with open(args.config) as handle:
                    file_values = json.load(handle)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
            unknown = set(file_values) - set(_DEFAULTS)
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            merged.update(file_values)
        for key in _DEFAULTS:
            value = getattr(args, key, None)
            if value is not None:
                merged[key] = value
        if merged["receiver"] not in RECEIVERS:
            raise ConfigError(f"unknown receiver '{merged['receiver']}'")
        try:
            detector = DetectorModel(
                resolution=_parse_resolution(merged["resolution"]),
                efficiency=float(merged["eta"]),
                dark_rate=float(merged["nu"]),
                visibility=float(merged["xi"]),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if merged["z_sq"] < 0:
            raise ConfigError("z_sq must be >= 0")
        if merged["tau"] is not None and not 0.0 <= merged["tau"] <= 1.0:
            raise ConfigError("tau must be in [0, 1]")
        try:
            benchmark = Benchmark(merged["benchmark"])
        except ValueError as exc:
            raise ConfigError(f"unknown benchmark '{merged['benchmark']}'") from exc
        return cls(
            receiver=merged["receiver"],
            alpha_sq=_parse_grid(str(merged["alpha_sq"]), bool(merged["log"])),
            z_sq=float(merged["z_sq"]),
            detector=detector,
            benchmark=benchmark,
            tau=merged["tau"],
            trials=int(merged["trials"]),
            seed=int(merged["seed"]),
            output=str(merged["output"]),
            plot=bool(merged["plot"]),
            raw=merged,
        )


def _benchmark_value(alpha: float, config: RunConfig) -> float:
    if config.benchmark is Benchmark.KENNEDY:
        return kennedy_error(alpha, config.detector.efficiency)
    return dpnrm_error(alpha, config.detector).p_err


def _receiver_point(alpha: float, config: RunConfig) -> tuple[float, float]:
    """(tau_used, p_err) of the swept receiver at one amplitude."""
    z = math.sqrt(config.z_sq)
    detector = config.detector
    kind = config.receiver
    if kind == "hybrid":
        if config.tau is not None:
            return config.tau, hybrid_error(SignalConfig(alpha=alpha, z=z, tau=config.tau), detector).p_err
        res = optimize_tau(alpha, z, detector, config.benchmark)
        return res.tau_opt, res.p_err_opt
    if kind == "hybrid-hd":
        if config.tau is not None:
            return config.tau, hybrid_error_hd(alpha, config.tau)
        taus = np.linspace(0.0, 1.0, 1001)
        values = [hybrid_error_hd(alpha, t) for t in taus]
        i = int(np.argmin(values))
        return float(taus[i]), float(values[i])
    if kind == "kennedy":
        return math.nan, kennedy_error(alpha, detector.efficiency)
    if kind == "homodyne-like":
        return math.nan, homodyne_like_error(alpha, z, detector).p_err
    if kind == "homodyne":
        return math.nan, homodyne_sql(alpha)
    if kind == "helstrom":
        return math.nan, helstrom_bound(alpha)
    if kind == "dpnrm":
        return math.nan, dpnrm_error(alpha, detector).p_err
    raise ConfigError(f"unknown receiver '{kind}'")


def build_sweep(config: RunConfig) -> SweepTable:
    taus = np.empty(config.alpha_sq.size)
    p_rec = np.empty(config.alpha_sq.size)
    p_ben = np.empty(config.alpha_sq.size)
    for i, a_sq in enumerate(config.alpha_sq):
        alpha = math.sqrt(a_sq)
        taus[i], p_rec[i] = _receiver_point(alpha, config)
        p_ben[i] = _benchmark_value(alpha, config)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(p_ben > 0, p_rec / p_ben, np.inf)
    detector = config.detector
    return SweepTable(
        alpha_sq=config.alpha_sq,
        tau_opt=taus,
        p_receiver=p_rec,
        p_benchmark=p_ben,
        ratio=ratio,
        metadata={
            "tool": f"bpskrx {__version__}",
            "command": "sweep",
            "receiver": config.receiver,
            "benchmark": config.benchmark.value,
            "z_sq": config.z_sq,
            "resolution": detector.resolution if detector.resolution is not None else "inf",
            "eta": detector.efficiency,
            "nu": detector.dark_rate,
            "xi": detector.visibility,
            "seed": config.seed,
        },
    )


def _write_table(table: SweepTable, output: str, plot: bool, receiver: str, benchmark: str) -> None:
    if output == "-":
        table.write_csv(sys.stdout)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        table.write_csv(handle)
    if plot:
        from .plotting import render_sweep

        render_sweep(path.with_suffix(".png"), table, receiver, benchmark)


def cmd_sweep(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    table = build_sweep(config)
    _write_table(table, config.output, config.plot, config.receiver, config.benchmark.value)
    return EXIT_OK


# ---------------------------------------------------------------------------
# figure presets


def _curve_table(alpha_sq: np.ndarray, p: np.ndarray, **metadata) -> SweepTable:
    nan = np.full(alpha_sq.size, np.nan)
    return SweepTable(alpha_sq=alpha_sq, tau_opt=nan, p_receiver=p, p_benchmark=nan, ratio=nan, metadata=metadata)


def _figure_grid(points: int, lo: float, hi: float) -> np.ndarray:
    return np.geomspace(lo, hi, points)


def _fig2(points: int) -> tuple[dict, dict]:
    """Ideal receivers at z^2 = 5: optimized hybrid vs the nulling,
    homodyne-like and quantum-optimal references."""
    z = math.sqrt(5.0)
    grid = _figure_grid(points, 0.05, 10.0)
    hybrid = ratio_curve(grid, z)
    curves = {
        "hybrid_optimized": hybrid,
        "kennedy": _curve_table(grid, np.array([kennedy_error(math.sqrt(a)) for a in grid])),
        "homodyne_like": _curve_table(grid, np.array([homodyne_like_error(math.sqrt(a), z).p_err for a in grid])),
        "helstrom": _curve_table(grid, np.array([helstrom_bound(math.sqrt(a)) for a in grid])),
    }
    panels = [
        {
            "curves": [
                ("hybrid (tau_opt)", grid, hybrid.p_receiver),
                ("kennedy", grid, curves["kennedy"].p_receiver),
                ("homodyne-like", grid, curves["homodyne_like"].p_receiver),
                ("helstrom", grid, curves["helstrom"].p_receiver),
            ],
            "xlabel": "alpha^2",
            "ylabel": "error probability",
            "logy": True,
            "title": "ideal receivers, z^2 = 5",
        },
        {
            "curves": [
                ("ratio vs kennedy", grid, hybrid.ratio),
                ("tau_opt", grid, hybrid.tau_opt),
            ],
            "xlabel": "alpha^2",
            "ylabel": "ratio / tau_opt",
        },
    ]
    params = {"z_sq": 5.0, "detector": "ideal unbounded", "alpha_sq": [0.05, 10.0, points], "spacing": "log"}
    return curves, {"panels": panels, "params": params}


def _fig3(points: int) -> tuple[dict, dict]:
    """Optimized-hybrid-to-nulling ratio at z^2 = 3 for several PNR
    resolutions."""
    z = math.sqrt(3.0)
    grid = _figure_grid(points, 0.05, 10.0)
    curves = {}
    ratio_panel = []
    for m in (1, 2, 3, 5, None):
        name = f"hybrid_pnr{m if m is not None else '_inf'}"
        table = ratio_curve(grid, z, DetectorModel(resolution=m))
        curves[name] = table
        ratio_panel.append((f"M = {m if m is not None else 'inf'}", grid, table.ratio))
    panels = [
        {
            "curves": ratio_panel,
            "xlabel": "alpha^2",
            "ylabel": "hybrid / kennedy error ratio",
            "title": "finite PNR resolution, z^2 = 3",
        }
    ]
    params = {"z_sq": 3.0, "resolutions": [1, 2, 3, 5, "inf"], "alpha_sq": [0.05, 10.0, points], "spacing": "log"}
    return curves, {"panels": panels, "params": params}


def _fig4(points: int) -> tuple[dict, dict]:
    """Efficiency study at M = 3, z^2 = 5: error curves for several eta
    and the saturation ratio versus eta for several resolutions."""
    z = math.sqrt(5.0)
    grid = _figure_grid(points, 0.05, 10.0)
    curves = {}
    error_panel = []
    for eta in (1.0, 0.9, 0.8, 0.7):
        table = ratio_curve(grid, z, DetectorModel(resolution=3, efficiency=eta))
        curves[f"hybrid_eta{eta:g}"] = table
        error_panel.append((f"hybrid eta={eta:g}", grid, table.p_receiver))
        error_panel.append((f"kennedy eta={eta:g}", grid, table.p_benchmark))
    etas = np.linspace(0.3, 1.0, 11)
    sat_alpha_sq = 25.0
    sat_panel = []
    for m in (1, 2, 3, None):
        r_sat = np.array(
            [
                optimize_tau(math.sqrt(sat_alpha_sq), z, DetectorModel(resolution=m, efficiency=e)).ratio_vs_benchmark
                for e in etas
            ]
        )
        name = f"saturation_pnr{m if m is not None else '_inf'}"
        curves[name] = _curve_table(etas, r_sat, quantity="saturation_ratio_vs_eta", probe_alpha_sq=sat_alpha_sq)
        sat_panel.append((f"M = {m if m is not None else 'inf'}", etas, r_sat))
    panels = [
        {"curves": error_panel, "xlabel": "alpha^2", "ylabel": "error probability", "logy": True,
         "title": "quantum efficiency, M = 3, z^2 = 5"},
        {"curves": sat_panel, "xlabel": "eta", "ylabel": f"ratio at alpha^2 = {sat_alpha_sq:g}"},
    ]
    params = {"z_sq": 5.0, "resolution": 3, "etas": [1.0, 0.9, 0.8, 0.7],
              "saturation_probe_alpha_sq": sat_alpha_sq, "alpha_sq": [0.05, 10.0, points], "spacing": "log"}
    return curves, {"panels": panels, "params": params}


def _fig_noise(points: int, nu: float, xi: float, title: str) -> tuple[dict, dict]:
    z = math.sqrt(5.0)
    grid = _figure_grid(points, 0.05, 40.0)
    curves = {}
    err_panel = []
    tau_panel = []
    for m in (1, 2, 3):
        detector = DetectorModel(resolution=m, dark_rate=nu, visibility=xi)
        hybrid = ratio_curve(grid, z, detector, Benchmark.D_PNRM)
        curves[f"hybrid_pnr{m}"] = hybrid
        curves[f"dpnrm_pnr{m}"] = _curve_table(grid, hybrid.p_benchmark)
        err_panel.append((f"hybrid M={m}", grid, hybrid.p_receiver))
        err_panel.append((f"D-PNR M={m}", grid, hybrid.p_benchmark))
        tau_panel.append((f"tau_opt M={m}", grid, hybrid.tau_opt))
    panels = [
        {"curves": err_panel, "xlabel": "alpha^2", "ylabel": "error probability", "logy": True, "logx": True,
         "title": title},
        {"curves": tau_panel, "xlabel": "alpha^2", "ylabel": "tau_opt", "logx": True},
    ]
    params = {"z_sq": 5.0, "nu": nu, "xi": xi, "resolutions": [1, 2, 3],
              "alpha_sq": [0.05, 40.0, points], "spacing": "log"}
    return curves, {"panels": panels, "params": params}


FIGURES = {
    "fig2": lambda points: _fig2(points),
    "fig3": lambda points: _fig3(points),
    "fig4": lambda points: _fig4(points),
    "fig5": lambda points: _fig_noise(points, nu=1e-3, xi=1.0, title="dark counts nu = 1e-3, z^2 = 5"),
    "fig6": lambda points: _fig_noise(points, nu=0.0, xi=0.998, title="visibility xi = 0.998, z^2 = 5"),
}


def cmd_figure(args: argparse.Namespace) -> int:
    name = args.name
    if name not in FIGURES:
        raise ConfigError(f"unknown figure '{name}', choose from {sorted(FIGURES)}")
    points = args.points
    if points < 2:
        raise ConfigError("--points must be >= 2")
    outdir = Path(args.outdir) / name
    outdir.mkdir(parents=True, exist_ok=True)
    curves, layout = FIGURES[name](points)
    files = []
    for curve_name, table in curves.items():
        table.metadata.setdefault("tool", f"bpskrx {__version__}")
        table.metadata.setdefault("figure", name)
        table.metadata.setdefault("curve", curve_name)
        path = outdir / f"{name}_{curve_name}.csv"
        with open(path, "w") as handle:
            table.write_csv(handle)
        files.append(path.name)
    manifest = {
        "figure": name,
        "tool": f"bpskrx {__version__}",
        "parameters": layout["params"],
        "files": sorted(files),
    }
    if not args.no_plot:
        from .plotting import render_panels

        png = outdir / f"{name}.png"
        render_panels(png, layout["panels"])
        manifest["image"] = png.name
    with open(outdir / "manifest.json", "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {len(files)} curve files to {outdir}", file=sys.stderr)
    return EXIT_OK


def cmd_constants(args: argparse.Namespace) -> int:
    lam = solve_lambda_hd()
    print(f"lambda        = {lam:.6g}")
    print(f"N_th_hd       = {lam:.6g}")
    print(f"R_infinity_hd = {r_infinity_hd():.6g}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    trials, seed = args.trials, args.seed
    if getattr(args, "config", None):
        try:
            with open(args.config) as handle:
                file_values = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if trials is None:
            trials = file_values.get("trials")
        if seed is None:
            seed = file_values.get("seed")
    trials = int(trials) if trials is not None else int(_DEFAULTS["trials"])
    seed = int(seed) if seed is not None else int(_DEFAULTS["seed"])
    if trials < 10_000:
        raise ConfigError(f"--trials must be >= 10000, got {trials}")
    rows = run_validation(trials=trials, seed=seed)
    failures = [row for row in rows if not row["ok"]]
    header = f"{'receiver':8s} {'a^2':>5s} {'M':>3s} {'eta':>4s} {'nu':>6s} {'xi':>6s} {'analytic':>12s} {'estimate':>12s} {'sigma':>7s} {'status':>6s}"
    print(header)
    for row in rows:
        print(
            f"{row['receiver']:8s} {row['alpha_sq']:5.2f} {row['resolution']:3d} "
            f"{row['eta']:4.2f} {row['nu']:6.0e} {row['xi']:6.4g} "
            f"{row['analytic']:12.6e} {row['estimate']:12.6e} {row['sigma_dev']:7.2f} "
            f"{'ok' if row['ok'] else 'FAIL':>6s}"
        )
    allowed = expected_outlier_allowance(len(rows))
    print(
        f"# {len(rows)} cells, {len(failures)} outliers, allowance {allowed}, "
        f"trials {trials}, seed {seed}",
        file=sys.stderr,
    )
    if len(failures) > allowed:
        print("validation FAILED: outliers exceed the statistical allowance", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bpskrx",
        description="Binary coherent-state receiver error probabilities and validation",
    )
    parser.add_argument("--version", action="version", version=f"bpskrx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="sweep a receiver over an energy grid, emit CSV")
    sweep.add_argument("--receiver", choices=RECEIVERS, default=None)
    sweep.add_argument("--alpha-sq", dest="alpha_sq", default=None, metavar="MIN:MAX:POINTS")
    sweep.add_argument("--log", action="store_const", const=True, default=None, help="log-spaced energy grid")
    sweep.add_argument("--z-sq", dest="z_sq", type=float, default=None)
    sweep.add_argument("--resolution", default=None, help="PNR resolution M, or 'inf'")
    sweep.add_argument("--eta", type=float, default=None)
    sweep.add_argument("--nu", type=float, default=None)
    sweep.add_argument("--xi", type=float, default=None)
    sweep.add_argument("--benchmark", choices=[b.value for b in Benchmark], default=None)
    sweep.add_argument("--tau", type=float, default=None, help="fix the transmissivity instead of optimizing")
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--output", default=None, help="CSV path, or '-' for standard out")
    sweep.add_argument("--plot", action="store_const", const=True, default=None, help="render a PNG next to the CSV")
    sweep.add_argument("--config", default=None, help="JSON file with the same keys; flags override")
    sweep.set_defaults(func=cmd_sweep)

    figure = sub.add_parser("figure", help="emit all curve data for a bundled benchmark figure")
    figure.add_argument("name", help="fig2 | fig3 | fig4 | fig5 | fig6")
    figure.add_argument("--outdir", default="figures")
    figure.add_argument("--points", type=int, default=60, help="energy grid points per curve")
    figure.add_argument("--no-plot", action="store_true", help="emit CSV data only")
    figure.set_defaults(func=cmd_figure)

    constants = sub.add_parser("constants", help="strong-LO saturation constants of the optimized hybrid")
    constants.set_defaults(func=cmd_constants)

    validate = sub.add_parser("validate", help="Monte Carlo concordance matrix")
    validate.add_argument("--trials", type=int, default=None, help="trials per cell (default 100000)")
    validate.add_argument("--seed", type=int, default=None)
    validate.add_argument("--config", default=None, help="JSON file with trials/seed; flags override")
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
