"""Experiment presets and the end-to-end reconstruction pipeline.

Six built-in presets cover the reference reconstructions: two smooth
drifts on a 100x100 grid with exact data (ex1a, ex1b), two drifts with
kinks at T=0.5 (ex2c, ex2d), and two rough drifts on a coarse 20x80 grid
recovered from noisy, mollified data (ex3e, ex3f).

A run is: synthesize data with an inverse-crime guard (forward solve on a
refined grid, sampled onto a fine data grid), optionally add seeded noise
and mollify, restrict to the solver grid, iterate the fixed-point update,
and emit CSV/JSON/SVG artifacts that are byte-reproducible from the
recorded provenance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .errors import ConfigurationError, DataQualityError, DivergenceError
from .forward import solve_forward
from .inversion import IterationConfig, IterationTrace, error_metrics, run_iteration
from .model import (
    AssumptionReport,
    GridFunction,
    ProblemSpec,
    build_grids,
    validate_assumptions,
)
from .mollify import (
    NoiseSpec,
    TikhonovConfig,
    add_noise,
    assemble_rhs,
    build_design_matrix,
    build_regularization_matrix,
    noise_sigma,
    restrict,
    select_lambda,
    solve_tikhonov,
)
from .svgplot import line_plot_svg

FORMATS = ("csv", "json", "svg")
PRESET_NAMES = ("ex1a", "ex1b", "ex2c", "ex2d", "ex3e", "ex3f")


# ---------------------------------------------------------------------------
# Reference drifts
# ---------------------------------------------------------------------------

def drift_sine(x):
    return np.sin(np.asarray(x, dtype=float))


def drift_parabolic_join(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, x**2, -(x**2) + 2.0 * x - 0.5)


def drift_hat(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, x, 1.0 - x)


def drift_sawtooth(x):
    x = np.asarray(x, dtype=float)
    centers = 0.1 + 0.2 * np.clip(np.floor(x / 0.2), 0, 4)
    return 20.0 * np.abs(x - centers) - 1.0


def drift_staircase(x):
    x = np.asarray(x, dtype=float)
    on = ((x > 0.25) & (x <= 0.5)) | (x > 0.75)
    return np.where(on, 1.0, 0.0)


def drift_plateau_ramp(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0.2) & (x <= 0.8), 0.5 * x, -1.0)


def _reference_spec(horizon: float) -> ProblemSpec:
    """The shared coefficient set of all reference experiments."""
    return ProblemSpec(
        source=lambda x: 10.0 + 10.0 * np.asarray(x, dtype=float),
        potential=5.0,
        initial=lambda x: np.sin(np.pi * np.asarray(x, dtype=float)),
        left_flux=1.0,
        right_flux=lambda t: 1.0 + t,
        horizon=horizon,
    )


@dataclass(frozen=True)
class ExperimentPreset:
    """Full description of one reconstruction run."""

    name: str
    spec: ProblemSpec
    q_true: Callable
    solver_grid: tuple[int, int]
    data_grid_refinement: int = 4
    data_points: int = 10001
    noise: NoiseSpec | None = None
    mollify: bool = False
    iteration: IterationConfig = field(default_factory=IterationConfig)
    tikhonov: TikhonovConfig = field(default_factory=TikhonovConfig)

    def __post_init__(self):
        if self.data_grid_refinement < 1:
            raise ConfigurationError(
                f"data_grid_refinement must be >= 1, got {self.data_grid_refinement}"
            )
        if self.data_points < 3:
            raise ConfigurationError(f"data_points must be >= 3, got {self.data_points}")


_PRESET_TABLE = {
    "ex1a": dict(horizon=1.0, q_true=drift_sine, solver_grid=(100, 100), noisy=False),
    "ex1b": dict(horizon=1.0, q_true=drift_parabolic_join, solver_grid=(100, 100), noisy=False),
    "ex2c": dict(horizon=0.5, q_true=drift_hat, solver_grid=(100, 100), noisy=False),
    "ex2d": dict(horizon=0.5, q_true=drift_sawtooth, solver_grid=(100, 100), noisy=False),
    "ex3e": dict(horizon=1.0, q_true=drift_staircase, solver_grid=(20, 80), noisy=True),
    "ex3f": dict(horizon=1.0, q_true=drift_plateau_ramp, solver_grid=(20, 80), noisy=True),
}


def make_preset(
    name: str,
    *,
    grid_m: int | None = None,
    grid_n: int | None = None,
    refinement: int | None = None,
    data_points: int | None = None,
    noise_level: float | None = None,
    seed: int | None = None,
    mollify: bool | None = None,
    max_iter: int | None = None,
    tol_step: float | None = None,
    lam: float | None = None,
) -> ExperimentPreset:
    """Build a named preset, optionally overriding individual fields."""
    if name not in _PRESET_TABLE:
        raise ConfigurationError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}"
        )
    base = _PRESET_TABLE[name]
    m, n = base["solver_grid"]
    m = grid_m if grid_m is not None else m
    n = grid_n if grid_n is not None else n

    if base["noisy"]:
        level = noise_level if noise_level is not None else 0.01
        iteration = IterationConfig(max_iter=max_iter if max_iter is not None else 5,
                                    tol_step=tol_step if tol_step is not None else 1e-4)
    else:
        level = noise_level if noise_level is not None else 0.0
        iteration = IterationConfig(max_iter=max_iter if max_iter is not None else 3,
                                    tol_step=tol_step if tol_step is not None else 1e-4)
    do_mollify = mollify if mollify is not None else level > 0.0

    noise = NoiseSpec(level=level, seed=seed if seed is not None else 7) if level > 0 else None
    return ExperimentPreset(
        name=name,
        spec=_reference_spec(base["horizon"]),
        q_true=base["q_true"],
        solver_grid=(m, n),
        data_grid_refinement=refinement if refinement is not None else 4,
        data_points=data_points if data_points is not None else 10001,
        noise=noise,
        mollify=do_mollify,
        iteration=iteration,
        tikhonov=TikhonovConfig(lam=lam),
    )


def builtin_presets() -> list[ExperimentPreset]:
    return [make_preset(name) for name in PRESET_NAMES]


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@dataclass
class ResultBundle:
    """Everything one run produced, plus the provenance to reproduce it."""

    preset: ExperimentPreset
    status: str
    error: str | None
    q_true_grid: GridFunction
    q_recovered: GridFunction | None
    trace: IterationTrace | None
    metrics: dict | None
    data_x: np.ndarray
    g_exact: np.ndarray
    g_noisy: np.ndarray
    g_mollified: np.ndarray
    mollification: dict | None
    assumptions: AssumptionReport
    provenance: dict


def _synthesize(preset: ExperimentPreset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward-solve on the refined grid and sample onto the data grid.

    Returns (x_data, exact samples, measured samples); the measurement
    equals the exact samples when the preset carries no noise.
    """
    m, n = preset.solver_grid
    r = preset.data_grid_refinement
    fine = build_grids(m * r, n * r, preset.spec.horizon)
    q_fine = GridFunction.sample(fine.space, preset.q_true)
    field = solve_forward(preset.spec, q_fine, fine)
    g_fine = field.values[-1]

    x_data = np.linspace(0.0, 1.0, preset.data_points)
    g_exact = np.interp(x_data, fine.space.nodes, g_fine)
    if preset.noise is not None and preset.noise.level > 0.0:
        g_measured = add_noise(g_exact, preset.noise)
    else:
        g_measured = g_exact.copy()
    return x_data, g_exact, g_measured


def generate_data(preset: ExperimentPreset) -> np.ndarray:
    """The measurement vector on the data grid (noisy when configured)."""
    return _synthesize(preset)[2]


def run_experiment(
    preset: ExperimentPreset | str,
    out_dir: str | Path | None = None,
    formats: tuple[str, ...] = FORMATS,
) -> ResultBundle:
    """Execute generate -> (mollify) -> restrict -> invert -> metrics.

    Inversion failures (divergence, hopeless data) are captured into the
    bundle rather than raised, so comparative runs can examine them.
    """
    if isinstance(preset, str):
        preset = make_preset(preset)
    spec = preset.spec
    m, n = preset.solver_grid
    grids = build_grids(m, n, spec.horizon)
    q_true_grid = GridFunction.sample(grids.space, preset.q_true)

    x_data, g_exact, g_measured = _synthesize(preset)

    mollification = None
    if preset.mollify and preset.noise is not None and preset.noise.level > 0.0:
        n_pts = preset.data_points
        design = build_design_matrix(n_pts)
        penalty = build_regularization_matrix(n_pts)
        h_data = 1.0 / (n_pts - 1)
        g_tilde = assemble_rhs(g_measured, spec.left_flux, float(spec.right_flux(spec.horizon)), h_data)
        sigma_abs = noise_sigma(g_exact, preset.noise)
        if preset.tikhonov.lam is not None:
            lam = preset.tikhonov.lam
            mode = "fixed"
        else:
            lam = select_lambda(design, penalty, g_tilde, preset.noise,
                                sigma_abs=sigma_abs, config=preset.tikhonov)
            mode = "discrepancy"
        g_star = solve_tikhonov(design, penalty, g_tilde, lam)
        residual = float(np.linalg.norm(design @ g_star - g_tilde))
        mollification = {
            "lambda": float(lam),
            "mode": mode,
            "residual": residual,
            "target": float(preset.tikhonov.safety * np.sqrt(n_pts) * sigma_abs),
            "sigma_abs": float(sigma_abs),
            "data_points": int(n_pts),
        }
    else:
        g_star = g_measured

    data_grid_fn = restrict(g_star, grids.space)

    status = "ok"
    error = None
    q_rec = None
    trace = None
    metrics = None
    try:
        q_rec, trace = run_iteration(data_grid_fn, spec, grids, preset.iteration)
        metrics = error_metrics(q_rec, q_true_grid)
    except DivergenceError as exc:
        status = "failed"
        error = str(exc)
        trace = exc.trace
    except DataQualityError as exc:
        status = "failed"
        error = str(exc)

    assumptions = validate_assumptions(spec, q_true_grid, data=data_grid_fn)

    noise = preset.noise
    provenance = {
        "preset": preset.name,
        "tool_version": __version__,
        "grid_m": int(m),
        "grid_n": int(n),
        "horizon": float(spec.horizon),
        "refinement": int(preset.data_grid_refinement),
        "inverse_crime_guard": bool(preset.data_grid_refinement >= 2),
        "data_points": int(preset.data_points),
        "noise_level": float(noise.level) if noise is not None else 0.0,
        "seed": int(noise.seed) if noise is not None else None,
        "mollify": bool(preset.mollify),
        "max_iter": int(preset.iteration.max_iter),
        "tol_step": float(preset.iteration.tol_step),
    }

    bundle = ResultBundle(
        preset=preset,
        status=status,
        error=error,
        q_true_grid=q_true_grid,
        q_recovered=q_rec,
        trace=trace,
        metrics=metrics,
        data_x=x_data,
        g_exact=g_exact,
        g_noisy=g_measured,
        g_mollified=np.asarray(g_star, dtype=float),
        mollification=mollification,
        assumptions=assumptions,
        provenance=provenance,
    )
    if out_dir is not None:
        emit_outputs(bundle, out_dir, formats)
    return bundle


# ---------------------------------------------------------------------------
# Output emission
# ---------------------------------------------------------------------------

def _csv_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def emit_outputs(
    bundle: ResultBundle,
    out_dir: str | Path,
    formats: tuple[str, ...] = FORMATS,
) -> list[Path]:
    """Write drift.csv, solution.csv, trace.json and figure-<preset>.svg.

    All numbers are written with shortest round-trip formatting and stable
    key ordering, so identical bundles produce identical bytes.
    """
    for fmt in formats:
        if fmt not in FORMATS:
            raise ConfigurationError(f"unknown output format {fmt!r}; expected subset of {FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    grid = bundle.q_true_grid.grid
    x = grid.nodes

    if "csv" in formats:
        path = out / "drift.csv"
        iterates = bundle.trace.iterates if bundle.trace is not None else []
        header = ["x", "q_true"] + [f"q_{k}" for k in range(len(iterates))]
        lines = [",".join(header)]
        cols = [x, bundle.q_true_grid.values] + [it.values for it in iterates]
        for i in range(grid.m + 1):
            lines.append(_csv_row(col[i] for col in cols))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)

        path = out / "solution.csv"
        g_exact = restrict(bundle.g_exact, grid).values
        g_noisy = restrict(bundle.g_noisy, grid).values
        g_moll = restrict(bundle.g_mollified, grid).values
        lines = ["x,g_exact,g_noisy,g_mollified"]
        for i in range(grid.m + 1):
            lines.append(_csv_row((x[i], g_exact[i], g_noisy[i], g_moll[i])))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)

    if "json" in formats:
        path = out / "trace.json"
        doc = {
            "status": bundle.status,
            "error": bundle.error,
            "provenance": bundle.provenance,
            "iteration": bundle.trace.as_dict() if bundle.trace is not None else None,
            "metrics": bundle.metrics,
            "mollification": bundle.mollification,
            "assumptions": bundle.assumptions.as_dict(),
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)

    if "svg" in formats:
        path = out / f"figure-{bundle.preset.name}.svg"
        series = [("true drift", x, bundle.q_true_grid.values)]
        if bundle.q_recovered is not None:
            series.append(("recovered drift", x, bundle.q_recovered.values))
        path.write_text(line_plot_svg(series, f"drift reconstruction: {bundle.preset.name}"),
                        encoding="utf-8")
        written.append(path)

    return written


def run_suite(
    out_root: str | Path,
    formats: tuple[str, ...] = FORMATS,
    names: tuple[str, ...] = PRESET_NAMES,
) -> dict[str, ResultBundle]:
    """Run every preset, each into its own subdirectory of `out_root`."""
    results: dict[str, ResultBundle] = {}
    for name in names:
        results[name] = run_experiment(name, Path(out_root) / name, formats)
    return results
