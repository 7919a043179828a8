"""Fixed-point recovery of the drift from final-time data.

The one-step update maps a drift guess to

    update(q) = [f - u_t(., T; q) + g'' - C_p g] / g'

evaluated with the discrete stencils, where u(.,.;q) is the forward
solution with drift q.  Drifts consistent with the data are exactly the
fixed points of this map, the map preserves the nodewise order of its
arguments, and iterating it from the upper-bound initial guess

    q_0 = [f + g'' - C_p g] / g'

produces a nodewise-decreasing sequence.  Each update costs one forward
solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataQualityError, DivergenceError, NumericalError
from .forward import final_time_derivative, solve_forward
from .model import GridFunction, GridPair, ProblemSpec, sample_on


@dataclass(frozen=True)
class IterationConfig:
    """Knobs of the fixed-point loop.

    `denom_floor` is relative: the data slope g' is floored at
    denom_floor * max(interior g') before any division, so noisy data
    cannot produce near-zero or negative denominators.
    """

    max_iter: int = 20
    tol_step: float = 1e-4
    denom_floor: float = 1e-3
    clamp_to_initial: bool = False
    mono_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (self.tol_step > 0.0):
            raise ConfigurationError(f"tol_step must be > 0, got {self.tol_step}")
        if not (self.denom_floor > 0.0):
            raise ConfigurationError(f"denom_floor must be > 0, got {self.denom_floor}")


@dataclass
class IterationTrace:
    """Everything the loop saw: iterates and per-step diagnostics.

    `mono_violations[n]` is the largest nodewise *increase* from iterate n
    to n+1; the theory predicts none beyond discretization noise.
    """

    iterates: list[GridFunction] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    floor_hits: int = 0
    mono_violations: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "n_iterates": len(self.iterates),
            "step_norms": [float(v) for v in self.step_norms],
            "residuals": [float(v) for v in self.residuals],
            "floor_hits": int(self.floor_hits),
            "mono_violations": [float(v) for v in self.mono_violations],
        }


def floored_slope(data: GridFunction, cfg: IterationConfig) -> tuple[np.ndarray, int]:
    """Interior centered slope of the data with the positivity floor applied.

    Returns the floored slopes and the number of nodes that hit the floor.
    """
    v = data.values
    h = data.grid.h
    slope = (v[2:] - v[:-2]) / (2.0 * h)
    scale = float(np.max(slope))
    if scale <= 0.0:
        # fully non-monotone data: keep the floor positive anyway
        scale = float(np.max(np.abs(slope)))
        if scale == 0.0:
            scale = 1.0
    floor = cfg.denom_floor * scale
    hits = int(np.count_nonzero(slope < floor))
    return np.maximum(slope, floor), hits


def _fill_boundaries(interior: np.ndarray) -> np.ndarray:
    """Extend interior node values by linear extrapolation from the two
    nearest interior nodes on each side."""
    full = np.empty(interior.size + 2)
    full[1:-1] = interior
    full[0] = 2.0 * interior[0] - interior[1]
    full[-1] = 2.0 * interior[-1] - interior[-2]
    return full


def initial_drift(data: GridFunction, spec: ProblemSpec, cfg: IterationConfig | None = None) -> GridFunction:
    """Upper-bound starting guess [f + g'' - C_p g] / g' on the data grid.

    Raises `DataQualityError` when more than 20% of the interior slopes sit
    at the safeguard floor; data that rough needs mollification first.
    """
    cfg = cfg or IterationConfig()
    grid = data.grid
    x = grid.nodes
    h = grid.h

    slope, hits = floored_slope(data, cfg)
    n_int = grid.m - 1
    if hits > 0.2 * n_int:
        raise DataQualityError(
            f"{hits} of {n_int} interior data slopes hit the safeguard floor; "
            "the data is too rough to differentiate - mollify it first"
        )

    v = data.values
    curvature = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
    f_int = sample_on(spec.source, x[1:-1])
    q_int = (f_int + curvature - spec.potential * v[1:-1]) / slope
    return GridFunction(grid, _fill_boundaries(q_int))


def drift_update(
    drift: GridFunction,
    data: GridFunction,
    spec: ProblemSpec,
    grids: GridPair,
    cfg: IterationConfig | None = None,
) -> GridFunction:
    """One application of the fixed-point map (one forward solve).

    Nodewise this equals the initial guess minus u_t(., T; drift) / g' at
    interior nodes, with boundary values linearly extrapolated; with
    `clamp_to_initial` the result is additionally capped at the initial
    guess.
    """
    cfg = cfg or IterationConfig()
    field = solve_forward(spec, drift, grids)
    u_t = final_time_derivative(field)
    q0 = initial_drift(data, spec, cfg)
    slope, _ = floored_slope(data, cfg)

    k_int = q0.values[1:-1] - u_t.values[1:-1] / slope
    values = _fill_boundaries(k_int)
    if cfg.clamp_to_initial:
        values = np.minimum(values, q0.values)
    if not np.all(np.isfinite(values)):
        raise NumericalError("drift update produced non-finite values")
    return GridFunction(data.grid, values)


def run_iteration(
    data: GridFunction,
    spec: ProblemSpec,
    grids: GridPair,
    cfg: IterationConfig | None = None,
) -> tuple[GridFunction, IterationTrace]:
    """Iterate the update from the upper-bound guess until the step norm
    drops below `tol_step` or `max_iter` updates have been taken.

    Returns the first iterate whose fixed-point residual is below the
    tolerance (the last computed iterate if the budget runs out), plus the
    full trace.  A non-finite iterate raises `DivergenceError` carrying the
    partial trace.
    """
    cfg = cfg or IterationConfig()
    _, hits = floored_slope(data, cfg)
    q_cur = initial_drift(data, spec, cfg)
    trace = IterationTrace(iterates=[q_cur], floor_hits=hits)

    for _ in range(cfg.max_iter):
        try:
            q_next = drift_update(q_cur, data, spec, grids, cfg)
        except NumericalError as exc:
            raise DivergenceError(f"iteration diverged: {exc}", trace=trace) from exc
        diff = q_next.values - q_cur.values
        step = float(np.max(np.abs(diff)))
        trace.iterates.append(q_next)
        trace.step_norms.append(step)
        trace.residuals.append(step)
        trace.mono_violations.append(float(np.max(diff)))
        if step < cfg.tol_step:
            return q_cur, trace
        q_cur = q_next
    return q_cur, trace


def error_metrics(recovered: GridFunction, reference: GridFunction) -> dict:
    """Relative discrete L2 (trapezoidal weights) and sup-norm errors.

    When the reference has zero norm the absolute norms are returned and
    the `absolute` flag is set.
    """
    if recovered.grid != reference.grid:
        raise ConfigurationError("recovered and reference drifts live on different grids")
    h = reference.grid.h
    w = np.full(reference.grid.m + 1, h)
    w[0] = w[-1] = h / 2.0

    diff = recovered.values - reference.values
    err_l2 = float(np.sqrt(np.sum(w * diff**2)))
    err_inf = float(np.max(np.abs(diff)))
    ref_l2 = float(np.sqrt(np.sum(w * reference.values**2)))
    ref_inf = float(np.max(np.abs(reference.values)))

    if ref_l2 == 0.0 or ref_inf == 0.0:
        return {"rel_l2": err_l2, "rel_linf": err_inf, "absolute": True}
    return {"rel_l2": err_l2 / ref_l2, "rel_linf": err_inf / ref_inf, "absolute": False}
