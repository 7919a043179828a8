"""Domain types, uniform grids, finite-difference stencils, and the
admissibility validator for the 1D drift-recovery problem.

The underlying model is the parabolic equation

    u_t - u_xx + q(x) u_x + C_p u = f(x)   on (0,1) x (0,T],
    u_x(0,t) = b1,  u_x(1,t) = b2(t),      u(x,0) = v(x),

with unknown drift q(x) and measurement g(x) = u(x,T).  Everything here is
pure and immutable after construction, so values can be shared freely
across concurrent callers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError

STENCIL_KINDS = ("time_flux", "interior", "centered_first", "centered_second")


def sample_on(fn: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate a scalar function on an array of points, tolerating
    callables that only accept scalars or that return scalars."""
    xs = np.asarray(xs, dtype=float)
    try:
        out = np.asarray(fn(xs), dtype=float)
    except (TypeError, ValueError):
        out = np.asarray([fn(float(x)) for x in xs], dtype=float)
    if out.ndim == 0:
        out = np.full(xs.shape, float(out))
    if out.shape != xs.shape:
        out = np.asarray([fn(float(x)) for x in xs], dtype=float)
    return out


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid of m intervals (m+1 nodes) on [0, 1]."""

    m: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 3:
            raise ConfigurationError(f"grid-interval count m must be an integer >= 3, got {self.m!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)


@dataclass(frozen=True)
class TemporalGrid:
    """Uniform grid of n_steps steps on [0, horizon]."""

    n_steps: int
    horizon: float

    def __post_init__(self):
        if not isinstance(self.n_steps, (int, np.integer)) or self.n_steps < 1:
            raise ConfigurationError(f"step count n_steps must be an integer >= 1, got {self.n_steps!r}")
        if not (self.horizon > 0.0 and np.isfinite(self.horizon)):
            raise ConfigurationError(f"horizon T must be finite and > 0, got {self.horizon!r}")

    @property
    def tau(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True)
class GridPair:
    space: SpatialGrid
    time: TemporalGrid


def build_grids(m: int, n_steps: int, horizon: float) -> GridPair:
    """Construct the consistent spatial/temporal grid pair used everywhere."""
    return GridPair(SpatialGrid(m), TemporalGrid(n_steps, horizon))


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients and data of the forward model.

    `source_xt` is a verification-only hook for manufactured solutions with
    a time-dependent source; all production presets use `source` alone.
    """

    source: Callable[[np.ndarray], np.ndarray]
    potential: float
    initial: Callable[[np.ndarray], np.ndarray]
    left_flux: float
    right_flux: Callable[[float], float]
    horizon: float
    source_xt: Callable[[np.ndarray, float], np.ndarray] | None = None

    def __post_init__(self):
        if not (self.potential > 0.0 and np.isfinite(self.potential)):
            raise ConfigurationError(f"potential C_p must be finite and > 0, got {self.potential!r}")
        if not np.isfinite(self.left_flux):
            raise ConfigurationError(f"left_flux b1 must be finite, got {self.left_flux!r}")
        if not (self.horizon > 0.0 and np.isfinite(self.horizon)):
            raise ConfigurationError(f"horizon T must be finite and > 0, got {self.horizon!r}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values attached to the nodes of a spatial grid."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.m + 1,):
            raise ConfigurationError(
                f"grid function needs {self.grid.m + 1} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("grid function values must all be finite")
        object.__setattr__(self, "values", _readonly(vals))

    @classmethod
    def sample(cls, grid: SpatialGrid, fn: Callable) -> "GridFunction":
        return cls(grid, sample_on(fn, grid.nodes))


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Full solution array u[n, i] over a grid pair (n = time, i = space)."""

    grids: GridPair
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        shape = (self.grids.time.n_steps + 1, self.grids.space.m + 1)
        if vals.shape != shape:
            raise ConfigurationError(f"field needs shape {shape}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("field values must all be finite")
        object.__setattr__(self, "values", _readonly(vals))

    def final_time(self) -> GridFunction:
        return GridFunction(self.grids.space, self.values[-1])


def apply_stencil(kind: str, u: GridFunction, tau: float | None = None) -> GridFunction:
    """Apply one of the four node-wise stencils of the discrete scheme.

    time_flux        u_i/tau at interior nodes, one-sided first difference
                     (u_1-u_0)/h and (u_m-u_{m-1})/h at the boundary nodes
    interior         identity at interior nodes, zero at boundary nodes
    centered_first   (u_{i+1}-u_{i-1})/(2h) interior, zero at boundaries
    centered_second  (u_{i+1}-2u_i+u_{i-1})/h^2 interior, zero at boundaries
    """
    v = u.values
    h = u.grid.h
    out = np.zeros_like(v)
    if kind == "time_flux":
        if tau is None or not (tau > 0.0):
            raise ConfigurationError("stencil 'time_flux' requires tau > 0")
        out[0] = (v[1] - v[0]) / h
        out[1:-1] = v[1:-1] / tau
        out[-1] = (v[-1] - v[-2]) / h
    elif kind == "interior":
        out[1:-1] = v[1:-1]
    elif kind == "centered_first":
        out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    elif kind == "centered_second":
        out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
    else:
        raise ConfigurationError(f"unknown stencil kind {kind!r}; expected one of {STENCIL_KINDS}")
    return GridFunction(u.grid, out)


# ---------------------------------------------------------------------------
# Admissibility diagnostics
# ---------------------------------------------------------------------------

CLAUSES = ("a", "b", "c", "d", "e", "f")


@dataclass(frozen=True)
class AssumptionReport:
    """Per-clause admissibility verdicts for a problem setup.

    Violations are reported, never enforced: several of the reference
    experiments intentionally run with a setup that fails clause (f), so
    the validator must not abort anything.
    """

    c1_bound: float
    c_v: float
    clause_results: dict[str, str]
    lower_bound_m: float
    notes: dict[str, str] = field(default_factory=dict)

    def ok(self) -> bool:
        return all(v == "pass" for v in self.clause_results.values())

    def as_dict(self) -> dict:
        return {
            "c1_bound": float(self.c1_bound),
            "c_v": float(self.c_v),
            "clause_results": dict(self.clause_results),
            "lower_bound_m": float(self.lower_bound_m),
            "notes": dict(self.notes),
        }


def _derivative_sups(values: np.ndarray, h: float, orders: int) -> list[float]:
    """Sup norms of successive centered divided differences, order 0..orders."""
    sups = [float(np.max(np.abs(values)))]
    cur = values
    for _ in range(orders):
        cur = (cur[2:] - cur[:-2]) / (2.0 * h)
        sups.append(float(np.max(np.abs(cur))) if cur.size else float("nan"))
    return sups


def validate_assumptions(
    spec: ProblemSpec,
    drift: GridFunction,
    data: GridFunction | None = None,
    audit_points: int = 1001,
) -> AssumptionReport:
    """Measure the admissibility clauses with discrete norms.

    Norms are sampled sup norms with centered divided differences on a
    uniform audit grid; the drift is linearly interpolated onto that grid.
    When final-time `data` is supplied, the minimum interior slope of the
    data (the positive lower bound the theory requires) is recorded too.
    """
    xa = np.linspace(0.0, 1.0, audit_points)
    ha = xa[1] - xa[0]

    qa = np.interp(xa, drift.grid.nodes, drift.values)
    dqa = np.empty_like(qa)
    dqa[1:-1] = (qa[2:] - qa[:-2]) / (2.0 * ha)
    dqa[0] = (qa[1] - qa[0]) / ha
    dqa[-1] = (qa[-1] - qa[-2]) / ha
    c1_bound = float(np.max(np.abs(qa)) + np.max(np.abs(dqa)))

    va = sample_on(spec.initial, xa)
    v_sups = _derivative_sups(va, ha, 3)
    c_v = float(max(v_sups))
    v_prime = (va[2:] - va[:-2]) / (2.0 * ha)

    fa = sample_on(spec.source, xa)
    f_prime = (fa[2:] - fa[:-2]) / (2.0 * ha)

    T = spec.horizon
    ta = np.linspace(T / audit_points, T, audit_points)
    b2a = sample_on(spec.right_flux, ta)
    b2_prime = (b2a[2:] - b2a[:-2]) / (2.0 * (ta[1] - ta[0]))

    results: dict[str, str] = {}
    notes: dict[str, str] = {}

    results["a"] = "pass" if np.isfinite(c1_bound) else "warn"
    notes["a"] = f"measured |q| + |q'| sup = {c1_bound:.6g}"

    results["b"] = "pass" if spec.potential > c1_bound else "warn"
    notes["b"] = f"C_p = {spec.potential:.6g} vs drift C1 bound {c1_bound:.6g}"

    results["c"] = "pass" if spec.left_flux > 0.0 else "warn"
    notes["c"] = f"b1 = {spec.left_flux:.6g}"

    ok_d = bool(np.all(b2a > 0.0) and np.all(b2_prime > 0.0))
    results["d"] = "pass" if ok_d else "warn"
    notes["d"] = f"min b2 = {np.min(b2a):.6g}, min b2' = {np.min(b2_prime):.6g}"

    ok_e = bool(np.all(v_prime >= -1e-10) and np.isfinite(c_v))
    results["e"] = "pass" if ok_e else "warn"
    notes["e"] = f"min v' = {np.min(v_prime):.6g}, C_v = {c_v:.6g}"

    bound_f = (1.0 + c1_bound + spec.potential) * c_v
    bound_fp = (1.0 + 2.0 * c1_bound + spec.potential) * c_v
    ok_f = bool(np.all(fa >= bound_f) and np.all(f_prime >= bound_fp))
    results["f"] = "pass" if ok_f else "warn"
    notes["f"] = (
        f"min f = {np.min(fa):.6g} vs {bound_f:.6g}; "
        f"min f' = {np.min(f_prime):.6g} vs {bound_fp:.6g}"
    )

    if data is not None:
        slope = (data.values[2:] - data.values[:-2]) / (2.0 * data.grid.h)
        lower_bound_m = float(np.min(slope))
    else:
        lower_bound_m = float("nan")

    return AssumptionReport(
        c1_bound=c1_bound,
        c_v=c_v,
        clause_results=results,
        lower_bound_m=lower_bound_m,
        notes=notes,
    )
