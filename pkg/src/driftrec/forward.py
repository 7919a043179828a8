"""Implicit finite-difference forward solver.

One backward-Euler step of the discrete scheme reads, row by row,

    i = 0:        (u_1 - u_0)/h = b1
    0 < i < m:    u_i/tau - d2(u)_i + q_i d1(u)_i + C_p u_i
                      = u_i^{prev}/tau + f(x_i)
    i = m:        (u_m - u_{m-1})/h = b2(t_n)

with d1, d2 the centered first/second differences.  The matrix does not
depend on time, so it is assembled and factorized once per solve and the
factorization reused for every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError, SingularSystemError
from .model import GridFunction, GridPair, ProblemSpec, SpaceTimeField, _readonly, sample_on

PIVOT_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """Banded storage of one linear step: lower/diag/upper bands plus rhs.

    For order n the bands have lengths n-1, n, n-1; lower[k] sits in row
    k+1 and upper[k] in row k.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        dg = np.asarray(self.diag, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        r = np.asarray(self.rhs, dtype=float)
        n = dg.size
        if n < 2 or lo.shape != (n - 1,) or up.shape != (n - 1,) or r.shape != (n,):
            raise ConfigurationError(
                f"inconsistent band lengths: lower {lo.shape}, diag {dg.shape}, "
                f"upper {up.shape}, rhs {r.shape}"
            )
        object.__setattr__(self, "lower", _readonly(lo))
        object.__setattr__(self, "diag", _readonly(dg))
        object.__setattr__(self, "upper", _readonly(up))
        object.__setattr__(self, "rhs", _readonly(r))

    @property
    def order(self) -> int:
        return self.diag.size


def assemble_step_matrix(spec: ProblemSpec, drift: GridFunction, grids: GridPair) -> TridiagonalSystem:
    """Assemble the time-independent step matrix (rhs left at zero).

    Interior row i carries lower = -1/h^2 - q_i/(2h), diag = 1/tau + 2/h^2
    + C_p, upper = -1/h^2 + q_i/(2h); the two boundary rows are the
    one-sided flux rows (-1/h, 1/h).
    """
    space, time = grids.space, grids.time
    if drift.grid != space:
        raise ConfigurationError(
            f"drift lives on an m={drift.grid.m} grid but grids.space has m={space.m}"
        )
    m = space.m
    h = space.h
    tau = time.tau
    q_int = drift.values[1:-1]

    lower = np.empty(m)
    diag = np.empty(m + 1)
    upper = np.empty(m)

    diag[0] = -1.0 / h
    upper[0] = 1.0 / h
    lower[:-1] = -1.0 / h**2 - q_int / (2.0 * h)
    diag[1:-1] = 1.0 / tau + 2.0 / h**2 + spec.potential
    upper[1:] = -1.0 / h**2 + q_int / (2.0 * h)
    lower[-1] = -1.0 / h
    diag[-1] = 1.0 / h

    return TridiagonalSystem(lower, diag, upper, np.zeros(m + 1))


def _thomas_factor(lower, diag, upper):
    """Forward-elimination pass; returns reusable multiplier arrays.

    Plain Python lists are noticeably faster than ndarray indexing in the
    sequential sweeps, and the float arithmetic is identical.
    """
    lo = [float(v) for v in lower]
    dg = [float(v) for v in diag]
    up = [float(v) for v in upper]
    n = len(dg)
    w = [0.0] * n
    cp = [0.0] * (n - 1)
    piv = dg[0]
    if abs(piv) < PIVOT_FLOOR:
        raise SingularSystemError("zero pivot in row 0")
    w[0] = piv
    for i in range(1, n):
        cp[i - 1] = up[i - 1] / w[i - 1]
        piv = dg[i] - lo[i - 1] * cp[i - 1]
        if abs(piv) < PIVOT_FLOOR:
            raise SingularSystemError(f"zero pivot in row {i}")
        w[i] = piv
    return lo, w, cp


def _thomas_apply(factor, rhs) -> np.ndarray:
    lo, w, cp = factor
    n = len(w)
    r = [float(v) for v in rhs]
    y = [0.0] * n
    y[0] = r[0] / w[0]
    for i in range(1, n):
        y[i] = (r[i] - lo[i - 1] * y[i - 1]) / w[i]
    for i in range(n - 2, -1, -1):
        y[i] = y[i] - cp[i] * y[i + 1]
    return np.asarray(y)


def thomas_solve(system: TridiagonalSystem) -> np.ndarray:
    """Solve the tridiagonal system by the Thomas algorithm (no pivoting)."""
    return _thomas_apply(_thomas_factor(system.lower, system.diag, system.upper), system.rhs)


def solve_forward(spec: ProblemSpec, drift: GridFunction, grids: GridPair) -> SpaceTimeField:
    """March the implicit scheme from the sampled initial condition to T."""
    space, time = grids.space, grids.time
    x = space.nodes
    tau = time.tau
    n_steps = time.n_steps

    system = assemble_step_matrix(spec, drift, grids)
    factor = _thomas_factor(system.lower, system.diag, system.upper)

    u = np.empty((n_steps + 1, space.m + 1))
    u[0] = sample_on(spec.initial, x)
    if not np.all(np.isfinite(u[0])):
        raise ConfigurationError("initial condition sampled to non-finite values")

    x_int = x[1:-1]
    f_int = None if spec.source_xt is not None else sample_on(spec.source, x_int)

    rhs = np.empty(space.m + 1)
    for n in range(1, n_steps + 1):
        t_n = time.times[n]
        rhs[0] = spec.left_flux
        if f_int is None:
            rhs[1:-1] = u[n - 1][1:-1] / tau + np.asarray(spec.source_xt(x_int, t_n), dtype=float)
        else:
            rhs[1:-1] = u[n - 1][1:-1] / tau + f_int
        rhs[-1] = float(spec.right_flux(t_n))
        u[n] = _thomas_apply(factor, rhs)
        if not np.all(np.isfinite(u[n])):
            raise NumericalError(f"forward solution became non-finite at step {n}")

    return SpaceTimeField(grids, u)


def final_time_derivative(field: SpaceTimeField) -> GridFunction:
    """Backward difference of the last two time levels, (u^N - u^{N-1})/tau."""
    tau = field.grids.time.tau
    vals = (field.values[-1] - field.values[-2]) / tau
    return GridFunction(field.grids.space, vals)
