"""Noise synthesis and penalized-least-squares mollification of the data.

Noisy final-time samples on a fine uniform grid of K points are smoothed by
solving

    min_g ||A g - g~||^2 + lambda ||R g||^2

where A is the identity on interior samples with the two boundary rows
replaced by first-difference Neumann constraints, R is the scaled
second-difference penalty, and g~ carries h*b1 and h*b2(T) in its first and
last entries.  The normal equations are pentadiagonal and symmetric
positive definite, so the solve is O(K) however large the data grid is.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import ConfigurationError, IllPosedError
from .model import GridFunction, SpatialGrid, _readonly


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded Gaussian measurement noise, relative to the data sup norm."""

    level: float
    seed: int = 7
    scaling: str = "relative-to-sup"

    def __post_init__(self):
        if not (self.level >= 0.0 and np.isfinite(self.level)):
            raise ConfigurationError(f"noise level must be finite and >= 0, got {self.level!r}")
        if self.scaling != "relative-to-sup":
            raise ConfigurationError(f"unsupported noise scaling {self.scaling!r}")


@dataclass(frozen=True)
class TikhonovConfig:
    """Penalty weight, fixed or selected by the discrepancy principle.

    `lambda_max=None` scales the search ceiling with the data-grid size:
    the penalty rows carry a 1/(K-1)^2 factor, so the weight that matters
    is lambda/(K-1)^4 and a fixed ceiling would stop smoothing anything
    already at modest K.
    """

    lam: float | None = None
    safety: float = 1.01
    lambda_min: float = 1e-12
    lambda_max: float | None = None
    grid_points: int = 60

    def __post_init__(self):
        if self.lam is not None and not (self.lam > 0.0):
            raise ConfigurationError(f"fixed lambda must be > 0, got {self.lam!r}")
        if self.lambda_max is not None and not (0.0 < self.lambda_min < self.lambda_max):
            raise ConfigurationError(
                f"need 0 < lambda_min < lambda_max, got {self.lambda_min!r}, {self.lambda_max!r}"
            )
        if not (self.lambda_min > 0.0):
            raise ConfigurationError(f"lambda_min must be > 0, got {self.lambda_min!r}")
        if self.grid_points < 2:
            raise ConfigurationError(f"grid_points must be >= 2, got {self.grid_points}")

    def resolved_lambda_max(self, n_points: int) -> float:
        if self.lambda_max is not None:
            return self.lambda_max
        # effective weight on raw second differences is lambda/(K-1)^4;
        # beyond ~1e14 the normal equations stop being numerically definite
        return 1e14 * float(n_points - 1) ** 4


@dataclass(frozen=True, eq=False)
class BandedSystem:
    """Symmetric pentadiagonal normal equations in upper-band storage.

    `bands[2]` is the main diagonal, `bands[1]` the first superdiagonal
    (shifted right by one), `bands[0]` the second (shifted by two) - the
    layout the banded Cholesky solver expects.
    """

    bands: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bands, dtype=float)
        r = np.asarray(self.rhs, dtype=float)
        if b.ndim != 2 or b.shape[0] != 3 or b.shape[1] != r.size:
            raise ConfigurationError(f"bands shape {b.shape} inconsistent with rhs length {r.size}")
        object.__setattr__(self, "bands", _readonly(b))
        object.__setattr__(self, "rhs", _readonly(r))

    @property
    def order(self) -> int:
        return self.rhs.size


def noise_sigma(g_exact: np.ndarray, noise: NoiseSpec) -> float:
    """Absolute noise standard deviation: level times sup of the data."""
    return noise.level * float(np.max(np.abs(np.asarray(g_exact, dtype=float))))


def add_noise(g_exact: np.ndarray, noise: NoiseSpec) -> np.ndarray:
    """Add i.i.d. Gaussian noise, reproducible for a given seed."""
    g = np.asarray(g_exact, dtype=float)
    if g.size < 3:
        raise ConfigurationError(f"need at least 3 data points, got {g.size}")
    if noise.level == 0.0:
        return g.copy()
    rng = np.random.default_rng(noise.seed)
    return g + noise_sigma(g, noise) * rng.standard_normal(g.shape)


def build_design_matrix(n_points: int) -> scipy.sparse.csr_matrix:
    """K x K data-fit matrix: identity on interior samples, first-difference
    Neumann rows first and last."""
    if n_points < 3:
        raise ConfigurationError(f"design matrix needs at least 3 data points, got {n_points}")
    main = np.ones(n_points)
    main[0] = -1.0
    sup = np.zeros(n_points - 1)
    sup[0] = 1.0
    sub = np.zeros(n_points - 1)
    sub[-1] = -1.0
    return scipy.sparse.diags([sub, main, sup], offsets=[-1, 0, 1], format="csr")


def build_regularization_matrix(n_points: int) -> scipy.sparse.csr_matrix:
    """(K-2) x K second-difference penalty rows (1, -2, 1) / (K-1)^2."""
    if n_points < 3:
        raise ConfigurationError(f"regularization matrix needs at least 3 data points, got {n_points}")
    s = 1.0 / (n_points - 1) ** 2
    rows = n_points - 2
    ones = np.full(rows, s)
    return scipy.sparse.diags(
        [ones, -2.0 * ones, ones], offsets=[0, 1, 2], shape=(rows, n_points), format="csr"
    )


def assemble_rhs(g_noisy: np.ndarray, left_flux: float, right_flux_at_T: float, h_data: float) -> np.ndarray:
    """Fit target: boundary entries become h*b1 and h*b2(T), interior
    entries are the (noisy) samples."""
    g = np.asarray(g_noisy, dtype=float)
    if g.size < 3:
        raise ConfigurationError(f"rhs needs at least 3 data points, got length {g.size}")
    if not (h_data > 0.0):
        raise ConfigurationError(f"data spacing must be > 0, got {h_data!r}")
    out = g.copy()
    out[0] = h_data * left_flux
    out[-1] = h_data * right_flux_at_T
    return out


def normal_equations(
    design: scipy.sparse.spmatrix,
    penalty: scipy.sparse.spmatrix,
    g_tilde: np.ndarray,
    lam: float,
) -> BandedSystem:
    """Assemble (A^T A + lambda R^T R) g = A^T g~ in upper-band storage."""
    g_tilde = np.asarray(g_tilde, dtype=float)
    n = design.shape[0]
    if g_tilde.shape != (n,):
        raise ConfigurationError(f"rhs length {g_tilde.size} does not match matrix order {n}")
    normal = (design.T @ design + lam * (penalty.T @ penalty)).tocsr()
    bands = np.zeros((3, n))
    bands[2] = normal.diagonal(0)
    bands[1, 1:] = normal.diagonal(1)
    bands[0, 2:] = normal.diagonal(2)
    return BandedSystem(bands, design.T @ g_tilde)


def solve_tikhonov(
    design: scipy.sparse.spmatrix,
    penalty: scipy.sparse.spmatrix,
    g_tilde: np.ndarray,
    lam: float,
) -> np.ndarray:
    """Minimize ||A g - g~||^2 + lambda ||R g||^2 via the banded normal
    equations; cost is linear in the number of data points."""
    if lam < 0.0:
        raise ConfigurationError(f"lambda must be >= 0, got {lam!r}")
    system = normal_equations(design, penalty, g_tilde, lam)
    try:
        return scipy.linalg.solveh_banded(system.bands, system.rhs, lower=False)
    except np.linalg.LinAlgError as exc:
        raise IllPosedError(f"normal equations not positive definite (lambda={lam!r}): {exc}") from exc


def select_lambda(
    design: scipy.sparse.spmatrix,
    penalty: scipy.sparse.spmatrix,
    g_tilde: np.ndarray,
    noise: NoiseSpec,
    sigma_abs: float | None = None,
    config: TikhonovConfig | None = None,
) -> float:
    """Discrepancy-principle search for the penalty weight.

    Finds the smallest lambda whose fit residual reaches
    safety * sqrt(K) * sigma: a logarithmic grid scan brackets the
    crossing, then bisection in log-lambda pins it down.  If even the
    largest lambda falls short, the smallest grid value is returned with a
    warning.  `sigma_abs` defaults to level * sup of the interior samples
    (pass the exact scale when it is known).
    """
    cfg = config or TikhonovConfig()
    g_tilde = np.asarray(g_tilde, dtype=float)
    n = g_tilde.size
    if sigma_abs is None:
        sigma_abs = noise.level * float(np.max(np.abs(g_tilde[1:-1])))
    target = cfg.safety * np.sqrt(n) * sigma_abs

    def residual_at(lam: float) -> float:
        g_star = solve_tikhonov(design, penalty, g_tilde, lam)
        return float(np.linalg.norm(design @ g_star - g_tilde))

    lam_max = cfg.resolved_lambda_max(n)
    grid = np.geomspace(cfg.lambda_min, lam_max, cfg.grid_points)
    hi = None
    lo = None
    for lam in grid:
        try:
            reached = residual_at(float(lam)) >= target
        except IllPosedError:
            break  # conditioning limit: treat as the end of the scan
        if reached:
            hi = float(lam)
            break
        lo = float(lam)
    if hi is None:
        warnings.warn(
            f"no lambda in [{cfg.lambda_min:g}, {lam_max:g}] reaches the discrepancy "
            f"target {target:g}; returning lambda_min",
            stacklevel=2,
        )
        return float(cfg.lambda_min)
    if lo is None:
        return hi  # already satisfied at the smallest grid value

    # residual is nondecreasing in lambda: bisect the bracketing interval
    for _ in range(60):
        mid = float(np.sqrt(lo * hi))
        if mid <= lo or mid >= hi:
            break
        if residual_at(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def restrict(
    g_star: np.ndarray,
    target: SpatialGrid,
    span: tuple[float, float] = (0.0, 1.0),
) -> GridFunction:
    """Piecewise-linear restriction of data-grid values onto solver nodes."""
    g = np.asarray(g_star, dtype=float)
    if g.size < 2:
        raise ConfigurationError(f"need at least 2 data values to interpolate, got {g.size}")
    lo, hi = span
    data_x = np.linspace(lo, hi, g.size)
    nodes = target.nodes
    if nodes[0] < lo or nodes[-1] > hi:
        raise ConfigurationError(
            f"target nodes [{nodes[0]:g}, {nodes[-1]:g}] fall outside the data range [{lo:g}, {hi:g}]"
        )
    return GridFunction(target, np.interp(nodes, data_x, g))
