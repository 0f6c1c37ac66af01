"""B-spline and Fourier bases: evaluation, derivatives, curvature penalties.

Every link function in the package is represented as g(s) = phi(s) @ d for a
fixed B-spline basis phi. This module owns basis construction, evaluation of
the basis and its derivatives, the second-derivative penalty matrix, and the
Fourier inner-product reduction that turns functional covariate histories
into ordinary design columns.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import BSpline

__all__ = [
    "SplineBasis",
    "PenaltyMatrix",
    "FourierBasis",
    "make_spline_basis",
    "basis_for_index",
    "basis_matrix",
    "eval_basis",
    "greville_abscissae",
    "penalty_matrix",
    "penalty_eigh",
    "fourier_matrix",
    "fourier_design",
]


@dataclass(frozen=True)
class SplineBasis:
    """B-spline basis of a given degree and dimension on a fixed domain.

    The knot sequence has full multiplicity (degree + 1) at both ends and
    equally spaced interior knots, so the basis spans all polynomials up to
    the degree on [lo, hi]. Instances are immutable and hashable; the penalty
    matrix is cached per instance.
    """

    degree: int
    dim: int
    knots: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if self.dim < self.degree + 1:
            raise ValueError("basis dim must be at least degree + 1")
        if len(self.knots) != self.dim + self.degree + 1:
            raise ValueError("knot count must equal dim + degree + 1")
        arr = np.asarray(self.knots, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("knots must be finite")
        if np.any(np.diff(arr) < 0):
            raise ValueError("knots must be nondecreasing")
        if not arr[self.degree] < arr[-self.degree - 1]:
            raise ValueError("domain must have positive width")

    @property
    def lo(self) -> float:
        return self.knots[self.degree]

    @property
    def hi(self) -> float:
        return self.knots[-self.degree - 1]

    @cached_property
    def knot_array(self) -> np.ndarray:
        arr = np.asarray(self.knots, dtype=float)
        arr.flags.writeable = False
        return arr

    def reflected(self) -> "SplineBasis":
        """The mirror-image basis on [-hi, -lo].

        Basis function j of the reflection evaluated at -s equals basis
        function dim-1-j of the original at s, so reversing a coefficient
        vector re-expresses the same link under a negated index.
        """
        return SplineBasis(self.degree, self.dim, tuple(-k for k in reversed(self.knots)))


@dataclass(frozen=True, eq=False)
class PenaltyMatrix:
    """Gram matrix of second derivatives: entries[i, j] = integral of
    phi_i'' * phi_j'' over the basis domain."""

    entries: np.ndarray
    basis: SplineBasis


@dataclass(frozen=True)
class FourierBasis:
    """Orthonormal Fourier basis on a window of the given period length.

    dim must be odd: one constant function plus (dim - 1) / 2 sine/cosine
    pairs, all normalized to unit L2 norm over one period.
    """

    dim: int = 15
    period: float = 1.0

    def __post_init__(self) -> None:
        if self.dim < 1 or self.dim % 2 == 0:
            raise ValueError("Fourier dim must be a positive odd integer")
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError("period must be positive and finite")


def make_spline_basis(lo: float, hi: float, dim: int = 25, degree: int = 5) -> SplineBasis:
    """Build a basis with full boundary multiplicity and equally spaced
    interior knots on [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("domain endpoints must be finite with lo < hi")
    n_interior = dim - degree - 1
    interior = np.linspace(lo, hi, n_interior + 2)[1:-1]
    knots = [lo] * (degree + 1) + list(interior) + [hi] * (degree + 1)
    return SplineBasis(degree=degree, dim=dim, knots=tuple(float(k) for k in knots))


def basis_for_index(values: np.ndarray, dim: int = 25, degree: int = 5, pad: float = 0.05) -> SplineBasis:
    """Basis whose domain covers the given index values with relative padding.

    The padding leaves room for the index to drift as the coefficients move
    during optimization; evaluation outside the padded domain clamps to the
    boundary rather than extrapolating.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise ValueError("index values must be nonempty and finite")
    lo = float(values.min())
    hi = float(values.max())
    width = hi - lo
    if width == 0.0:
        # degenerate index: fall back to a unit window around the point
        lo, hi = lo - 0.5, hi + 0.5
    else:
        lo -= pad * width
        hi += pad * width
    return make_spline_basis(lo, hi, dim=dim, degree=degree)


def _design_all(knots: np.ndarray, degree: int, x: np.ndarray, deriv: int) -> np.ndarray:
    """Design matrix of every degree-`degree` B-spline on `knots`, derivative
    order `deriv`, via the standard degree-reduction recurrence."""
    if deriv == 0:
        return BSpline.design_matrix(x, knots, degree, extrapolate=False).toarray()
    lower = _design_all(knots, degree - 1, x, deriv - 1)
    n_funcs = len(knots) - degree - 1
    left_den = knots[degree : degree + n_funcs] - knots[:n_funcs]
    right_den = knots[degree + 1 : degree + 1 + n_funcs] - knots[1 : 1 + n_funcs]
    # zero-width windows (repeated boundary knots) contribute nothing
    left = np.divide(degree, left_den, out=np.zeros(n_funcs), where=left_den > 0)
    right = np.divide(degree, right_den, out=np.zeros(n_funcs), where=right_den > 0)
    return lower[:, :n_funcs] * left - lower[:, 1 : n_funcs + 1] * right


def _design_sorted(basis: SplineBasis, x: np.ndarray, derivs: tuple[int, ...]) -> list[np.ndarray]:
    # design_matrix documents sorted input; sort once, evaluate, unsort
    order = np.argsort(x, kind="stable")
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.size)
    xs = x[order]
    return [_design_all(basis.knot_array, basis.degree, xs, d)[inverse] for d in derivs]


def basis_matrix(basis: SplineBasis, s, deriv: int = 0) -> np.ndarray:
    """Evaluate all basis functions (or a derivative) at the points s.

    Points outside [lo, hi] are clamped to the nearest endpoint, so the
    returned rows continue the boundary value constantly.
    """
    return basis_matrices(basis, s, (deriv,))[0]


def basis_matrices(basis: SplineBasis, s, derivs: tuple[int, ...]) -> list[np.ndarray]:
    """Evaluate several derivative orders at once (shared sorting pass)."""
    for d in derivs:
        if not 0 <= d:
            raise ValueError("derivative order must be nonnegative")
        if d > basis.degree:
            raise ValueError(f"derivative order {d} exceeds spline degree {basis.degree}")
    x = np.atleast_1d(np.asarray(s, dtype=float))
    if x.ndim != 1:
        raise ValueError("evaluation points must be a scalar or 1-d array")
    if not np.all(np.isfinite(x)):
        raise ValueError("evaluation points must be finite")
    x = np.clip(x, basis.lo, basis.hi)
    return _design_sorted(basis, x, derivs)


def eval_basis(basis: SplineBasis, s: float, deriv: int = 0) -> np.ndarray:
    """Evaluate all basis functions at a single point; returns a dim-vector."""
    return basis_matrix(basis, [s], deriv)[0]


def greville_abscissae(basis: SplineBasis) -> np.ndarray:
    """Knot averages xi_j such that sum_j xi_j phi_j(s) = s on the domain.

    These are the exact coefficients of the identity map in the basis
    (degree >= 1), used to initialize link coefficients.
    """
    if basis.degree < 1:
        raise ValueError("Greville abscissae need degree >= 1")
    t = basis.knot_array
    k = basis.degree
    return np.array([t[j + 1 : j + k + 1].mean() for j in range(basis.dim)])


@functools.lru_cache(maxsize=64)
def _penalty_cached(basis: SplineBasis, nodes_per_span: int | None) -> np.ndarray:
    t = basis.knot_array
    k = basis.degree
    if nodes_per_span is None:
        # exact for the squared second derivative, a piecewise polynomial of
        # degree 2 (degree - 2) on each span
        nodes_per_span = math.ceil((2 * (k - 2) + 1) / 2)
    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_span)
    pts = []
    wts = []
    for j in range(k, len(t) - k - 2 + 1):
        a, b = t[j], t[j + 1]
        if b <= a:
            continue
        half = 0.5 * (b - a)
        pts.append(half * nodes + 0.5 * (a + b))
        wts.append(half * weights)
    pts = np.concatenate(pts)
    wts = np.concatenate(wts)
    b2 = basis_matrix(basis, pts, 2)
    entries = b2.T @ (b2 * wts[:, None])
    entries = 0.5 * (entries + entries.T)
    entries.flags.writeable = False
    return entries


def penalty_matrix(basis: SplineBasis, nodes_per_span: int | None = None) -> PenaltyMatrix:
    """Second-derivative penalty matrix, by Gauss-Legendre quadrature per
    knot span with an exact node count (override only for diagnostics)."""
    if basis.degree < 2:
        raise ValueError("second-derivative penalty needs degree >= 2")
    return PenaltyMatrix(entries=_penalty_cached(basis, nodes_per_span), basis=basis)


@functools.lru_cache(maxsize=64)
def penalty_eigh(basis: SplineBasis) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition (eigenvalues, eigenvectors) of the penalty matrix,
    eigenvalues clipped at zero. In these coordinates the penalty quadratic
    form is diagonal, which evaluates free of the cancellation that plagues
    P @ d for near-affine coefficient vectors."""
    w, V = np.linalg.eigh(_penalty_cached(basis, None))
    w = np.maximum(w, 0.0)
    w.flags.writeable = False
    V.flags.writeable = False
    return w, V


def fourier_matrix(basis: FourierBasis, t) -> np.ndarray:
    """Values of the orthonormal Fourier functions at times t.

    Column 0 is the constant 1/sqrt(period); columns 2j-1 and 2j are the
    unit-norm sine and cosine at frequency j.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(t)):
        raise ValueError("time grid must be finite")
    period = basis.period
    out = np.empty((t.size, basis.dim))
    out[:, 0] = 1.0 / math.sqrt(period)
    amp = math.sqrt(2.0 / period)
    for j in range(1, (basis.dim - 1) // 2 + 1):
        arg = 2.0 * math.pi * j * t / period
        out[:, 2 * j - 1] = amp * np.sin(arg)
        out[:, 2 * j] = amp * np.cos(arg)
    return out


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    w = np.empty_like(grid)
    w[0] = 0.5 * (grid[1] - grid[0])
    w[-1] = 0.5 * (grid[-1] - grid[-2])
    w[1:-1] = 0.5 * (grid[2:] - grid[:-2])
    return w


def fourier_design(histories, grid, basis: FourierBasis) -> np.ndarray:
    """Trapezoid-rule inner products of each history row with each Fourier
    basis function; the resulting columns act as ordinary covariates."""
    try:
        histories = np.asarray(histories, dtype=float)
    except ValueError as exc:
        raise ValueError("histories rows must all share one time grid") from exc
    if histories.ndim == 1:
        histories = histories[None, :]
    if histories.ndim != 2:
        raise ValueError("histories rows must all share one time grid")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size != histories.shape[1]:
        raise ValueError("grid length must match history row length")
    if grid.size < 2 * basis.dim:
        raise ValueError(
            f"under-resolved histories: {grid.size} samples for {basis.dim} "
            f"basis functions (need at least {2 * basis.dim})"
        )
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if not (np.all(np.isfinite(histories)) and np.all(np.isfinite(grid))):
        raise ValueError("histories and grid must be finite")
    w = _trapezoid_weights(grid)
    return (histories * w) @ fourier_matrix(basis, grid)
