"""Smoothing selection and covariance machinery on a fitted lambda path.

For a fit with design Phi (basis evaluated at the fitted index values) and
family weights W, the smoother is

    S = Phi (Phi' W Phi + lambda P)^{-1} Phi' W

and GCV, effective degrees of freedom, the residual-variance estimate, and
all cross-lambda coefficient covariances are built from the same K-sized
bracket (Phi' W Phi + lambda P), never from explicit n x n products except
in `smoother_matrix` itself (diagnostic use).
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import basis_matrices, penalty_matrix
from .errors import DegreesOfFreedomError, NumericalError
from .model import Dataset, FitResult, ModelSpec

__all__ = [
    "LambdaPath",
    "CoefCovariance",
    "build_path",
    "fit_weights",
    "smoother_matrix",
    "gcv",
    "sigma2_hat",
    "coef_cov",
]

JITTER = 1e-10


@dataclass(eq=False)
class LambdaPath:
    """All per-lambda fits on the grid plus GCV selection state."""

    spec: ModelSpec
    data: Dataset
    grid: tuple[float, ...]
    fits: tuple[FitResult, ...]
    gcv: np.ndarray
    selected: int
    sigma2: float | None
    weight_ref: np.ndarray
    warnings: tuple[str, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def selected_fit(self) -> FitResult:
        return self.fits[self.selected]

    @property
    def all_converged(self) -> bool:
        return all(f.converged for f in self.fits)


@dataclass(frozen=True, eq=False)
class CoefCovariance:
    """Cross-lambda covariance of the spline coefficient estimates."""

    lambda_i: float
    lambda_j: float
    matrix: np.ndarray


def fit_weights(fit: FitResult) -> np.ndarray:
    """Family weight vector: 1 (gaussian), mu (poisson), pi(1-pi) (logit)."""
    if fit.family == "gaussian_log":
        return np.ones_like(fit.eta)
    if fit.family == "poisson":
        return fit.mu_or_pi.copy()
    pi = fit.mu_or_pi
    return pi * (1.0 - pi)


def _design(fit: FitResult) -> np.ndarray:
    return basis_matrices(fit.basis, fit.index_values, (0,))[0]


def _solve_spd(M: np.ndarray, B: np.ndarray, context: str) -> np.ndarray:
    """Solve M X = B for symmetric positive (semi)definite M, retrying with a
    small diagonal jitter when the factorization fails."""
    try:
        c, low = scipy.linalg.cho_factor(M)
        return scipy.linalg.cho_solve((c, low), B)
    except np.linalg.LinAlgError:
        _warnings.warn(
            f"near-singular system in {context}; retrying with diagonal jitter",
            RuntimeWarning,
            stacklevel=3,
        )
        scale = max(float(np.abs(np.diag(M)).max()), 1.0)
        Mj = M + JITTER * scale * np.eye(M.shape[0])
        return scipy.linalg.solve(Mj, B, assume_a="sym")


def _bracket(fit: FitResult, w: np.ndarray, phi: np.ndarray) -> np.ndarray:
    P = penalty_matrix(fit.basis).entries
    return phi.T @ (phi * w[:, None]) + fit.lam * P


def smoother_matrix(fit: FitResult) -> np.ndarray:
    """The n x n linear map from working response to fitted link values."""
    phi = _design(fit)
    w = fit_weights(fit)
    M = _bracket(fit, w, phi)
    inner = _solve_spd(M, phi.T * w[None, :], "smoother_matrix")
    return phi @ inner


def _trace_terms(fit: FitResult) -> tuple[float, float, np.ndarray, np.ndarray]:
    """(tr S, tr SS', Phi, w) without forming any n x n matrix."""
    phi = _design(fit)
    w = fit_weights(fit)
    M = _bracket(fit, w, phi)
    WPhi = phi * w[:, None]
    A = phi.T @ WPhi
    V = _solve_spd(M, np.eye(M.shape[0]), "smoother trace")
    tr_s = float(np.trace(V @ A))
    C = WPhi.T @ WPhi  # Phi' W^2 Phi
    D = phi.T @ phi
    tr_ss = float(np.trace(V @ C @ V @ D))
    return tr_s, tr_ss, phi, w


def gcv(fit: FitResult) -> float:
    """Generalized cross-validation score n ||sqrt(W)(z - Phi d)||^2 / (n - tr S)^2
    with the IRLS working response z = g(E) + W^{-1}(y - mu); for the
    gaussian family this is the classical n RSS / (n - tr S)^2."""
    tr_s, _, phi, w = _trace_terms(fit)
    n = fit.eta.size
    if tr_s >= n:
        raise DegreesOfFreedomError(
            f"smoother trace {tr_s:.3f} is not below n={n}; GCV is undefined"
        )
    # sqrt(W)(z - Phi d) is the Pearson residual (y - mu) / sqrt(w)
    if fit.family == "gaussian_log":
        resid2 = (fit.response - fit.eta) ** 2
    else:
        wpos = np.maximum(w, 1e-300)
        resid2 = (fit.response - fit.mu_or_pi) ** 2 / wpos
    return float(n * np.sum(resid2) / (n - tr_s) ** 2)


def effective_df(fit: FitResult) -> tuple[float, float]:
    """(tr S, tr SS') for the fit."""
    tr_s, tr_ss, _, _ = _trace_terms(fit)
    return tr_s, tr_ss


def sigma2_hat(path: LambdaPath, extra_df: int | None = None) -> float:
    """Residual variance at the GCV-selected lambda:
    sum of squared residuals over n - 2 tr S + tr SS' - (p + q).

    `extra_df` overrides the p + q subtraction for the index parameters.
    """
    if path.spec.family != "gaussian_log":
        raise ValueError("sigma2_hat applies to the gaussian_log family only")
    fit = path.selected_fit
    tr_s, tr_ss = effective_df(fit)
    n = fit.eta.size
    sub = (path.spec.p + path.spec.q) if extra_df is None else extra_df
    df = n - 2.0 * tr_s + tr_ss - sub
    if df <= 0:
        raise DegreesOfFreedomError(
            f"residual degrees of freedom {df:.3f} <= 0 (n={n}, trS={tr_s:.3f}, "
            f"trSS'={tr_ss:.3f}, parameter adjustment {sub})"
        )
    rss = float(np.sum((fit.response - fit.eta) ** 2))
    return rss / df


def build_path(spec: ModelSpec, data: Dataset, fits: list[FitResult]) -> LambdaPath:
    """Attach GCV values, the selected index, reference weights, and (for the
    gaussian family) the residual-variance estimate to a list of fits."""
    path_warnings: list[str] = []
    gcvs = np.full(len(fits), np.inf)
    for k, f in enumerate(fits):
        try:
            gcvs[k] = gcv(f)
        except DegreesOfFreedomError as exc:
            path_warnings.append(f"lambda={f.lam:.6g}: {exc}")
        if not f.converged:
            path_warnings.append(f"lambda={f.lam:.6g}: fit did not converge")
    if not np.any(np.isfinite(gcvs)):
        raise NumericalError("GCV is undefined on the whole grid")
    selected = int(np.argmin(gcvs))
    path = LambdaPath(
        spec=spec,
        data=data,
        grid=tuple(f.lam for f in fits),
        fits=tuple(fits),
        gcv=gcvs,
        selected=selected,
        sigma2=None,
        weight_ref=fit_weights(fits[selected]),
        warnings=tuple(path_warnings),
    )
    if spec.family == "gaussian_log":
        try:
            path.sigma2 = sigma2_hat(path)
        except DegreesOfFreedomError as exc:
            path.warnings = path.warnings + (f"residual variance unavailable: {exc}",)
    return path


def _check_same_frame(path: LambdaPath, i: int, j: int) -> None:
    # Reflected frames are fine: reflection reverses the coefficient axis of
    # one fit, and every sensitivity contracted here transforms covariantly,
    # so the resulting delta covariances are identical. Only genuinely
    # different knot sets (hand-assembled paths) are rejected.
    bi, bj = path.fits[i].basis, path.fits[j].basis
    if bi != bj and bi != bj.reflected():
        raise NumericalError(
            "fits at the requested lambdas use different spline bases; "
            "cross-lambda covariance needs a shared (possibly reflected) frame"
        )


def _bracket_inverse(path: LambdaPath, k: int) -> np.ndarray:
    key = ("Vinv", k)
    if key not in path._cache:
        f = path.fits[k]
        phi = _design(f)
        M = _bracket(f, fit_weights(f), phi)
        path._cache[("phi", k)] = phi
        path._cache[key] = _solve_spd(M, np.eye(M.shape[0]), "coefficient covariance")
    return path._cache[key]


def _design_cached(path: LambdaPath, k: int) -> np.ndarray:
    if ("phi", k) not in path._cache:
        _bracket_inverse(path, k)
    return path._cache[("phi", k)]


def _gaussian_sandwich(path: LambdaPath, i: int, j: int, include_index_blocks: bool) -> np.ndarray:
    """Sandwich covariance from half-Hessians and the cross covariance of the
    score, restricted to the d-block.

    With the residual factor -2 convention, the expected Hessian is
    2 (J'J + lambda Ptilde) and cov(score) = 4 sigma^2 J_i' J_j; the constant
    factors cancel in H^{-1} cov(score) H^{-1}.
    """
    if path.sigma2 is None:
        raise DegreesOfFreedomError(
            "sigma2 is unavailable on this path; gaussian covariance needs it"
        )
    spec = path.spec
    K = path.fits[i].basis.dim

    def jacobian(k: int) -> np.ndarray:
        f = path.fits[k]
        if not include_index_blocks:
            return _design_cached(path, k)
        phi, phi1 = basis_matrices(f.basis, f.index_values, (0, 1))
        gprime = phi1 @ f.coeffs.d
        u = f.coeffs.beta
        tangent = np.eye(spec.p) - np.outer(u, u)
        blocks = [phi, gprime[:, None] * (path.data.X @ tangent)]
        if spec.q > 0:
            A = path.data.A
            blocks.append(gprime[:, None] * A if spec.extra_placement == "inside_index" else A)
        return np.hstack(blocks)

    def half_hessian(k: int, J: np.ndarray) -> np.ndarray:
        P = penalty_matrix(path.fits[k].basis).entries
        H = J.T @ J
        H[:K, :K] += path.fits[k].lam * P
        return H

    Ji, Jj = jacobian(i), jacobian(j)
    Hi, Hj = half_hessian(i, Ji), half_hessian(j, Jj)
    cross = Ji.T @ Jj
    if include_index_blocks:
        # the tangent projection zeroes one beta direction; pinv handles it
        left = np.linalg.pinv(Hi, hermitian=True)
        right = np.linalg.pinv(Hj, hermitian=True)
        full = left @ cross @ right
    else:
        left = _solve_spd(Hi, cross, "gaussian covariance")
        full = _solve_spd(Hj, left.T, "gaussian covariance").T
    return path.sigma2 * full[:K, :K]


def _glm_cov(path: LambdaPath, i: int, j: int) -> np.ndarray:
    Vi = _bracket_inverse(path, i)
    Vj = _bracket_inverse(path, j)
    phi_i = _design_cached(path, i)
    phi_j = _design_cached(path, j)
    mid = phi_i.T @ (phi_j * path.weight_ref[:, None])
    return Vi @ mid @ Vj


def coef_cov(path: LambdaPath, i: int, j: int, include_index_blocks: bool = False) -> CoefCovariance:
    """Covariance of (d_hat at grid[i], d_hat at grid[j]).

    gaussian_log: sigma2-scaled sandwich (index blocks dropped by default,
    retained with include_index_blocks=True). poisson / bernoulli_logit:
    bracket-inverse form with the middle weights taken at the GCV-selected
    lambda.
    """
    m = len(path.fits)
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError("lambda grid index out of range")
    _check_same_frame(path, i, j)
    if path.spec.family == "gaussian_log":
        mat = _gaussian_sandwich(path, i, j, include_index_blocks)
    else:
        if include_index_blocks:
            raise ValueError("include_index_blocks is implemented for the gaussian family only")
        mat = _glm_cov(path, i, j)
    return CoefCovariance(lambda_i=path.grid[i], lambda_j=path.grid[j], matrix=mat)
