"""Jensen-effect estimation and smoothing-path hypothesis tests.

The Jensen effect of covariate variability is

    delta = mean_i h(g(E_i)) - h(g(E_bar))

(with h = exp for gaussian_log / poisson and h = logistic for
bernoulli_logit, where the logistic version averages the paired difference
per observation so extra covariates stay at their own values). delta_hat is
computed at every lambda on a fitted path; a multivariate normal null for
the normalized process t_lambda gives a critical value for min/max-type
statistics, simulated rather than asymptotic because the per-lambda
estimates are strongly dependent.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

import scipy.linalg

from .basis import basis_matrix
from .errors import (
    DegenerateVarianceError,
    NumericalError,
    SeparationError,
    TestInfeasibleError,
)
from .inference import LambdaPath, _bracket_inverse, _design_cached, coef_cov
from .model import Dataset, FitResult, ModelSpec

__all__ = [
    "EvalSet",
    "JensenTestResult",
    "LinearReference",
    "DIRECTIONS",
    "make_eval_set",
    "delta_hat",
    "delta_cov",
    "truncate_psd",
    "t_process",
    "null_critical_value",
    "jensen_test",
    "linear_logistic_reference",
    "alternative_null_test",
]

DIRECTIONS = ("test_negative", "test_positive", "test_vs_linear_logistic")
G_CLIP = 700.0


@dataclass(frozen=True, eq=False)
class EvalSet:
    """Augmented evaluation points for one fit.

    gaussian_log / poisson: n index values followed by their mean, weights
    (1/n, ..., 1/n, -1). bernoulli_logit: n interleaved pairs (observed
    index, index with the environmental part averaged), weights
    (1/n, -1/n, ...); `offsets` carries any extra-covariate contribution
    that enters after the link (outside_index placement).
    """

    family: str
    points: np.ndarray
    weights: np.ndarray
    offsets: np.ndarray
    phi_plus: np.ndarray

    def __post_init__(self) -> None:
        if abs(float(np.sum(self.weights))) > 1e-12:
            raise ValueError("evaluation weights must sum to zero")
        if self.phi_plus.shape[0] != self.points.size:
            raise ValueError("evaluation matrix row count must match the points")


@dataclass(frozen=True, eq=False)
class JensenTestResult:
    """A completed smoothing-path test."""

    deltas: np.ndarray
    sigma_delta: np.ndarray
    t: np.ndarray
    sigma_t: np.ndarray
    kept: tuple[int, ...]
    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    direction: str
    alpha: float
    n_null_sims: int
    seed: int
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class LinearReference:
    """Linear-logistic fit of the same data: the 'no curvature' reference.

    delta_inf is the Jensen functional applied to the linear fit. The
    per-lambda rows of `hat_contractions` are the sensitivities of
    delta_hat_lambda - delta_inf to the response vector, used for the
    covariance of the difference process.
    """

    intercept: float
    beta_inf: np.ndarray
    gamma_inf: np.ndarray
    fitted_pi: np.ndarray
    delta_inf: float
    hat_contractions: np.ndarray | None = None
    grid: tuple[float, ...] | None = None


def _mean_snap(x: np.ndarray) -> float:
    # a degenerate spread must evaluate at the shared point bit-for-bit
    if np.ptp(x) == 0.0:
        return float(x[0])
    return float(np.mean(x))


def make_eval_set(spec: ModelSpec, data: Dataset, fit: FitResult) -> EvalSet:
    """Build the augmented evaluation points for one fit, in its own frame."""
    n = data.n
    if spec.family in ("gaussian_log", "poisson"):
        E = fit.index_values
        points = np.append(E, _mean_snap(E))
        weights = np.full(n + 1, 1.0 / n)
        weights[n] = -1.0
        offsets = np.zeros(n + 1)
    else:
        x = data.X @ fit.coeffs.beta
        base = np.zeros(n)
        after = np.zeros(n)
        if spec.q > 0:
            contrib = data.A @ fit.coeffs.gamma
            if spec.extra_placement == "inside_index":
                base = contrib
            else:
                after = contrib
        xbar = _mean_snap(x)
        points = np.empty(2 * n)
        points[0::2] = base + x
        points[1::2] = base + xbar
        weights = np.empty(2 * n)
        weights[0::2] = 1.0 / n
        weights[1::2] = -1.0 / n
        offsets = np.repeat(after, 2)
    phi_plus = basis_matrix(fit.basis, points)
    return EvalSet(
        family=spec.family, points=points, weights=weights, offsets=offsets, phi_plus=phi_plus
    )


def _link_values(ev: EvalSet, d: np.ndarray) -> np.ndarray:
    g = ev.phi_plus @ d + ev.offsets
    if ev.family in ("gaussian_log", "poisson"):
        if np.any(np.abs(g) > G_CLIP):
            _warnings.warn(
                "link values beyond +-700 clipped before exponentiation",
                RuntimeWarning,
                stacklevel=3,
            )
            g = np.clip(g, -G_CLIP, G_CLIP)
        return np.exp(g)
    return expit(g)


def delta_hat(fit: FitResult, ev: EvalSet) -> float:
    """The Jensen-effect estimate for one fit.

    Exactly zero whenever the fitted values are constant over the evaluation
    points, and (logistic case) whenever every pair is degenerate.
    """
    hv = _link_values(ev, fit.coeffs.d)
    if np.ptp(hv) == 0.0:
        return 0.0
    if ev.family == "bernoulli_logit":
        # pairwise differencing: identical pair members cancel exactly
        diffs = hv[0::2] - hv[1::2]
        n = diffs.size
        return float(np.sum(diffs) / n)
    return float(ev.weights @ hv)


def _sensitivity(ev: EvalSet, d: np.ndarray) -> np.ndarray:
    """c = Phi+' (a * h'(g+)): gradient of delta_hat in the spline block."""
    g = ev.phi_plus @ d + ev.offsets
    if ev.family in ("gaussian_log", "poisson"):
        hprime = np.exp(np.clip(g, -G_CLIP, G_CLIP))
    else:
        pi = expit(g)
        hprime = pi * (1.0 - pi)
    return ev.phi_plus.T @ (ev.weights * hprime)


def truncate_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetrize and clip negative eigenvalues at zero."""
    sym = 0.5 * (mat + mat.T)
    w, V = np.linalg.eigh(sym)
    if w.size and w[0] >= 0:
        return sym
    w = np.maximum(w, 0.0)
    out = (V * w) @ V.T
    return 0.5 * (out + out.T)


def delta_cov(path: LambdaPath, evals: list[EvalSet]) -> np.ndarray:
    """Covariance of the delta_hat process across the lambda grid, by the
    delta method through the spline coefficients, projected to the PSD cone."""
    m = len(path.fits)
    if len(evals) != m:
        raise ValueError("need one evaluation set per grid value")
    sens = [_sensitivity(ev, f.coeffs.d) for ev, f in zip(evals, path.fits)]
    sigma = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            cij = coef_cov(path, i, j).matrix
            sigma[i, j] = sigma[j, i] = float(sens[i] @ cij @ sens[j])
    sigma = truncate_psd(sigma)
    if np.all(np.diag(sigma) <= 0.0):
        raise DegenerateVarianceError(
            "estimated variance of delta_hat is zero on the whole grid"
        )
    return sigma


def t_process(deltas: np.ndarray, sigma_delta: np.ndarray):
    """Normalize the delta process: t = delta / sd, sigma_t the correlation.

    Grid entries with nonpositive estimated variance are dropped (with a
    warning); returns (t, sigma_t, kept_indices).
    """
    deltas = np.asarray(deltas, dtype=float)
    var = np.diag(sigma_delta).copy()
    kept = np.flatnonzero(var > 0.0)
    if kept.size < deltas.size:
        _warnings.warn(
            f"dropping {deltas.size - kept.size} grid entries with nonpositive "
            "delta variance",
            RuntimeWarning,
            stacklevel=2,
        )
    if kept.size == 0:
        raise TestInfeasibleError("no grid entry has positive delta variance")
    sd = np.sqrt(var[kept])
    t = deltas[kept] / sd
    sigma_t = sigma_delta[np.ix_(kept, kept)] / np.outer(sd, sd)
    return t, sigma_t, tuple(int(k) for k in kept)


def _symmetric_root(sigma: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (sigma + sigma.T))
    if w.size and w[0] < -1e-8 * max(1.0, abs(w[-1])):
        raise NumericalError(
            "correlation matrix is not positive semidefinite after projection"
        )
    w = np.maximum(w, 0.0)
    return (V * np.sqrt(w)) @ V.T


def null_critical_value(
    sigma_t: np.ndarray,
    alpha: float,
    direction: str,
    n_sims: int = 5000,
    seed: int = 0,
):
    """Monte-Carlo critical value for the chosen direction.

    Draws n_sims vectors from N(0, sigma_t) through the symmetric square
    root. Returns (critical, p_value_fn) where p_value_fn maps an observed
    statistic to the fraction of null draws at least as extreme.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 0.5]")
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    if n_sims < 1:
        raise ValueError("n_sims must be positive")
    root = _symmetric_root(np.asarray(sigma_t, dtype=float))
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n_sims, root.shape[0])) @ root
    if direction == "test_negative":
        stats = draws.min(axis=1)
        critical = float(np.quantile(stats, alpha))

        def p_value_fn(observed: float) -> float:
            return float(np.mean(stats <= observed))

    else:
        stats = draws.max(axis=1) if direction == "test_positive" else np.abs(draws).max(axis=1)
        critical = float(np.quantile(stats, 1.0 - alpha))

        def p_value_fn(observed: float) -> float:
            return float(np.mean(stats >= observed))

    return critical, p_value_fn


def default_direction(family: str) -> str:
    # exp link: concavity of the composite map pulls delta negative, so the
    # interesting alternative is delta < 0; the logistic analogue is convex
    return "test_positive" if family == "bernoulli_logit" else "test_negative"


def _assemble_result(deltas, sigma, direction, alpha, n_sims, seed, extra_warnings=()):
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        t, sigma_t, kept = t_process(deltas, sigma)
    notes = tuple(str(w.message) for w in caught) + tuple(extra_warnings)
    critical, p_fn = null_critical_value(sigma_t, alpha, direction, n_sims, seed)
    if direction == "test_negative":
        statistic = float(t.min())
        reject = statistic < critical
    elif direction == "test_positive":
        statistic = float(t.max())
        reject = statistic > critical
    else:
        statistic = float(np.abs(t).max())
        reject = statistic > critical
    return JensenTestResult(
        deltas=np.asarray(deltas, dtype=float),
        sigma_delta=sigma,
        t=t,
        sigma_t=sigma_t,
        kept=kept,
        statistic=statistic,
        critical_value=critical,
        p_value=p_fn(statistic),
        reject=reject,
        direction=direction,
        alpha=alpha,
        n_null_sims=n_sims,
        seed=seed,
        warnings=notes,
    )


def jensen_test(
    path: LambdaPath,
    direction: str | None = None,
    alpha: float = 0.05,
    seed: int = 0,
    n_sims: int = 5000,
) -> JensenTestResult:
    """Sign test for the Jensen effect along the whole smoothing path."""
    if direction is None:
        direction = default_direction(path.spec.family)
    if direction == "test_vs_linear_logistic":
        raise ValueError(
            "the linear-reference comparison is run through alternative_null_test"
        )
    evals = [make_eval_set(path.spec, path.data, f) for f in path.fits]
    deltas = np.array([delta_hat(f, ev) for f, ev in zip(path.fits, evals)])
    sigma = delta_cov(path, evals)
    return _assemble_result(deltas, sigma, direction, alpha, n_sims, seed)


# --- linear-logistic reference ------------------------------------------------


def _linear_logistic_irls(y: np.ndarray, D: np.ndarray, max_iter: int = 100) -> np.ndarray:
    b = np.zeros(D.shape[1])
    mean = min(max(float(np.mean(y)), 1e-12), 1 - 1e-12)
    b[0] = np.log(mean / (1 - mean))
    for _ in range(max_iter):
        eta = D @ b
        pi = expit(eta)
        w = np.maximum(pi * (1 - pi), 1e-12)
        z = eta + (y - pi) / w
        sw = np.sqrt(w)
        b_new, *_ = np.linalg.lstsq(D * sw[:, None], z * sw, rcond=None)
        if not np.all(np.isfinite(b_new)):
            raise SeparationError("logistic regression diverged (non-finite coefficients)")
        if np.max(np.abs(b_new - b)) < 1e-10 * (1.0 + np.max(np.abs(b))):
            return b_new
        b = b_new
    raise SeparationError(
        "logistic regression did not converge in 100 iterations; "
        "the data are (nearly) separated"
    )


def _reference_design(data: Dataset) -> np.ndarray:
    blocks = [np.ones((data.n, 1))]
    if data.A is not None:
        blocks.append(data.A)
    blocks.append(data.X)
    return np.hstack(blocks)


def _reference_eval_design(data: Dataset) -> np.ndarray:
    """Augmented design rows matching the interleaved evaluation points."""
    n = data.n
    q = 0 if data.A is None else data.A.shape[1]
    Dplus = np.empty((2 * n, 1 + q + data.X.shape[1]))
    Dplus[:, 0] = 1.0
    if q:
        Dplus[0::2, 1 : 1 + q] = data.A
        Dplus[1::2, 1 : 1 + q] = data.A
    xbar = data.X.mean(axis=0)
    Dplus[0::2, 1 + q :] = data.X
    Dplus[1::2, 1 + q :] = xbar
    return Dplus


def _reference_delta(data: Dataset, coef: np.ndarray) -> float:
    Dplus = _reference_eval_design(data)
    pi = expit(Dplus @ coef)
    if np.ptp(pi) == 0.0:
        return 0.0
    diffs = pi[0::2] - pi[1::2]
    return float(np.sum(diffs) / data.n)


def linear_logistic_reference(data: Dataset, path: LambdaPath | None = None) -> LinearReference:
    """Fit an ordinary linear-logistic model and its Jensen functional.

    When a fitted path is supplied, also build the per-lambda response
    sensitivities of delta_hat_lambda - delta_inf needed by
    alternative_null_test.
    """
    if not np.all(np.isin(data.y, (0.0, 1.0))):
        raise ValueError("linear logistic reference needs 0/1 responses")
    D = _reference_design(data)
    if np.linalg.matrix_rank(D) < D.shape[1]:
        raise ValueError("reference design [1, A, X] is rank deficient")
    coef = _linear_logistic_irls(data.y, D)
    q = 0 if data.A is None else data.A.shape[1]
    fitted = expit(D @ coef)
    ref = LinearReference(
        intercept=float(coef[0]),
        beta_inf=coef[1 + q :].copy(),
        gamma_inf=coef[1 : 1 + q].copy(),
        fitted_pi=fitted,
        delta_inf=_reference_delta(data, coef),
    )
    if path is not None:
        contr, grid = _hat_contractions(path, ref, coef)
        ref = LinearReference(
            intercept=ref.intercept,
            beta_inf=ref.beta_inf,
            gamma_inf=ref.gamma_inf,
            fitted_pi=fitted,
            delta_inf=ref.delta_inf,
            hat_contractions=contr,
            grid=grid,
        )
    return ref


def _hat_contractions(path: LambdaPath, ref: LinearReference, coef: np.ndarray):
    """Rows u_lambda = d(delta_hat_lambda - delta_inf)/dy.

    The spline side differentiates through d_hat = M^-1 Phi' W z (where
    d(Wz)/dy = I); the reference side through the weighted least-squares
    coefficient map of the linear fit.
    """
    data = path.data
    D = _reference_design(data)
    Dplus = _reference_eval_design(data)
    pi_plus = expit(Dplus @ coef)
    a = np.empty(2 * data.n)
    a[0::2] = 1.0 / data.n
    a[1::2] = -1.0 / data.n
    b_inf = Dplus.T @ (a * pi_plus * (1.0 - pi_plus))
    w_inf = ref.fitted_pi * (1.0 - ref.fitted_pi)
    ref_block = scipy.linalg.solve(D.T @ (D * w_inf[:, None]), b_inf, assume_a="sym")
    ref_row = D @ ref_block  # (X' W X)^-1-weighted sensitivity, length n

    rows = np.empty((len(path.fits), data.n))
    for k, f in enumerate(path.fits):
        ev = make_eval_set(path.spec, data, f)
        c = _sensitivity(ev, f.coeffs.d)
        rows[k] = _design_cached(path, k) @ (_bracket_inverse(path, k) @ c) - ref_row
    return rows, path.grid


def alternative_null_test(
    path: LambdaPath,
    ref: LinearReference,
    alpha: float = 0.05,
    seed: int = 0,
    n_sims: int = 5000,
) -> JensenTestResult:
    """Two-sided test of delta_lambda = delta_inf: does the smoothed fit's
    Jensen effect differ from the one a linear-logistic model implies?"""
    if path.spec.family != "bernoulli_logit":
        raise ValueError("the linear-reference comparison applies to the logit family only")
    if ref.hat_contractions is None or ref.grid != path.grid:
        ref = linear_logistic_reference(path.data, path)
    evals = [make_eval_set(path.spec, path.data, f) for f in path.fits]
    deltas = np.array([delta_hat(f, ev) for f, ev in zip(path.fits, evals)]) - ref.delta_inf
    U = ref.hat_contractions
    w_ref = path.weight_ref
    sigma = truncate_psd((U * w_ref[None, :]) @ U.T)
    if np.all(np.diag(sigma) <= 0.0):
        raise DegenerateVarianceError(
            "estimated variance of the difference process is zero on the whole grid"
        )
    return _assemble_result(
        deltas, sigma, "test_vs_linear_logistic", alpha, n_sims, seed
    )
