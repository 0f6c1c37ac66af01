"""Penalized single-index models: specification, objectives, gradients, fitting.

A model is E[Y*|X,A] = h(eta) with eta built from an index E through a spline
link g(s) = phi(s) @ d:

    inside_index:   E = X beta + A gamma,   eta = g(E)
    outside_index:  E = X beta,             eta = A gamma + g(E)

Families: gaussian_log (least squares on Y* = log Y), poisson (log link),
bernoulli_logit. All objectives carry the curvature penalty lambda * d'Pd.
The index coefficients are constrained to the unit sphere with beta[0] > 0;
during optimization the constraint is imposed by renormalizing inside the
function evaluation, and the public gradient is projected onto the sphere
tangent accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.optimize import minimize
from scipy.special import expit

from .basis import (
    SplineBasis,
    basis_for_index,
    basis_matrices,
    greville_abscissae,
    penalty_eigh,
    penalty_matrix,
)
from .errors import DegenerateIndexError, NumericalOverflowError

__all__ = [
    "FAMILIES",
    "ModelSpec",
    "Dataset",
    "Coefficients",
    "FitResult",
    "normalize_index",
    "objective",
    "gradient",
    "fit",
    "fit_path",
]

FAMILIES = ("gaussian_log", "poisson", "bernoulli_logit")
PLACEMENTS = ("inside_index", "outside_index")

# exp overflows just above 709; freeze the exponential there so the fitter
# sees a finite surface even when a line-search step shoots eta out of range
ETA_CLIP = 700.0

GRAD_TOL = 1e-6
OBJ_REL_TOL = 1e-10
MAX_RESTARTS = 2


# The floor matters more than it looks. Below ~1e-1 the penalty is negligible
# against a count or binary deviance, so those grid cells waste resolution on
# fits identical to the unpenalized one. For low-noise gaussian responses the
# same cells are worse than wasted: near-unpenalized smoothing of a curved
# link carries a deterministic bias that can dwarf the tiny standard errors
# there and spuriously fire the path test. Callers who want a softer floor can
# always pass their own grid.
def default_lambda_grid(lo: float = 1e-1, hi: float = 1e6, count: int = 20) -> tuple[float, ...]:
    return tuple(float(v) for v in np.geomspace(lo, hi, count))


@dataclass(frozen=True)
class ModelSpec:
    """What to fit: family, covariate counts, extra-covariate placement,
    link basis, and the smoothing grid."""

    family: str
    p: int
    q: int = 0
    extra_placement: str = "inside_index"
    basis: SplineBasis | None = None
    lambda_grid: tuple[float, ...] = field(default_factory=default_lambda_grid)
    # used only when basis is None and one is built from the initial index
    basis_dim: int = 25
    basis_degree: int = 5

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.extra_placement not in PLACEMENTS:
            raise ValueError(f"unknown placement {self.extra_placement!r}; expected one of {PLACEMENTS}")
        if self.p < 1:
            raise ValueError("need at least one environmental covariate (p >= 1)")
        if self.q < 0:
            raise ValueError("q must be nonnegative")
        grid = np.asarray(self.lambda_grid, dtype=float)
        if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise ValueError("lambda_grid must be positive and strictly increasing")
        if self.basis_degree < 3:
            raise ValueError("basis degree must be at least 3 for a curvature penalty")
        if self.basis_dim <= self.basis_degree + 1:
            raise ValueError("basis dimension must exceed degree + 1")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Raw responses plus covariate blocks. X columns drive the index; A
    columns are the extra covariates (may be absent)."""

    y: np.ndarray
    X: np.ndarray
    A: np.ndarray | None = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.size:
            raise ValueError("y must be a vector and X a matrix with matching row count")
        if self.A is not None:
            A = np.asarray(self.A, dtype=float)
            object.__setattr__(self, "A", A)
            if A.ndim != 2 or A.shape[0] != y.size:
                raise ValueError("A must be a matrix with one row per observation")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise ValueError("responses and covariates must be finite")
        if self.A is not None and not np.all(np.isfinite(self.A)):
            raise ValueError("extra covariates must be finite")

    @property
    def n(self) -> int:
        return self.y.size


@dataclass(frozen=True, eq=False)
class Coefficients:
    """(beta, gamma, d): index direction, extra-covariate effects, and spline
    coefficients of the link."""

    beta: np.ndarray
    gamma: np.ndarray
    d: np.ndarray

    def __post_init__(self) -> None:
        for name in ("beta", "gamma", "d"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True, eq=False)
class FitResult:
    """One converged (or honestly flagged) fit at a single lambda.

    `basis` is the frame the stored d lives in; it equals the fitting basis
    unless the optimizer landed on a negative leading index coefficient, in
    which case the whole frame is reflected to restore beta[0] > 0 without
    changing any fitted value. `raw_coeffs` keeps the optimizer's own frame
    for warm starts along a path.
    """

    lam: float
    family: str
    coeffs: Coefficients
    index_values: np.ndarray
    eta: np.ndarray
    mu_or_pi: np.ndarray
    response: np.ndarray
    objective: float
    converged: bool
    n_restarts_used: int
    basis: SplineBasis
    warnings: tuple[str, ...] = ()
    run_objectives: tuple[float, ...] = ()
    raw_coeffs: Coefficients | None = None


def normalize_index(beta_raw) -> np.ndarray:
    """Project onto the unit sphere with the leading nonzero entry positive."""
    beta_raw = np.asarray(beta_raw, dtype=float)
    if beta_raw.ndim != 1 or beta_raw.size == 0:
        raise DegenerateIndexError("index coefficients must form a nonempty vector")
    if not np.all(np.isfinite(beta_raw)):
        raise DegenerateIndexError("index coefficients must be finite")
    scale = np.max(np.abs(beta_raw))
    if scale == 0.0:
        raise DegenerateIndexError("index coefficients are identically zero")
    # prescale so the squared entries cannot underflow
    beta = beta_raw / scale
    beta = beta / np.linalg.norm(beta)
    lead = beta[np.nonzero(beta)[0][0]]
    return -beta if lead < 0 else beta


def _validate(spec: ModelSpec, data: Dataset) -> None:
    if data.X.shape[1] != spec.p:
        raise ValueError(f"X has {data.X.shape[1]} columns but spec.p = {spec.p}")
    q = 0 if data.A is None else data.A.shape[1]
    if q != spec.q:
        raise ValueError(f"A has {q} columns but spec.q = {spec.q}")
    if spec.family == "gaussian_log" and np.any(data.y <= 0):
        bad = int(np.argmax(data.y <= 0))
        raise ValueError(f"gaussian_log needs strictly positive responses; observation {bad} has y={data.y[bad]}")
    if spec.family == "poisson" and np.any(data.y < 0):
        raise ValueError("poisson responses must be nonnegative")
    if spec.family == "bernoulli_logit" and not np.all(np.isin(data.y, (0.0, 1.0))):
        raise ValueError("bernoulli_logit responses must be 0/1")


def _response(spec: ModelSpec, data: Dataset) -> np.ndarray:
    # gaussian_log models the log response; the other families model y itself
    return np.log(data.y) if spec.family == "gaussian_log" else data.y


def _unpack(spec: ModelSpec, theta: np.ndarray, K: int):
    d = theta[:K]
    beta_raw = theta[K : K + spec.p]
    gamma = theta[K + spec.p :]
    return d, beta_raw, gamma


class _Evaluator:
    """Fused objective/gradient for one (spec, data, basis, lambda) tuple.

    Public parameter layout ("d-coordinates"): [d (K), beta_raw (p),
    gamma (q)]. beta is renormalized inside the evaluation; the returned
    beta gradient is the tangent-projected derivative of the renormalized
    objective, so finite differences of the objective agree with the
    gradient coordinatewise.

    The optimizer itself runs in "c-coordinates" where the spline block is
    rotated into the penalty eigenbasis (d = U c). There the penalty term is
    lambda * sum(Lam_j c_j^2) with an exact diagonal gradient; in raw
    coordinates 2*lambda*P@d carries cancellation noise up to ~1e-3 for
    near-affine d at the top of the default grid, which stalls any line
    search long before the gradient tolerance.
    """

    def __init__(self, spec: ModelSpec, data: Dataset, basis: SplineBasis, lam: float):
        self.spec = spec
        self.data = data
        self.basis = basis
        self.lam = lam
        self.P = penalty_matrix(basis).entries
        self.Lam, self.U = penalty_eigh(basis)
        self.yresp = _response(spec, data)
        self.inside = spec.extra_placement == "inside_index" and spec.q > 0
        self.outside = spec.extra_placement == "outside_index" and spec.q > 0

    def index(self, beta_unit: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        E = self.data.X @ beta_unit
        if self.inside:
            E = E + self.data.A @ gamma
        return E

    def _core(self, d, beta_raw, gamma):
        """Loss value and its gradient pieces, penalty excluded.

        Returns (loss, loss_grad_d, grad_beta, grad_gamma) or None when the
        index direction has collapsed.
        """
        spec, data = self.spec, self.data
        norm = np.linalg.norm(beta_raw)
        if norm < 1e-12 or not np.isfinite(norm):
            return None
        u = beta_raw / norm
        E = self.index(u, gamma)
        phi0, phi1 = basis_matrices(self.basis, E, (0, 1))
        in_domain = (E >= self.basis.lo) & (E <= self.basis.hi)
        eta = phi0 @ d
        if self.outside:
            eta = eta + data.A @ gamma

        y = self.yresp
        if spec.family == "gaussian_log":
            r = y - eta
            loss = float(r @ r)
            v = -2.0 * r
        elif spec.family == "poisson":
            live = eta < ETA_CLIP
            ex = np.exp(np.minimum(eta, ETA_CLIP))
            loss = float(np.sum(ex - y * eta))
            v = np.where(live, ex, 0.0) - y
        else:
            loss = float(np.sum(np.logaddexp(0.0, eta) - y * eta))
            v = expit(eta) - y

        grad_d = phi0.T @ v
        # the index only moves eta through g where E is unclamped
        w = v * (phi1 @ d) * in_domain
        grad_u = self.data.X.T @ w
        grad_beta = (grad_u - u * (u @ grad_u)) / norm
        if spec.q > 0:
            grad_gamma = data.A.T @ (w if self.inside else v)
        else:
            grad_gamma = np.zeros(0)
        return loss, grad_d, grad_beta, grad_gamma

    def value_and_grad(self, theta: np.ndarray):
        """Objective and gradient in raw d-coordinates."""
        d, beta_raw, gamma = _unpack(self.spec, theta, self.basis.dim)
        core = self._core(d, beta_raw, gamma)
        if core is None:
            return 1e12, np.zeros_like(theta)
        loss, grad_d, grad_beta, grad_gamma = core
        Pd = self.P @ d
        value = loss + self.lam * float(d @ Pd)
        grad_d = grad_d + 2.0 * self.lam * Pd
        return value, np.concatenate([grad_d, grad_beta, grad_gamma])

    def value_and_grad_eig(self, zeta: np.ndarray):
        """Objective and gradient in penalty-eigenbasis coordinates."""
        c, beta_raw, gamma = _unpack(self.spec, zeta, self.basis.dim)
        core = self._core(self.U @ c, beta_raw, gamma)
        if core is None:
            return 1e12, np.zeros_like(zeta)
        loss, grad_d, grad_beta, grad_gamma = core
        value = loss + self.lam * float(self.Lam @ (c * c))
        grad_c = self.U.T @ grad_d + 2.0 * self.lam * self.Lam * c
        return value, np.concatenate([grad_c, grad_beta, grad_gamma])

    def to_eig(self, theta: np.ndarray) -> np.ndarray:
        K = self.basis.dim
        return np.concatenate([self.U.T @ theta[:K], theta[K:]])

    def from_eig(self, zeta: np.ndarray) -> np.ndarray:
        K = self.basis.dim
        return np.concatenate([self.U @ zeta[:K], zeta[K:]])

    def gauss_newton_hess_inv(self, zeta: np.ndarray) -> np.ndarray:
        """Inverse Gauss-Newton Hessian in eigenbasis coordinates, used to
        seed BFGS.

        The penalty block dominates the curvature at large lambda (condition
        numbers up to ~1e11 on the default grid); an identity seed makes the
        quasi-Newton iteration creep in the stiff directions.
        """
        spec, data = self.spec, self.data
        c, beta_raw, gamma = _unpack(spec, zeta, self.basis.dim)
        d = self.U @ c
        norm = np.linalg.norm(beta_raw)
        u = beta_raw / norm
        E = self.index(u, gamma)
        phi0, phi1 = basis_matrices(self.basis, E, (0, 1))
        gprime = (phi1 @ d) * ((E >= self.basis.lo) & (E <= self.basis.hi))
        eta = phi0 @ d + (data.A @ gamma if self.outside else 0.0)
        if spec.family == "gaussian_log":
            q = np.full(eta.size, 2.0)
        elif spec.family == "poisson":
            q = np.exp(np.minimum(eta, ETA_CLIP))
        else:
            pi = expit(eta)
            q = pi * (1.0 - pi)
        tangent = (np.eye(spec.p) - np.outer(u, u)) / norm
        blocks = [phi0 @ self.U, gprime[:, None] * (data.X @ tangent)]
        if spec.q > 0:
            blocks.append(gprime[:, None] * data.A if self.inside else data.A)
        J = np.hstack(blocks)
        H = J.T @ (J * q[:, None])
        K = self.basis.dim
        H[np.arange(K), np.arange(K)] += 2.0 * self.lam * self.Lam
        H = 0.5 * (H + H.T)
        # invert with an eigenvalue floor: the sphere-tangent direction is
        # flat, and scipy insists the seed be exactly symmetric and
        # Cholesky-factorizable
        try:
            w, V = scipy.linalg.eigh(H)
        except np.linalg.LinAlgError:
            return np.eye(H.shape[0])
        if not (np.all(np.isfinite(w)) and w[-1] > 0):
            return np.eye(H.shape[0])
        w = np.maximum(w, 1e-10 * w[-1])
        Hinv = (V / w) @ V.T
        return 0.5 * (Hinv + Hinv.T)


def _evaluator(spec: ModelSpec, data: Dataset, coeffs: Coefficients, lam: float) -> tuple[_Evaluator, np.ndarray]:
    _validate(spec, data)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if spec.basis is None:
        raise ValueError("spec.basis must be set for direct objective/gradient evaluation")
    if coeffs.d.size != spec.basis.dim or coeffs.beta.size != spec.p or coeffs.gamma.size != spec.q:
        raise ValueError("coefficient block sizes do not match spec.basis.dim, spec.p, spec.q")
    ev = _Evaluator(spec, data, spec.basis, lam)
    theta = np.concatenate([coeffs.d, coeffs.beta, coeffs.gamma])
    return ev, theta


def objective(spec: ModelSpec, data: Dataset, coeffs: Coefficients, lam: float) -> float:
    """Penalized loss: squared error (gaussian_log) or negative log-likelihood
    (poisson, bernoulli_logit), plus lambda * d'Pd.

    Raises NumericalOverflowError naming the first offending observation when
    the unclipped loss is not finite.
    """
    ev, theta = _evaluator(spec, data, coeffs, lam)
    d, beta_raw, gamma = _unpack(spec, theta, ev.basis.dim)
    norm = np.linalg.norm(beta_raw)
    if norm == 0.0:
        raise DegenerateIndexError("index coefficients are identically zero")
    E = ev.index(beta_raw / norm, gamma)
    eta = basis_matrices(ev.basis, E, (0,))[0] @ d
    if ev.outside:
        eta = eta + data.A @ gamma
    y = ev.yresp
    if spec.family == "gaussian_log":
        terms = (y - eta) ** 2
    elif spec.family == "poisson":
        with np.errstate(over="ignore"):
            terms = np.exp(eta) - y * eta
    else:
        terms = np.logaddexp(0.0, eta) - y * eta
    if not np.all(np.isfinite(terms)):
        bad = int(np.argmax(~np.isfinite(terms)))
        raise NumericalOverflowError(
            f"objective is not finite at observation {bad} (eta={eta[bad]:.6g})"
        )
    return float(np.sum(terms)) + lam * float(d @ ev.P @ d)


def gradient(spec: ModelSpec, data: Dataset, coeffs: Coefficients, lam: float) -> np.ndarray:
    """Analytic gradient of `objective`, ordered [d, beta, gamma], with the
    beta block projected onto the unit-sphere tangent."""
    ev, theta = _evaluator(spec, data, coeffs, lam)
    value, grad = ev.value_and_grad(theta)
    if not np.isfinite(value):
        raise NumericalOverflowError("objective is not finite at the supplied coefficients")
    return grad


def _irls_linear(family: str, y: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Unpenalized GLM coefficients for initialization; falls back to a crude
    least-squares proxy if the iterations go non-finite."""
    if family == "gaussian_log":
        return np.linalg.lstsq(D, np.log(y), rcond=None)[0]
    if family == "poisson":
        fallback = np.linalg.lstsq(D, np.log(y + 0.5), rcond=None)[0]
    else:
        fallback = np.linalg.lstsq(D, y - 0.5, rcond=None)[0]
    b = np.zeros(D.shape[1])
    mean = float(np.mean(y))
    if family == "poisson":
        b[-1] = np.log(max(mean, 1e-3))
    else:
        mean = min(max(mean, 1e-3), 1 - 1e-3)
        b[-1] = np.log(mean / (1 - mean))
    for _ in range(25):
        eta = D @ b
        if family == "poisson":
            mu = np.exp(np.minimum(eta, ETA_CLIP))
            w = mu
        else:
            mu = expit(eta)
            w = mu * (1 - mu)
        w = np.maximum(w, 1e-8)
        z = eta + (y - mu) / w
        sw = np.sqrt(w)
        b_new, *_ = np.linalg.lstsq(D * sw[:, None], z * sw, rcond=None)
        if not np.all(np.isfinite(b_new)):
            return fallback
        if np.max(np.abs(b_new - b)) < 1e-10 * (1 + np.max(np.abs(b))):
            return b_new
        b = b_new
    return b


def _initial_coefficients(spec: ModelSpec, data: Dataset) -> tuple[Coefficients, SplineBasis]:
    """Start at the best linear model: beta from a (G)LM on [X, A, 1], g set
    to the matching affine map via its exact spline representation."""
    blocks = [data.X] + ([data.A] if spec.q > 0 else []) + [np.ones((data.n, 1))]
    D = np.hstack(blocks)
    b = _irls_linear(spec.family, data.y, D)
    bx, ba, c = b[: spec.p], b[spec.p : spec.p + spec.q], float(b[-1])
    if np.linalg.norm(bx) < 1e-12:
        # no linear signal to orient the index; fall back to a flat direction
        beta0 = normalize_index(np.ones(spec.p))
        slope = 0.0
    else:
        beta0 = normalize_index(bx)
        slope = float(bx @ beta0)
    if spec.q > 0 and spec.extra_placement == "inside_index":
        gamma0 = ba / slope if slope != 0.0 else np.zeros(spec.q)
    else:
        gamma0 = ba.copy()
    E0 = data.X @ beta0
    if spec.q > 0 and spec.extra_placement == "inside_index":
        E0 = E0 + data.A @ gamma0
    if spec.basis is not None:
        basis = spec.basis
    else:
        basis = basis_for_index(E0, dim=spec.basis_dim, degree=spec.basis_degree)
    d0 = c + slope * greville_abscissae(basis)
    return Coefficients(beta=beta0, gamma=gamma0, d=d0), basis


def _canonicalize(spec: ModelSpec, fitres: FitResult) -> FitResult:
    """Reflect the frame when the leading index coefficient came out
    negative, leaving every fitted value unchanged."""
    beta = fitres.coeffs.beta
    lead_idx = np.nonzero(beta)[0]
    if lead_idx.size == 0:
        raise DegenerateIndexError("fitted index coefficients are identically zero")
    if beta[lead_idx[0]] > 0:
        return fitres
    c = fitres.coeffs
    gamma = -c.gamma if (spec.q > 0 and spec.extra_placement == "inside_index") else c.gamma
    return replace(
        fitres,
        coeffs=Coefficients(beta=-c.beta, gamma=gamma, d=c.d[::-1].copy()),
        index_values=-fitres.index_values,
        basis=fitres.basis.reflected(),
    )


def fit(
    spec: ModelSpec,
    data: Dataset,
    lam: float,
    init: Coefficients | None = None,
    basis: SplineBasis | None = None,
) -> FitResult:
    """Minimize the penalized objective at one lambda by BFGS, run twice with
    the second run warm-started from the first (plus one more restart if the
    convergence test still fails)."""
    _validate(spec, data)
    if not (lam > 0 and np.isfinite(lam)):
        raise ValueError("lambda must be positive and finite")
    if init is None:
        init, init_basis = _initial_coefficients(spec, data)
    else:
        init_basis = None
    basis = basis or spec.basis or init_basis
    if basis is None:
        basis = basis_for_index(
            data.X @ normalize_index(init.beta),
            dim=spec.basis_dim,
            degree=spec.basis_degree,
        )
    if init.d.size != basis.dim or init.beta.size != spec.p or init.gamma.size != spec.q:
        raise ValueError("initial coefficient block sizes do not match the basis dim or spec.p, spec.q")

    warnings: list[str] = []
    if data.n < basis.dim:
        warnings.append(
            f"rank-deficient link system: n={data.n} observations for "
            f"{basis.dim} basis functions"
        )

    ev = _Evaluator(spec, data, basis, lam)
    zeta = ev.to_eig(np.concatenate([init.d, init.beta, init.gamma]))
    value0, _ = ev.value_and_grad_eig(zeta)
    run_objectives = [float(value0)]

    best_zeta, best_value = zeta, value0
    converged = False
    restarts = 0
    for attempt in range(1 + MAX_RESTARTS):
        # inf-norm bound implying the 2-norm target for this neighborhood
        gtol = GRAD_TOL * (1.0 + abs(best_value)) / (2.0 * np.sqrt(zeta.size))
        res = minimize(
            ev.value_and_grad_eig,
            best_zeta,
            jac=True,
            method="BFGS",
            options={
                "gtol": gtol,
                "maxiter": 400,
                "hess_inv0": ev.gauss_newton_hess_inv(best_zeta),
            },
        )
        prev_value = best_value
        if np.isfinite(res.fun) and res.fun <= best_value:
            best_zeta, best_value = res.x, float(res.fun)
        run_objectives.append(float(best_value))
        if attempt > 0:
            restarts += 1
        _, grad_now = ev.value_and_grad_eig(best_zeta)
        grad_ok = np.linalg.norm(grad_now) < GRAD_TOL * (1.0 + abs(best_value))
        obj_ok = attempt > 0 and abs(prev_value - best_value) < OBJ_REL_TOL * (1.0 + abs(best_value))
        if attempt > 0 and (grad_ok or obj_ok):
            converged = True
            break

    d, beta_raw, gamma = _unpack(spec, ev.from_eig(best_zeta), basis.dim)
    norm = np.linalg.norm(beta_raw)
    if norm == 0.0:
        raise DegenerateIndexError("optimizer collapsed the index direction to zero")
    beta = beta_raw / norm
    E = ev.index(beta, gamma)
    eta = basis_matrices(basis, E, (0,))[0] @ d
    if ev.outside:
        eta = eta + data.A @ gamma
    if spec.family == "gaussian_log":
        mu = eta.copy()
    elif spec.family == "poisson":
        mu = np.exp(np.minimum(eta, ETA_CLIP))
    else:
        mu = expit(eta)

    result = FitResult(
        lam=float(lam),
        family=spec.family,
        coeffs=Coefficients(beta=beta, gamma=gamma.copy(), d=d.copy()),
        index_values=E,
        eta=eta,
        mu_or_pi=mu,
        response=ev.yresp,
        objective=float(best_value),
        converged=converged,
        n_restarts_used=restarts,
        basis=basis,
        warnings=tuple(warnings),
        run_objectives=tuple(run_objectives),
        raw_coeffs=Coefficients(beta=beta_raw.copy(), gamma=gamma.copy(), d=d.copy()),
    )
    return _canonicalize(spec, result)


def fit_path(spec: ModelSpec, data: Dataset, warm_starts: bool = True):
    """Fit every lambda on the grid in ascending order, each warm-started
    from its predecessor, and attach GCV selection. Returns a LambdaPath."""
    _validate(spec, data)
    init, basis = _initial_coefficients(spec, data)
    fits = []
    carry = init
    for lam in spec.lambda_grid:
        res = fit(spec, data, lam, init=carry, basis=basis)
        fits.append(res)
        if warm_starts:
            carry = res.raw_coeffs
    from .inference import build_path  # deferred: inference sits above model

    return build_path(spec, data, fits)
