"""Constrained and penalized least-squares machinery shared by the estimators.

Everything here is deterministic and pure: Euclidean projections onto the
unit simplex, the l1 ball and the nuclear-norm ball, a monotone projected
gradient loop with backtracking line search, cyclic coordinate descent for
separable penalties, principal components, alternating least squares for
factor-plus-regression models, and ordinary least squares via the normal
equations.  Problems in this package are small and dense, so exactness is
preferred over speed everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DimensionError, NumericalError, RankDeficiencyError

__all__ = [
    "SolverConfig",
    "SolveReport",
    "LassoPenalty",
    "ElasticNetPenalty",
    "project_simplex",
    "project_l1_ball",
    "project_nuclear_ball",
    "projected_gradient_ls",
    "coordinate_descent_penalized",
    "pca_factors",
    "alternating_ls",
    "ols",
]

#: Condition-number ceiling above which normal equations are refused.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls shared by the iterative solvers.

    ``tol`` is interpreted relative to the natural scale of each problem:
    the projected-gradient loop stops once the projected-gradient map is
    below ``tol * (1 + ||X'y||_inf)``, coordinate descent once the largest
    per-coordinate subgradient violation is below the same bound, and
    alternating least squares once the relative objective decrease falls
    below ``tol``.
    """

    max_iters: int = 10_000
    tol: float = 1e-8
    step_rule: str = "backtracking"
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1; got {self.max_iters}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive; got {self.tol}")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solver run.

    ``converged`` is True only when ``kkt_residual`` met the documented
    threshold for the routine that produced the report.  The objective
    trace (one value per iteration) is kept for monotonicity diagnostics.
    """

    iterations: int
    final_objective: float
    converged: bool
    kkt_residual: float
    objective_trace: tuple = ()
    note: str = ""


@dataclass(frozen=True)
class LassoPenalty:
    """l1 penalty ``lam * ||w||_1``."""

    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0; got {self.lam}")

    @property
    def l1(self) -> float:
        return self.lam

    @property
    def l2(self) -> float:
        return 0.0

    def value(self, w: np.ndarray) -> float:
        return self.lam * np.abs(w).sum()


@dataclass(frozen=True)
class ElasticNetPenalty:
    """Mixed penalty ``lam * ((1 - alpha) * ||w||_2^2 + alpha * ||w||_1)``."""

    lam: float
    alpha: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0; got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1]; got {self.alpha}")

    @property
    def l1(self) -> float:
        return self.lam * self.alpha

    @property
    def l2(self) -> float:
        return self.lam * (1.0 - self.alpha)

    def value(self, w: np.ndarray) -> float:
        return self.l2 * float(w @ w) + self.l1 * np.abs(w).sum()


def _l1_threshold(magnitudes: np.ndarray, radius: float) -> float:
    """Water-filling threshold theta with sum(max(magnitudes - theta, 0)) = radius.

    Assumes ``sum(magnitudes) > radius``.  Stable sort keeps tied entries in
    original order so results are bit-for-bit reproducible.
    """
    u = np.sort(magnitudes, kind="stable")[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, u.shape[0] + 1)
    rho = np.nonzero(u * idx > css)[0][-1]
    return css[rho] / (rho + 1.0)


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the unit simplex {w >= 0, sum(w) = 1}."""
    v = np.asarray(v, dtype=float)
    theta = _l1_threshold(v, 1.0)
    return np.maximum(v - theta, 0.0)


def project_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball {w : ||w||_1 <= radius}."""
    if not radius > 0:
        raise ValueError(f"radius must be positive; got {radius}")
    v = np.asarray(v, dtype=float)
    mags = np.abs(v)
    if mags.sum() <= radius:
        return v.copy()
    theta = _l1_threshold(mags, radius)
    return np.sign(v) * np.maximum(mags - theta, 0.0)


def project_nuclear_ball(a, radius: float) -> np.ndarray:
    """Euclidean projection onto {A : nuclear norm of A <= radius}.

    Computed by projecting the singular values onto the l1 ball and
    reassembling the matrix.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive; got {radius}")
    a = np.asarray(a, dtype=float)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        fro = float(np.linalg.norm(a))
        raise NumericalError(
            f"SVD failed on a {a.shape[0]}x{a.shape[1]} matrix "
            f"(Frobenius norm {fro:.3e}, max entry {np.abs(a).max():.3e})"
        ) from exc
    if s.sum() <= radius:
        return a.copy()
    theta = _l1_threshold(s, radius)
    s_proj = np.maximum(s - theta, 0.0)
    return (u * s_proj) @ vt


def _power_iteration_norm(gram: np.ndarray, n_iters: int = 30) -> float:
    """Largest eigenvalue of a PSD matrix, deterministic start."""
    x = np.ones(gram.shape[0]) / np.sqrt(gram.shape[0])
    lam = 0.0
    for _ in range(n_iters):
        y = gram @ x
        lam = float(np.linalg.norm(y))
        if lam == 0.0:
            return 0.0
        x = y / lam
    return lam


def projected_gradient_ls(
    X,
    y,
    project: Callable[[np.ndarray], np.ndarray],
    cfg: SolverConfig = SolverConfig(),
):
    """Minimize ||y - X w||_2^2 over a closed convex set given by its projection.

    Parameters
    ----------
    X : ndarray of shape (T, p)
    y : ndarray of shape (T,)
    project : callable
        Euclidean projection onto the feasible set.  The iterate starts at
        ``project(0)`` (the uniform weight for the simplex, the origin for
        balls).
    cfg : SolverConfig

    Returns
    -------
    (w, report) : (ndarray, SolveReport)
        ``report.kkt_residual`` is the sup-norm of the unit-step projected
        gradient map ``w - project(w - grad)``; convergence is declared when
        it falls below ``cfg.tol * (1 + ||X'y||_inf)``.  Under backtracking
        the objective is nonincreasing at every iteration.  On
        non-convergence the best iterate found is returned with
        ``converged=False``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError(f"design {X.shape} and response {y.shape} are incompatible")
    gram = X.T @ X
    xty = X.T @ y
    const = float(y @ y)
    kkt_scale = cfg.tol * (1.0 + float(np.abs(xty).max(initial=0.0)))

    def objective(w):
        return float(w @ (gram @ w)) - 2.0 * float(xty @ w) + const

    lam_max = _power_iteration_norm(gram)
    step0 = 1.0 / (2.0 * lam_max) if lam_max > 0 else 1.0

    w = project(np.zeros(X.shape[1]))
    f = objective(w)
    grad = 2.0 * (gram @ w - xty)
    trace = [f]
    step = step0
    kkt = float(np.abs(w - project(w - grad)).max(initial=0.0))
    converged = kkt <= kkt_scale
    iterations = 0

    for iterations in range(1, cfg.max_iters + 1):
        if converged:
            iterations -= 1
            break
        if cfg.step_rule == "fixed":
            w_new = project(w - step0 * grad)
            d = w_new - w
            f_new = objective(w_new)
        else:
            # Barzilai-Borwein trial step, halved until the projected-descent
            # condition holds; guarantees a monotone objective.
            for _ in range(80):
                w_new = project(w - step * grad)
                d = w_new - w
                dd = float(d @ d)
                f_new = objective(w_new)
                if f_new <= f + float(grad @ d) + dd / (2.0 * step) + 1e-14 * (1.0 + abs(f)):
                    break
                step *= 0.5
        grad_new = 2.0 * (gram @ w_new - xty)
        dg = grad_new - grad
        dd = float(d @ d)
        ddg = float(d @ dg)
        if cfg.step_rule == "backtracking":
            step = dd / ddg if ddg > 0 else step * 2.0
            step = min(max(step, 1e-16 * step0), 1e16 * step0)
        w, f, grad = w_new, f_new, grad_new
        trace.append(f)
        kkt = float(np.abs(w - project(w - grad)).max(initial=0.0))
        converged = kkt <= kkt_scale
        if dd == 0.0 and not converged:
            # Stalled: projection returned the same point but the gradient
            # map is above tolerance (degenerate geometry); stop honestly.
            break

    report = SolveReport(
        iterations=iterations,
        final_objective=f,
        converged=converged,
        kkt_residual=kkt,
        objective_trace=tuple(trace),
    )
    return w, report


def coordinate_descent_penalized(
    X,
    y,
    penalty,
    cfg: SolverConfig = SolverConfig(),
    penalty_weights=None,
):
    """Minimize sum((y - mu - X w)^2) + P(w) by cyclic coordinate descent.

    The intercept ``mu`` is unpenalized and handled by centering.
    ``penalty`` is a :class:`LassoPenalty` or :class:`ElasticNetPenalty`;
    ``penalty_weights`` optionally scales the penalty per column (0 leaves
    a column unpenalized).

    Returns
    -------
    (intercept, w, report)
        ``report.kkt_residual`` is the largest per-coordinate subgradient
        violation of the stationarity conditions.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError(f"design {X.shape} and response {y.shape} are incompatible")
    n, p = X.shape
    weights = np.ones(p) if penalty_weights is None else np.asarray(penalty_weights, dtype=float)
    if weights.shape != (p,):
        raise DimensionError("penalty_weights must have one entry per column")

    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    xc = X - x_mean
    yc = y - y_mean
    col_sq = (xc**2).sum(axis=0)
    l1 = penalty.l1 * weights
    l2 = penalty.l2 * weights

    w = np.zeros(p)
    r = yc.copy()
    kkt_scale = cfg.tol * (1.0 + 2.0 * float(np.abs(xc.T @ yc).max(initial=0.0)))

    def kkt_residual():
        g = -2.0 * (xc.T @ r) + 2.0 * l2 * w
        viol = np.where(
            w != 0.0,
            np.abs(g + l1 * np.sign(w)),
            np.maximum(np.abs(g) - l1, 0.0),
        )
        return float(viol.max(initial=0.0))

    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = w[j]
            z = float(xc[:, j] @ r) + col_sq[j] * old
            thr = l1[j] / 2.0
            w_j = np.sign(z) * max(abs(z) - thr, 0.0) / (col_sq[j] + l2[j])
            if w_j != old:
                w[j] = w_j
                r -= xc[:, j] * (w_j - old)
        kkt = kkt_residual()
        if kkt <= kkt_scale:
            converged = True
            break

    kkt = kkt_residual()
    intercept = y_mean - float(x_mean @ w)
    penalty_value = float(l2 @ (w**2)) + float(l1 @ np.abs(w))
    report = SolveReport(
        iterations=iterations,
        final_objective=float(r @ r) + penalty_value,
        converged=converged,
        kkt_residual=kkt,
    )
    return intercept, w, report


def pca_factors(Y, k: int):
    """Principal-component factors and loadings of a T x N outcome matrix.

    The factor matrix ``F`` (T x k) collects the eigenvectors of ``Y Y'``
    for the k largest eigenvalues, scaled so that ``F'F / T = I_k``; the
    loadings are ``L = Y'F / T``.  Each factor column has its
    largest-magnitude entry made positive so traces are reproducible (the
    fitted values ``F L'`` are invariant to the sign choice).
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise DimensionError(f"Y must be 2-D; got shape {Y.shape}")
    n_periods, n_units = Y.shape
    if not 1 <= k <= min(n_periods, n_units):
        raise DimensionError(
            f"number of factors k={k} must lie in 1..min(T, N)={min(n_periods, n_units)}"
        )
    try:
        u, _, _ = np.linalg.svd(Y, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed on a {n_periods}x{n_units} outcome matrix"
        ) from exc
    factors = np.sqrt(n_periods) * u[:, :k]
    flip = np.sign(factors[np.abs(factors).argmax(axis=0), np.arange(k)])
    flip[flip == 0] = 1.0
    factors = factors * flip
    loadings = Y.T @ factors / n_periods
    return factors, loadings


def alternating_ls(Y, X, k: int, cfg: SolverConfig = SolverConfig()):
    """Alternating least squares for the factor-plus-regression model.

    Minimizes ``||Y - X beta - F L'||_F^2`` subject to ``F'F/T = I_k``
    by alternating (i) ``beta`` given the factor structure (pooled OLS on
    the residualized data) and (ii) ``(F, L)`` given ``beta`` (principal
    components of ``Y - X beta``).  Each half step solves its subproblem
    exactly, so the objective is nonincreasing across iterations.

    Parameters
    ----------
    Y : ndarray of shape (T, N)
    X : ndarray of shape (T, N, k_x) or None
        With ``X=None`` the routine reduces to :func:`pca_factors`.
    k : int
    cfg : SolverConfig

    Returns
    -------
    (F, L, beta, report)
        ``beta`` is None when no covariates are supplied.
    """
    Y = np.asarray(Y, dtype=float)
    if X is None:
        factors, loadings = pca_factors(Y, k)
        resid = Y - factors @ loadings.T
        f = float((resid**2).sum())
        report = SolveReport(
            iterations=1, final_objective=f, converged=True, kkt_residual=0.0,
            objective_trace=(f,),
        )
        return factors, loadings, None, report

    X = np.asarray(X, dtype=float)
    n_periods, n_units = Y.shape
    if X.ndim != 3 or X.shape[:2] != (n_periods, n_units):
        raise DimensionError(
            f"covariates must have shape (T, N, k_x); got {X.shape} for a "
            f"{n_periods}x{n_units} outcome matrix"
        )
    design = X.reshape(n_periods * n_units, X.shape[2])

    beta = np.zeros(X.shape[2])
    factors, loadings = pca_factors(Y, k)
    trace = []
    prev = np.inf
    converged = False
    rel_drop = np.inf
    for iteration in range(1, cfg.max_iters + 1):
        target = (Y - factors @ loadings.T).reshape(-1)
        beta, *_ = np.linalg.lstsq(design, target, rcond=None)
        residualized = Y - (design @ beta).reshape(n_periods, n_units)
        factors, loadings = pca_factors(residualized, k)
        f = float(((residualized - factors @ loadings.T) ** 2).sum())
        trace.append(f)
        rel_drop = (prev - f) / max(1.0, abs(prev)) if np.isfinite(prev) else np.inf
        if np.isfinite(prev) and rel_drop <= cfg.tol:
            converged = True
            break
        prev = f
    report = SolveReport(
        iterations=len(trace),
        final_objective=trace[-1],
        converged=converged,
        kkt_residual=max(rel_drop, 0.0) if np.isfinite(rel_drop) else np.inf,
        objective_trace=tuple(trace),
    )
    return factors, loadings, beta, report


def ols(X, y) -> np.ndarray:
    """Least-squares coefficients via the normal equations.

    Raises
    ------
    RankDeficiencyError
        If the Gram matrix has condition number above ``1e12``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError(f"design {X.shape} and response {y.shape} are incompatible")
    gram = X.T @ X
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise RankDeficiencyError(
            f"design is rank deficient: Gram condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}"
        )
    return np.linalg.solve(gram, X.T @ y)
