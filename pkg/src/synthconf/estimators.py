"""Counterfactual-proxy estimators.

Every estimator consumes a null-adjusted panel, fits the proxy model for
the treated unit's counterfactual outcome on *all* periods of that panel,
and returns the fitted proxy series together with the residuals used for
permutation inference.  Estimators whose residuals permute covariantly
with a row permutation of the data carry ``permutation_invariant=True``;
lag-based models consume a prefix of the sample and record the shortened
fitted window instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import DimensionError
from .panel import PanelData
from .solvers import (
    ElasticNetPenalty,
    LassoPenalty,
    SolveReport,
    SolverConfig,
    alternating_ls,
    coordinate_descent_penalized,
    ols,
    pca_factors,
    project_l1_ball,
    project_nuclear_ball,
    project_simplex,
    projected_gradient_ls,
)

__all__ = ["ProxyFit", "EstimatorSpec", "fit", "default_nuclear_radius"]

_PANEL_KINDS = (
    "did", "sc", "classo", "lasso", "elastic_net",
    "factor", "interactive_fe", "matrix_completion",
)
_KINDS = _PANEL_KINDS + ("ar", "fused")


@dataclass(frozen=True)
class ProxyFit:
    """Fitted counterfactual proxy and residuals for the treated unit.

    ``start`` is the first fitted period (1-based); panel estimators fit
    all periods (``start=1``) while models with ``K`` lags start at
    ``K+1``.  On the fitted window, ``proxy + residuals`` reconstructs the
    treated null-adjusted outcome exactly.
    """

    proxy: np.ndarray
    residuals: np.ndarray
    start: int
    estimator_id: str
    permutation_invariant: bool
    diagnostics: SolveReport | None = None
    params: dict = field(default_factory=dict)

    @property
    def n_fitted(self) -> int:
        return self.residuals.shape[0]

    def post_slice(self, t0: int) -> slice:
        """Positions of the post-treatment periods inside the residual vector."""
        first = t0 + 1 - self.start
        if first < 0:
            raise DimensionError(
                f"fitted window starts at period {self.start}, after the last "
                f"pre-treatment period {t0}"
            )
        if first >= self.n_fitted:
            raise DimensionError("fitted window contains no post-treatment periods")
        return slice(first, self.n_fitted)


@dataclass(frozen=True)
class EstimatorSpec:
    """Declarative description of a counterfactual-proxy estimator.

    Build instances through the classmethod constructors (``did()``,
    ``sc()``, ``classo(radius=1)``, ...); the ``kind`` string and the
    parameter fields are what the fitting dispatcher interprets.
    """

    kind: str
    radius: float | None = None           # l1 / nuclear-ball constraint
    lam: float | None = None              # penalty level
    alpha: float | None = None            # elastic-net mixing weight
    n_factors: int | None = None
    n_lags: int | None = None
    base: "EstimatorSpec | None" = None   # first stage of a fused model
    ar_fitter: Callable | None = None     # optional nonlinear lag-model fitter
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "fused":
            if self.base is None or self.base.kind not in _PANEL_KINDS:
                raise ValueError("fused estimators need a panel-model base (not 'ar'/'fused')")
            if self.n_lags is None or self.n_lags < 1:
                raise ValueError("fused estimators need n_lags >= 1")
        if self.kind == "ar" and (self.n_lags is None or self.n_lags < 1):
            raise ValueError("ar estimators need n_lags >= 1")
        if self.ar_fitter is not None and self.kind != "ar":
            raise ValueError("ar_fitter is only meaningful for kind='ar'")

    # -- constructors ----------------------------------------------------
    @classmethod
    def did(cls, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("did", solver=solver or SolverConfig())

    @classmethod
    def sc(cls, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("sc", solver=solver or SolverConfig())

    @classmethod
    def classo(cls, radius: float = 1.0, solver: SolverConfig | None = None) -> "EstimatorSpec":
        if not radius > 0:
            raise ValueError(f"radius must be positive; got {radius}")
        return cls("classo", radius=radius, solver=solver or SolverConfig())

    @classmethod
    def lasso(cls, lam: float, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("lasso", lam=lam, solver=solver or SolverConfig())

    @classmethod
    def elastic_net(cls, lam: float, alpha: float, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("elastic_net", lam=lam, alpha=alpha, solver=solver or SolverConfig())

    @classmethod
    def factor(cls, n_factors: int, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("factor", n_factors=n_factors, solver=solver or SolverConfig())

    @classmethod
    def interactive_fe(cls, n_factors: int, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("interactive_fe", n_factors=n_factors, solver=solver or SolverConfig())

    @classmethod
    def matrix_completion(cls, radius: float | None = None, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("matrix_completion", radius=radius, solver=solver or SolverConfig())

    @classmethod
    def ar(cls, n_lags: int, fitter: Callable | None = None, solver: SolverConfig | None = None) -> "EstimatorSpec":
        return cls("ar", n_lags=n_lags, ar_fitter=fitter, solver=solver or SolverConfig())

    @classmethod
    def fused(cls, base: "EstimatorSpec", n_lags: int) -> "EstimatorSpec":
        return cls("fused", base=base, n_lags=n_lags, solver=base.solver)

    @property
    def label(self) -> str:
        if self.kind == "classo":
            return f"classo(K={self.radius:g})"
        if self.kind == "lasso":
            return f"lasso(lam={self.lam:g})"
        if self.kind == "elastic_net":
            return f"elastic_net(lam={self.lam:g},alpha={self.alpha:g})"
        if self.kind in ("factor", "interactive_fe"):
            return f"{self.kind}(k={self.n_factors})"
        if self.kind == "matrix_completion":
            return f"matrix_completion(K={'auto' if self.radius is None else format(self.radius, 'g')})"
        if self.kind == "ar":
            return f"ar(lags={self.n_lags})"
        if self.kind == "fused":
            return f"fused({self.base.label},lags={self.n_lags})"
        return self.kind


def fit(panel: PanelData, spec) -> ProxyFit:
    """Fit the proxy model described by ``spec`` on a null-adjusted panel.

    ``spec`` is an :class:`EstimatorSpec` or, for user-supplied estimators,
    any callable mapping a panel to a :class:`ProxyFit`; custom fits are
    responsible for setting their own ``permutation_invariant`` flag.
    """
    if callable(spec) and not isinstance(spec, EstimatorSpec):
        fitted = spec(panel)
        if not isinstance(fitted, ProxyFit):
            raise TypeError(
                f"custom estimator returned {type(fitted).__name__}, expected ProxyFit"
            )
        return fitted
    if spec.kind == "did":
        return fit_did(panel)
    if spec.kind == "sc":
        return fit_sc(panel, spec.solver)
    if spec.kind == "classo":
        return fit_classo(panel, spec.radius if spec.radius is not None else 1.0, spec.solver)
    if spec.kind == "lasso":
        return fit_penalized(panel, LassoPenalty(spec.lam), spec.solver)
    if spec.kind == "elastic_net":
        return fit_penalized(panel, ElasticNetPenalty(spec.lam, spec.alpha), spec.solver)
    if spec.kind == "factor":
        return fit_factor(panel, spec.n_factors)
    if spec.kind == "interactive_fe":
        return fit_interactive_fe(panel, spec.n_factors, spec.solver)
    if spec.kind == "matrix_completion":
        return fit_matrix_completion(panel, spec.radius, spec.solver)
    if spec.kind == "ar":
        return fit_ar(panel, spec.n_lags, spec.ar_fitter)
    return fit_fused(panel, spec.base, spec.n_lags)


def _require_controls(panel: PanelData, who: str) -> None:
    if panel.n_controls < 1:
        raise DimensionError(f"{who} requires at least one control unit")


def _design(panel: PanelData):
    """Control outcomes plus the treated unit's covariates as free columns.

    Returns (y, X, n_constrained): the simplex / l1 constraint applies to
    the first ``n_constrained`` columns only; covariate coefficients are
    unconstrained.
    """
    X = panel.controls
    n_constrained = X.shape[1]
    if panel.covariates is not None:
        X = np.hstack([X, panel.covariates[:, 0, :]])
    return panel.treated, X, n_constrained


def _block_projection(project_head: Callable, n_head: int, n_total: int) -> Callable:
    if n_head == n_total:
        return project_head

    def project(v):
        out = v.copy()
        out[:n_head] = project_head(v[:n_head])
        return out

    return project


def fit_did(panel: PanelData) -> ProxyFit:
    """Difference-in-differences: equal control weights plus a level shift.

    The level shift is the full-sample mean of the treated-minus-control
    differences, so the residuals sum to zero exactly.
    """
    _require_controls(panel, "difference-in-differences")
    y = panel.treated
    control_mean = panel.controls.mean(axis=1)
    mu = float((y - control_mean).mean())
    proxy = mu + control_mean
    return ProxyFit(
        proxy=proxy,
        residuals=y - proxy,
        start=1,
        estimator_id="did",
        permutation_invariant=True,
        params={"mu": mu},
    )


def fit_sc(panel: PanelData, cfg: SolverConfig = SolverConfig()) -> ProxyFit:
    """Synthetic control: simplex-constrained least-squares weights on controls."""
    _require_controls(panel, "synthetic control")
    y, X, n_con = _design(panel)
    project = _block_projection(project_simplex, n_con, X.shape[1])
    w, report = projected_gradient_ls(X, y, project, cfg)
    proxy = X @ w
    return ProxyFit(
        proxy=proxy,
        residuals=y - proxy,
        start=1,
        estimator_id="sc",
        permutation_invariant=True,
        diagnostics=report,
        params={"weights": w[:n_con], "covariate_coefs": w[n_con:]},
    )


def fit_classo(panel: PanelData, radius: float = 1.0, cfg: SolverConfig = SolverConfig()) -> ProxyFit:
    """l1-ball-constrained least squares with a free intercept.

    Nests both difference-in-differences (equal weights are feasible) and
    synthetic control (simplex weights are feasible for ``radius >= 1``).
    The intercept is concentrated out by centering, which is exact.
    """
    _require_controls(panel, "constrained lasso")
    y, X, n_con = _design(panel)
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    project = _block_projection(lambda v: project_l1_ball(v, radius), n_con, X.shape[1])
    w, report = projected_gradient_ls(X - x_mean, y - y_mean, project, cfg)
    mu = y_mean - float(x_mean @ w)
    proxy = mu + X @ w
    return ProxyFit(
        proxy=proxy,
        residuals=y - proxy,
        start=1,
        estimator_id=f"classo(K={radius:g})",
        permutation_invariant=True,
        diagnostics=report,
        params={"mu": mu, "weights": w[:n_con], "covariate_coefs": w[n_con:]},
    )


def fit_penalized(panel: PanelData, penalty, cfg: SolverConfig = SolverConfig()) -> ProxyFit:
    """Penalized regression on control outcomes (lasso or elastic net)."""
    _require_controls(panel, "penalized regression")
    y, X, n_con = _design(panel)
    weights = np.zeros(X.shape[1])
    weights[:n_con] = 1.0
    mu, w, report = coordinate_descent_penalized(X, y, penalty, cfg, penalty_weights=weights)
    proxy = mu + X @ w
    if isinstance(penalty, LassoPenalty):
        label = f"lasso(lam={penalty.lam:g})"
    else:
        label = f"elastic_net(lam={penalty.lam:g},alpha={penalty.alpha:g})"
    return ProxyFit(
        proxy=proxy,
        residuals=y - proxy,
        start=1,
        estimator_id=label,
        permutation_invariant=True,
        diagnostics=report,
        params={"mu": mu, "weights": w[:n_con], "covariate_coefs": w[n_con:]},
    )


def fit_factor(panel: PanelData, n_factors: int) -> ProxyFit:
    """Pure factor model: principal components of the full outcome matrix."""
    factors, loadings = pca_factors(panel.outcomes, n_factors)
    y = panel.treated
    proxy = factors @ loadings[0]
    resid = y - proxy
    report = SolveReport(
        iterations=1,
        final_objective=float(((panel.outcomes - factors @ loadings.T) ** 2).sum()),
        converged=True,
        kkt_residual=0.0,
    )
    return ProxyFit(
        proxy=proxy,
        residuals=resid,
        start=1,
        estimator_id=f"factor(k={n_factors})",
        permutation_invariant=True,
        diagnostics=report,
        params={"treated_loading": loadings[0]},
    )


def fit_interactive_fe(panel: PanelData, n_factors: int, cfg: SolverConfig = SolverConfig()) -> ProxyFit:
    """Interactive fixed effects: latent factors plus observed covariates.

    Raises
    ------
    DimensionError
        If the panel carries no covariates.  There is no silent fallback
        to the pure factor model: a missing covariate block almost always
        indicates a misconfigured pipeline.
    """
    if panel.covariates is None:
        raise DimensionError(
            "interactive fixed effects requires covariates; use a factor spec "
            "for the covariate-free model"
        )
    factors, loadings, beta, report = alternating_ls(
        panel.outcomes, panel.covariates, n_factors, cfg
    )
    proxy = factors @ loadings[0] + panel.covariates[:, 0, :] @ beta
    return ProxyFit(
        proxy=proxy,
        residuals=panel.treated - proxy,
        start=1,
        estimator_id=f"interactive_fe(k={n_factors})",
        permutation_invariant=True,
        diagnostics=report,
        params={"treated_loading": loadings[0], "beta": beta},
    )


def default_nuclear_radius(matrix: np.ndarray) -> float:
    """Heuristic nuclear-norm budget: 1.5x the norm of a coarse low-rank sketch.

    Uses the nuclear norm of the rank-``ceil(min(N, T)/10)`` truncated SVD
    of the matrix, inflated by 1.5.  This is a pragmatic default with no
    optimality claim; callers with domain knowledge should pass an
    explicit radius.
    """
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    rank = max(1, int(np.ceil(min(matrix.shape) / 10)))
    return 1.5 * float(s[:rank].sum())


def fit_matrix_completion(
    panel: PanelData, radius: float | None = None, cfg: SolverConfig = SolverConfig()
) -> ProxyFit:
    """Least squares over the nuclear-norm ball on the full outcome matrix.

    With every entry observed the minimizer of ``sum((Y - A)^2)`` subject
    to ``||A||_* <= radius`` is the Euclidean projection of the outcome
    matrix onto the ball, so the projected-gradient recursion lands on the
    solution in a single step; the reported KKT residual is the gradient
    map evaluated at that point.
    """
    matrix = panel.outcomes.T  # units x time
    if radius is None:
        radius = default_nuclear_radius(matrix)
    fitted = project_nuclear_ball(matrix, radius)
    grad = 2.0 * (fitted - matrix)
    kkt = float(np.abs(fitted - project_nuclear_ball(fitted - 0.5 * grad, radius)).max())
    report = SolveReport(
        iterations=1,
        final_objective=float(((matrix - fitted) ** 2).sum()),
        converged=kkt <= cfg.tol * (1.0 + float(np.abs(matrix).max())),
        kkt_residual=kkt,
    )
    proxy = fitted[0]
    return ProxyFit(
        proxy=proxy,
        residuals=panel.treated - proxy,
        start=1,
        estimator_id=f"matrix_completion(K={radius:g})",
        permutation_invariant=True,
        diagnostics=report,
        params={"radius": radius},
    )


def _lag_matrix(series: np.ndarray, n_lags: int) -> np.ndarray:
    """Rows t = n_lags+1..T of (y_{t-1}, ..., y_{t-n_lags})."""
    cols = [series[n_lags - m - 1: series.shape[0] - m - 1] for m in range(n_lags)]
    return np.column_stack(cols)


def fit_ar(panel: PanelData, n_lags: int, fitter: Callable | None = None) -> ProxyFit:
    """Autoregression of the treated series on its own lags (with intercept).

    Only the treated unit is used, so panels without controls are
    accepted.  The first ``n_lags`` periods are consumed to build the lag
    design, and the fitted window starts at period ``n_lags + 1``.

    An optional ``fitter(lags, response) -> predict`` callable replaces
    the built-in linear least squares with a user-supplied (possibly
    nonlinear) lag model; ``predict`` must map a lag matrix to fitted
    values.
    """
    if n_lags < 1:
        raise DimensionError(f"n_lags must be >= 1; got {n_lags}")
    y = panel.treated
    if y.shape[0] <= n_lags + 1:
        raise DimensionError(
            f"series of length {y.shape[0]} is too short for {n_lags} lags"
        )
    lags = _lag_matrix(y, n_lags)
    target = y[n_lags:]
    params = {}
    if fitter is not None:
        predict = fitter(lags, target)
        proxy = np.asarray(predict(lags), dtype=float)
        diagnostics = None
    else:
        # Zero-variance lag columns (constant series) carry no signal and
        # would make the design collinear with the intercept; drop them.
        keep = np.ptp(lags, axis=0) > 0
        design = np.column_stack([np.ones(target.shape[0]), lags[:, keep]])
        coef = ols(design, target)
        proxy = design @ coef
        full = np.zeros(n_lags + 1)
        full[0] = coef[0]
        full[1 + np.nonzero(keep)[0]] = coef[1:]
        params["coefficients"] = full
        diagnostics = SolveReport(
            iterations=1,
            final_objective=float(((target - proxy) ** 2).sum()),
            converged=True,
            kkt_residual=0.0,
        )
    return ProxyFit(
        proxy=proxy,
        residuals=target - proxy,
        start=n_lags + 1,
        estimator_id=f"ar(lags={n_lags})",
        permutation_invariant=False,
        diagnostics=diagnostics,
        params=params,
    )


def fit_fused(panel: PanelData, base: EstimatorSpec, n_lags: int) -> ProxyFit:
    """Two-stage fit: a panel proxy, then an autoregression on its residuals.

    Stage one fits ``base`` on the full panel; stage two regresses the
    stage-one residuals on their own ``n_lags`` lags without an intercept.
    The final proxy adds the predicted residual to the stage-one proxy,
    and the fitted window starts at period ``n_lags + 1``.

    A zero-variance stage-one residual series (perfect first-stage fit)
    makes stage two degenerate; the lag coefficients are then set to zero,
    which reproduces the base proxy exactly, and the report is flagged.
    """
    if base.kind not in _PANEL_KINDS:
        raise ValueError(f"fused base must be a panel estimator; got {base.kind!r}")
    if n_lags < 1:
        raise DimensionError(f"n_lags must be >= 1; got {n_lags}")
    stage1 = fit(panel, base)
    eps = stage1.residuals
    if eps.shape[0] <= n_lags + 1:
        raise DimensionError(
            f"residual series of length {eps.shape[0]} is too short for {n_lags} lags"
        )
    lags = _lag_matrix(eps, n_lags)
    target = eps[n_lags:]
    note = ""
    if np.ptp(eps) <= 0:
        rho = np.zeros(n_lags)
        note = "degenerate second stage: constant first-stage residuals; lag coefficients set to 0"
    else:
        rho = ols(lags, target)
    predicted = lags @ rho
    proxy = stage1.proxy[n_lags:] + predicted
    diagnostics = SolveReport(
        iterations=1,
        final_objective=float(((target - predicted) ** 2).sum()),
        converged=True,
        kkt_residual=0.0,
        note=note,
    )
    return ProxyFit(
        proxy=proxy,
        residuals=target - predicted,
        start=n_lags + 1,
        estimator_id=f"fused({stage1.estimator_id},lags={n_lags})",
        permutation_invariant=False,
        diagnostics=diagnostics,
        params={"rho": rho, "base": stage1.estimator_id, "base_params": stage1.params},
    )
