"""Permutation-based conformal tests and confidence intervals.

The test pipeline composes three pure steps: subtract the hypothesized
effect trajectory from the treated outcome, fit a counterfactual proxy on
the full adjusted sample, and compare the post-treatment residuals against
their permutation distribution.  The p-value is the fraction of
permutations whose statistic is at least the observed one; because every
permutation set contains the identity, p-values are bounded below by
``1/|Pi|`` and the test is conservative under ties.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .estimators import EstimatorSpec, fit
from .exceptions import DimensionError
from .panel import (
    EffectTrajectory,
    PanelData,
    adjust_under_null,
    aggregate_time_blocks,
    aggregate_units,
    pointwise_slice,
    pre_treatment_slice,
)

__all__ = [
    "PermutationScheme",
    "Statistic",
    "TestResult",
    "CiEntry",
    "ConfidenceBand",
    "statistic_sq",
    "statistic_mean",
    "permute_residuals",
    "p_value",
    "test_sharp_null",
    "pointwise_ci",
    "confidence_band",
    "test_average_effect",
    "test_multi_unit",
    "placebo_test",
    "default_ci_grid",
]

#: Full enumeration of all permutations is refused above this length.
MAX_ENUMERATED_LENGTH = 10

_CHUNK = 4096


@dataclass(frozen=True)
class PermutationScheme:
    """A finite set of permutations of ``{1..T}``, identity included.

    Three kinds are supported:

    ``moving_block``
        The ``T`` cyclic shifts of the time indices.  Forms a group, which
        is what exact finite-sample validity rests on, and remains
        appropriate under weak serial dependence.  This is the default.
    ``iid_all``
        All ``T!`` permutations; only permitted for ``T <= 10``.
    ``iid_sampled``
        ``n_samples`` permutations: the identity plus ``n_samples - 1``
        uniform draws with replacement from the full set.

    ``length`` may be left None, in which case the scheme binds to the
    residual window it is used on; a bound length is validated against the
    window and mismatches raise ``DimensionError``.
    """

    kind: str
    length: int | None = None
    n_samples: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("moving_block", "iid_all", "iid_sampled"):
            raise ValueError(f"unknown permutation scheme {self.kind!r}")
        if self.kind == "iid_all":
            if self.length is None:
                raise ValueError("iid_all must be constructed with an explicit length")
            if self.length > MAX_ENUMERATED_LENGTH:
                raise ValueError(
                    f"iid_all enumerates T! permutations and is limited to "
                    f"T <= {MAX_ENUMERATED_LENGTH}; got T={self.length}"
                )
        if self.kind == "iid_sampled" and self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @classmethod
    def moving_block(cls, length: int | None = None) -> "PermutationScheme":
        return cls("moving_block", length=length)

    @classmethod
    def iid_all(cls, length: int) -> "PermutationScheme":
        return cls("iid_all", length=length)

    @classmethod
    def iid_sampled(cls, n_samples: int = 5000, seed: int = 0, length: int | None = None) -> "PermutationScheme":
        return cls("iid_sampled", length=length, n_samples=n_samples, seed=seed)

    @property
    def contains_identity(self) -> bool:
        return True

    @property
    def is_group(self) -> bool:
        return self.kind in ("moving_block", "iid_all")

    def _window(self, n: int | None = None) -> int:
        if n is None:
            if self.length is None:
                raise DimensionError("scheme has no bound length and none was supplied")
            return self.length
        if self.length is not None and self.length != n:
            raise DimensionError(
                f"scheme is bound to length {self.length} but the residual window has length {n}"
            )
        return n

    def size(self, n: int | None = None) -> int:
        n = self._window(n)
        if self.kind == "moving_block":
            return n
        if self.kind == "iid_all":
            return math.factorial(n)
        return self.n_samples

    def iter_permutations(self, n: int | None = None) -> Iterable[np.ndarray]:
        """Yield each permutation as a 0-based index array, identity first."""
        n = self._window(n)
        for chunk in self._iter_chunks(n):
            yield from chunk

    def _iter_chunks(self, n: int) -> Iterable[np.ndarray]:
        """Yield (m, n) matrices of permutation rows, identity in the first row."""
        base = np.arange(n)
        if self.kind == "moving_block":
            yield (base[None, :] + base[:, None]) % n
        elif self.kind == "iid_all":
            source = itertools.permutations(range(n))
            while True:
                block = list(itertools.islice(source, _CHUNK))
                if not block:
                    return
                yield np.asarray(block, dtype=np.intp)
        else:
            rng = np.random.default_rng(self.seed)
            remaining = self.n_samples - 1
            yield base[None, :]
            while remaining > 0:
                m = min(remaining, _CHUNK)
                yield rng.permuted(np.tile(base, (m, 1)), axis=1)
                remaining -= m


def statistic_sq(residuals, post_window, q: float = 1.0) -> float:
    """Scaled lq aggregate of the post-treatment residuals.

    Computes ``(T*^{-1/2} * sum |u_t|^q)^(1/q)`` over the post window;
    ``q=1`` is the default and is robust to heavy tails.  Large values
    indicate evidence against the null.
    """
    if q < 1:
        raise ValueError(f"statistic order q must be >= 1; got {q}")
    u = np.asarray(residuals, dtype=float)[post_window]
    if u.size == 0:
        raise DimensionError("post-treatment window is empty")
    return float((np.abs(u) ** q).sum() / np.sqrt(u.size)) ** (1.0 / q)


def statistic_mean(residuals, post_window) -> float:
    """Absolute scaled sum ``|sum u_t| / sqrt(T*)``; targets the average effect."""
    u = np.asarray(residuals, dtype=float)[post_window]
    if u.size == 0:
        raise DimensionError("post-treatment window is empty")
    return float(np.abs(u.sum()) / np.sqrt(u.size))


@dataclass(frozen=True)
class Statistic:
    """Declarative choice of test statistic: ``sq`` with an order, or ``mean``."""

    kind: str = "sq"
    q: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sq", "mean"):
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        if self.kind == "sq" and self.q < 1:
            raise ValueError(f"statistic order q must be >= 1; got {self.q}")

    @property
    def label(self):
        return f"S_{self.q:g}" if self.kind == "sq" else "mean"

    @property
    def order(self):
        return self.q if self.kind == "sq" else "mean"

    def __call__(self, residuals, post_window) -> float:
        if self.kind == "sq":
            return statistic_sq(residuals, post_window, self.q)
        return statistic_mean(residuals, post_window)

    def _rows(self, post_values: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an (m, T*) matrix of post-window residuals."""
        n_post = post_values.shape[1]
        if self.kind == "sq":
            return ((np.abs(post_values) ** self.q).sum(axis=1) / np.sqrt(n_post)) ** (1.0 / self.q)
        return np.abs(post_values.sum(axis=1)) / np.sqrt(n_post)


def permute_residuals(residuals, pi) -> np.ndarray:
    """Reindex a residual vector by a permutation (0-based index array)."""
    residuals = np.asarray(residuals, dtype=float)
    pi = np.asarray(pi, dtype=np.intp)
    if sorted(pi.tolist()) != list(range(residuals.shape[0])):
        raise DimensionError("pi is not a bijection on the residual window")
    return residuals[pi]


@dataclass(frozen=True)
class TestResult:
    """Observed statistic, its permutation distribution, and the p-value."""

    statistic: float
    permuted_statistics: np.ndarray
    p_value: float
    scheme: PermutationScheme
    estimator_id: str | None
    q: float | str
    window: tuple[int, int]
    residuals: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_permutations(self) -> int:
        return self.permuted_statistics.shape[0]


def p_value(residuals, scheme: PermutationScheme, statistic, post_window) -> TestResult:
    """Exact permutation p-value of a residual vector.

    Parameters
    ----------
    residuals : array-like
        Residuals on the fitted window.
    scheme : PermutationScheme
    statistic : Statistic or callable
        A callable must accept ``(permuted_residuals, post_window)``.
    post_window : slice
        Positions of the post-treatment periods inside ``residuals``.

    Returns
    -------
    TestResult
        ``p_value = #{pi : S(u_pi) >= S(u)} / |Pi|``; the identity
        permutation guarantees ``p_value >= 1/|Pi|``.
    """
    residuals = np.asarray(residuals, dtype=float)
    n = residuals.shape[0]
    scheme._window(n)
    size = scheme.size(n)

    if isinstance(statistic, Statistic):
        post_idx = np.arange(n)[post_window]
        if post_idx.size == 0:
            raise DimensionError("post-treatment window is empty")
        stats = np.empty(size)
        offset = 0
        for chunk in scheme._iter_chunks(n):
            vals = residuals[chunk[:, post_idx]]
            stats[offset: offset + chunk.shape[0]] = statistic._rows(vals)
            offset += chunk.shape[0]
        q = statistic.order
    else:
        stats = np.empty(size)
        for i, pi in enumerate(scheme.iter_permutations(n)):
            stats[i] = statistic(residuals[pi], post_window)
        q = "custom"

    observed = stats[0]
    pv = float((stats >= observed).mean())
    return TestResult(
        statistic=float(observed),
        permuted_statistics=stats,
        p_value=pv,
        scheme=scheme,
        estimator_id=None,
        q=q,
        window=(1, n),
        residuals=residuals,
    )


def test_sharp_null(
    panel: PanelData,
    alpha0,
    spec: EstimatorSpec,
    scheme: PermutationScheme | None = None,
    statistic: Statistic | Callable = Statistic(),
) -> TestResult:
    """Test a fully specified effect trajectory.

    Subtracts ``alpha0`` from the post-treatment treated outcome, fits the
    proxy model on all periods of the adjusted panel, and evaluates the
    permutation p-value of the post-treatment residuals.

    Parameters
    ----------
    panel : PanelData
    alpha0 : EffectTrajectory or array-like
        Hypothesized effects for the post-treatment periods.
    spec : EstimatorSpec
    scheme : PermutationScheme, default moving-block
    statistic : Statistic or callable
    """
    scheme = scheme or PermutationScheme.moving_block()
    adjusted = adjust_under_null(panel, alpha0)
    fitted = fit(adjusted, spec)
    result = p_value(fitted.residuals, scheme, statistic, fitted.post_slice(panel.t0))
    return replace(
        result,
        estimator_id=fitted.estimator_id,
        window=(fitted.start, panel.n_periods),
    )


def default_ci_grid(
    panel: PanelData,
    t: int,
    spec: EstimatorSpec,
    n_points: int = 41,
    width: float = 5.0,
) -> np.ndarray:
    """Candidate-effect grid centered on the zero-null point estimate.

    The grid spans ``width`` robust standard deviations (1.4826 * median
    absolute deviation of the pre-treatment residuals) on each side of the
    point estimate ``Y_t - proxy_t`` from a zero-effect fit.
    """
    sub = pointwise_slice(panel, t)
    fitted = fit(adjust_under_null(sub, [0.0]), spec)
    point = float(fitted.residuals[-1])
    pre = fitted.residuals[:-1]
    spread = 1.4826 * float(np.median(np.abs(pre - np.median(pre))))
    if spread <= 0:
        spread = max(float(pre.std()), 1e-8)
    return np.linspace(point - width * spread, point + width * spread, n_points)


@dataclass(frozen=True)
class CiEntry:
    """Accepted candidate effects for one post-treatment period."""

    period: int
    grid: np.ndarray
    p_values: np.ndarray
    accepted: np.ndarray
    level: float
    lower: float
    upper: float
    has_gaps: bool
    is_empty: bool


@dataclass(frozen=True)
class ConfidenceBand:
    """Pointwise confidence intervals over the post-treatment window."""

    entries: tuple
    level: float

    def interval(self, period: int) -> tuple[float, float]:
        for entry in self.entries:
            if entry.period == period:
                return (entry.lower, entry.upper)
        raise KeyError(f"no interval for period {period}")


def pointwise_ci(
    panel: PanelData,
    t: int,
    spec: EstimatorSpec,
    scheme: PermutationScheme | None = None,
    statistic: Statistic | Callable = Statistic(),
    grid=None,
    level: float = 0.9,
) -> CiEntry:
    """Confidence set for the effect in period ``t`` by test inversion.

    For each candidate value the pre-treatment rows plus the adjusted row
    ``t`` form a one-post-period panel that is tested with
    :func:`test_sharp_null`; candidates whose p-value exceeds ``1 - level``
    are accepted.  The reported interval is the hull of the accepted set,
    with a flag when the set has interior gaps (and a warning when it is
    empty, which indicates a too-coarse grid or severe misfit).
    """
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1); got {level}")
    scheme = scheme or PermutationScheme.moving_block()
    if grid is None:
        grid = default_ci_grid(panel, t, spec)
    grid = np.asarray(grid, dtype=float)
    sub = pointwise_slice(panel, t)
    alpha = 1.0 - level
    pvals = np.empty(grid.shape[0])
    for i, candidate in enumerate(grid):
        pvals[i] = test_sharp_null(sub, [candidate], spec, scheme, statistic).p_value
    # Strict inequality; the slack absorbs float error in 1 - level so that
    # p-values exactly on the boundary grid k/|Pi| = alpha are rejected.
    accepted = pvals > alpha + 1e-12
    is_empty = not accepted.any()
    if is_empty:
        warnings.warn(
            f"no candidate effect accepted for period {t}: widen or refine the grid",
            UserWarning,
            stacklevel=2,
        )
        lower = upper = float("nan")
        has_gaps = False
    else:
        where = np.nonzero(accepted)[0]
        lower = float(grid[where[0]])
        upper = float(grid[where[-1]])
        has_gaps = bool((~accepted[where[0]: where[-1] + 1]).any())
    return CiEntry(
        period=t,
        grid=grid,
        p_values=pvals,
        accepted=accepted,
        level=level,
        lower=lower,
        upper=upper,
        has_gaps=has_gaps,
        is_empty=is_empty,
    )


def confidence_band(
    panel: PanelData,
    spec: EstimatorSpec,
    scheme: PermutationScheme | None = None,
    statistic: Statistic | Callable = Statistic(),
    grid=None,
    level: float = 0.9,
) -> ConfidenceBand:
    """Pointwise confidence intervals for every post-treatment period."""
    entries = tuple(
        pointwise_ci(panel, t, spec, scheme, statistic, grid, level)
        for t in range(panel.t0 + 1, panel.n_periods + 1)
    )
    return ConfidenceBand(entries=entries, level=level)


def test_average_effect(
    panel: PanelData,
    alpha_bar0: float,
    spec: EstimatorSpec,
    scheme: PermutationScheme | None = None,
    statistic: Statistic | Callable = Statistic(),
) -> TestResult:
    """Test the average post-treatment effect via block aggregation.

    The panel is averaged over consecutive blocks of the post-window
    length (``T`` must be divisible by it), turning the hypothesis about
    the average effect into a one-period sharp null on the aggregated
    panel.  The effective sample size ``T / T*`` is recorded in the result
    metadata.
    """
    aggregated = aggregate_time_blocks(panel)
    result = test_sharp_null(aggregated, [float(alpha_bar0)], spec, scheme, statistic)
    meta = dict(result.metadata)
    meta["effective_sample_size"] = aggregated.n_periods
    return replace(result, metadata=meta)


def test_multi_unit(
    panel: PanelData,
    alpha_bar_traj,
    spec: EstimatorSpec,
    scheme: PermutationScheme | None = None,
    statistic: Statistic | Callable = Statistic(),
) -> TestResult:
    """Test a trajectory of cross-unit average effects with several treated units."""
    if panel.n_treated < 2:
        raise DimensionError(
            f"test_multi_unit needs at least two treated units; got {panel.n_treated}"
        )
    averaged = aggregate_units(panel)
    return test_sharp_null(averaged, alpha_bar_traj, spec, scheme, statistic)


def placebo_test(
    panel: PanelData,
    tau: int,
    spec: EstimatorSpec,
    scheme: PermutationScheme | None = None,
    statistic: Statistic | Callable = Statistic(),
) -> TestResult:
    """Specification check: test a zero effect at a fake treatment date.

    The post-treatment rows are discarded and the last ``tau``
    pre-treatment periods are relabeled as post.  Under correct
    specification the null is true by construction, so rejections signal a
    model or dependence problem.  The returned result carries the full
    residual series for diagnostic plots.
    """
    sub = pre_treatment_slice(panel, tau)
    result = test_sharp_null(sub, EffectTrajectory.zero(tau), spec, scheme, statistic)
    meta = dict(result.metadata)
    meta["tau"] = tau
    return replace(result, metadata=meta)
