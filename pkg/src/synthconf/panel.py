"""Panel data model and the transformations used by the testing pipelines.

A panel holds outcomes for one or more treated units followed by control
units, observed over ``T = t0 + n_post`` periods.  Time indices in the
public API are 1-based: periods ``1..t0`` are pre-treatment and periods
``t0+1..T`` are post-treatment.  All containers are immutable after
construction and all operations are pure functions, so values can be
shared freely across threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError

__all__ = [
    "PanelData",
    "EffectTrajectory",
    "NullAdjustedData",
    "adjust_under_null",
    "aggregate_time_blocks",
    "aggregate_units",
    "pre_treatment_slice",
    "pointwise_slice",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PanelData:
    """Outcomes of treated and control units over a common time window.

    Parameters
    ----------
    outcomes : ndarray of shape (T, n_units)
        One row per period, one column per unit.  The first ``n_treated``
        columns are the treated units, the remaining ``J`` columns are
        controls.  Every entry must be finite (balanced panel).
    t0 : int
        Number of pre-treatment periods, ``1 <= t0 < T``.
    n_treated : int, default=1
        Number of treated units (leading columns).
    covariates : ndarray of shape (T, n_units, k) or None
        Optional per-unit-per-period covariate vectors.

    Notes
    -----
    A panel with no control units (``n_units == n_treated``) is accepted
    so that pure time-series estimators can be used; estimators that need
    controls raise :class:`~synthconf.exceptions.DimensionError` instead.
    """

    outcomes: np.ndarray
    t0: int
    n_treated: int = 1
    covariates: np.ndarray | None = None

    def __post_init__(self):
        outcomes = np.asarray(self.outcomes, dtype=float)
        if outcomes.ndim != 2:
            raise DimensionError(
                f"outcomes must be 2-D (T, n_units); got shape {outcomes.shape}"
            )
        n_periods, n_units = outcomes.shape
        if not np.all(np.isfinite(outcomes)):
            raise DimensionError("outcomes contain non-finite entries; panels must be balanced")
        if not 1 <= self.t0 < n_periods:
            raise DimensionError(f"t0 must satisfy 1 <= t0 < T={n_periods}; got {self.t0}")
        if self.n_treated < 1:
            raise DimensionError(f"n_treated must be >= 1; got {self.n_treated}")
        if n_units < self.n_treated:
            raise DimensionError(
                f"panel has {n_units} columns but n_treated={self.n_treated}"
            )
        object.__setattr__(self, "outcomes", _frozen_array(outcomes))
        if self.covariates is not None:
            cov = np.asarray(self.covariates, dtype=float)
            if cov.ndim != 3 or cov.shape[:2] != (n_periods, n_units):
                raise DimensionError(
                    "covariates must have shape (T, n_units, k); got "
                    f"{cov.shape} for a {n_periods}x{n_units} panel"
                )
            if not np.all(np.isfinite(cov)):
                raise DimensionError("covariates contain non-finite entries")
            object.__setattr__(self, "covariates", _frozen_array(cov))

    @property
    def n_periods(self) -> int:
        return self.outcomes.shape[0]

    @property
    def n_units(self) -> int:
        return self.outcomes.shape[1]

    @property
    def n_controls(self) -> int:
        return self.n_units - self.n_treated

    @property
    def n_post(self) -> int:
        return self.n_periods - self.t0

    @property
    def treated(self) -> np.ndarray:
        """Outcome series of the single treated unit (requires ``n_treated == 1``)."""
        if self.n_treated != 1:
            raise DimensionError(
                f"panel has {self.n_treated} treated units; aggregate_units() first"
            )
        return self.outcomes[:, 0]

    @property
    def treated_block(self) -> np.ndarray:
        """Outcome matrix of all treated units, shape (T, n_treated)."""
        return self.outcomes[:, : self.n_treated]

    @property
    def controls(self) -> np.ndarray:
        """Outcome matrix of the control units, shape (T, J)."""
        return self.outcomes[:, self.n_treated:]

    def _replace_arrays(self, outcomes, t0, n_treated, covariates):
        return type(self)(outcomes=outcomes, t0=t0, n_treated=n_treated, covariates=covariates)


@dataclass(frozen=True)
class NullAdjustedData(PanelData):
    """Panel whose post-treatment treated outcome has hypothesized effects removed.

    Pre-treatment rows are identical to the source panel; post-treatment
    treated entries equal the observed outcome minus the hypothesized
    effect for that period.
    """


@dataclass(frozen=True)
class EffectTrajectory:
    """Hypothesized treatment-effect values over the post-treatment window."""

    values: np.ndarray

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if values.ndim != 1:
            raise DimensionError("trajectory values must be a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise DimensionError("trajectory values must be finite")
        object.__setattr__(self, "values", _frozen_array(values))

    @classmethod
    def zero(cls, n_post: int) -> "EffectTrajectory":
        return cls(np.zeros(n_post))

    @classmethod
    def constant(cls, value: float, n_post: int) -> "EffectTrajectory":
        return cls(np.full(n_post, float(value)))

    def __len__(self) -> int:
        return self.values.shape[0]


def _as_trajectory(alpha0, n_post: int) -> EffectTrajectory:
    traj = alpha0 if isinstance(alpha0, EffectTrajectory) else EffectTrajectory(alpha0)
    if len(traj) != n_post:
        raise DimensionError(
            f"trajectory has {len(traj)} values but the panel has {n_post} post-treatment periods"
        )
    return traj


def adjust_under_null(panel: PanelData, alpha0) -> NullAdjustedData:
    """Subtract a hypothesized effect trajectory from the treated outcome.

    Parameters
    ----------
    panel : PanelData
        Panel with a single treated unit.
    alpha0 : EffectTrajectory or array-like
        Hypothesized effects for periods ``t0+1..T``.

    Returns
    -------
    NullAdjustedData
        Copy of the panel with the post-treatment treated entries replaced
        by ``Y_t - alpha0_t``.  Pre-treatment rows are untouched.
    """
    if panel.n_treated != 1:
        raise DimensionError(
            "adjust_under_null requires a single treated unit; use aggregate_units() "
            "to average multiple treated units first"
        )
    traj = _as_trajectory(alpha0, panel.n_post)
    outcomes = panel.outcomes.copy()
    outcomes[panel.t0:, 0] -= traj.values
    return NullAdjustedData(
        outcomes=outcomes,
        t0=panel.t0,
        n_treated=1,
        covariates=panel.covariates,
    )


def aggregate_time_blocks(panel: PanelData) -> PanelData:
    """Average consecutive blocks of ``n_post`` periods into single rows.

    The panel is partitioned into ``T / n_post`` blocks of equal length;
    outcomes (and covariates) are averaged within each block.  The last
    block is exactly the post-treatment window, so the aggregated panel
    has a single post-treatment row.

    Raises
    ------
    DimensionError
        If ``T`` is not divisible by the post-window length.  No
        truncation rule is applied: dropping periods silently would change
        the hypothesis being tested.
    """
    block = panel.n_post
    n_periods = panel.n_periods
    if n_periods % block != 0:
        raise DimensionError(
            f"cannot aggregate: T={n_periods} is not divisible by the post-window "
            f"length {block}"
        )
    n_blocks = n_periods // block
    outcomes = panel.outcomes.reshape(n_blocks, block, panel.n_units).mean(axis=1)
    covariates = None
    if panel.covariates is not None:
        k = panel.covariates.shape[2]
        covariates = panel.covariates.reshape(n_blocks, block, panel.n_units, k).mean(axis=1)
    return panel._replace_arrays(outcomes, n_blocks - 1, panel.n_treated, covariates)


def aggregate_units(panel: PanelData) -> PanelData:
    """Average the treated units into a single treated column.

    Control columns are unchanged; covariates of the treated units are
    averaged likewise.  With one treated unit this is the identity.
    """
    n_treated = panel.n_treated
    if n_treated == 1:
        return panel
    treated_mean = panel.treated_block.mean(axis=1, keepdims=True)
    outcomes = np.hstack([treated_mean, panel.controls])
    covariates = None
    if panel.covariates is not None:
        treated_cov = panel.covariates[:, :n_treated, :].mean(axis=1, keepdims=True)
        covariates = np.concatenate([treated_cov, panel.covariates[:, n_treated:, :]], axis=1)
    return panel._replace_arrays(outcomes, panel.t0, 1, covariates)


def pre_treatment_slice(panel: PanelData, tau: int) -> PanelData:
    """Truncate to the pre-treatment window, relabeling the last ``tau`` periods as post.

    Used by placebo specification tests: periods ``1..t0-tau`` become the
    new pre-treatment window and ``t0-tau+1..t0`` the placebo post window.

    Raises
    ------
    DimensionError
        If ``tau`` is not in ``1..t0-1``.
    """
    if not 1 <= tau < panel.t0:
        raise DimensionError(f"placebo window tau must satisfy 1 <= tau < t0={panel.t0}; got {tau}")
    new_t0 = panel.t0 - tau
    if new_t0 == 1:
        warnings.warn(
            "placebo slice leaves a single pre-treatment period", UserWarning, stacklevel=2
        )
    outcomes = panel.outcomes[: panel.t0]
    covariates = None if panel.covariates is None else panel.covariates[: panel.t0]
    return panel._replace_arrays(outcomes, new_t0, panel.n_treated, covariates)


def pointwise_slice(panel: PanelData, t: int) -> PanelData:
    """Keep the pre-treatment rows plus the single post-treatment period ``t``.

    The result has ``t0 + 1`` rows and a one-period post window; it is the
    data layout used when testing a hypothesis about the effect in one
    specific period.
    """
    if not panel.t0 < t <= panel.n_periods:
        raise DimensionError(
            f"period t must lie in the post-treatment window {panel.t0 + 1}..{panel.n_periods}; got {t}"
        )
    rows = np.concatenate([np.arange(panel.t0), [t - 1]])
    outcomes = panel.outcomes[rows]
    covariates = None if panel.covariates is None else panel.covariates[rows]
    return panel._replace_arrays(outcomes, panel.t0, panel.n_treated, covariates)
