"""CSV ingestion, result serialization, and the run-configuration format.

Two CSV layouts are accepted.  *Wide*: the first column is the time
period, each remaining column is one unit, and the header row names the
units.  *Long*: columns ``unit, time, outcome`` plus optional covariate
columns.  Both layouts need the treated unit name(s) and the number of
pre-treatment periods, supplied as arguments (mirrored by CLI flags).
Values are written with 17 significant digits so write/read round-trips
are numerically exact.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, fields
from datetime import datetime, timezone

import numpy as np

from .exceptions import DimensionError, ParseError
from .panel import PanelData

__all__ = [
    "read_panel_csv",
    "write_panel_csv",
    "RunConfig",
    "write_json_result",
]

SCHEMA_VERSION = "1"

#: Environment variable consulted for the default seed.
SEED_ENV_VAR = "SYNTHCONF_SEED"


def _parse_float(cell: str, lineno: int, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(
            f"line {lineno}: non-numeric value {cell!r} in column {column!r}"
        ) from None


def _as_treated_list(treated) -> list[str]:
    if treated is None:
        raise ParseError("treated unit name(s) must be supplied")
    if isinstance(treated, str):
        return [treated]
    out = list(treated)
    if not out:
        raise ParseError("treated unit name(s) must be supplied")
    return out


def read_panel_csv(path, layout: str = "wide", t0: int | None = None,
                   treated=None, return_names: bool = False):
    """Load a panel from CSV.

    Parameters
    ----------
    path : str or Path
    layout : {"wide", "long"}
    t0 : int
        Number of pre-treatment periods.
    treated : str or sequence of str
        Name(s) of the treated unit(s); they become the leading columns.
    return_names : bool
        Also return the unit names in column order.

    Returns
    -------
    PanelData, or (PanelData, list of str) with ``return_names``.

    Raises
    ------
    ParseError
        On ragged rows, non-numeric cells, duplicate or missing
        observations, or unknown treated units; messages carry the
        offending line number.
    """
    if layout not in ("wide", "long"):
        raise ParseError(f"unknown layout {layout!r}; expected 'wide' or 'long'")
    if t0 is None:
        raise ParseError("t0 (number of pre-treatment periods) must be supplied")
    treated_names = _as_treated_list(treated)
    if layout == "wide":
        panel, names = _read_wide(path, t0, treated_names)
    else:
        panel, names = _read_long(path, t0, treated_names)
    return (panel, names) if return_names else panel


def _read_rows(path) -> list[tuple[int, list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1) if row]
    if len(rows) < 2:
        raise ParseError("file needs a header row and at least one data row")
    return rows


def _read_wide(path, t0: int, treated_names: list[str]):
    rows = _read_rows(path)
    _, header = rows[0]
    if len(header) < 2:
        raise ParseError("line 1: wide layout needs a time column plus one column per unit")
    units = [name.strip() for name in header[1:]]
    if len(set(units)) != len(units):
        raise ParseError("line 1: duplicate unit names in header")
    n_fields = len(header)
    records = []
    seen_times = set()
    for lineno, row in rows[1:]:
        if len(row) != n_fields:
            raise ParseError(f"line {lineno}: expected {n_fields} fields, got {len(row)}")
        time = _parse_float(row[0], lineno, header[0])
        if time in seen_times:
            raise ParseError(f"line {lineno}: duplicate time period {row[0]!r}")
        seen_times.add(time)
        values = [_parse_float(cell, lineno, units[j]) for j, cell in enumerate(row[1:])]
        records.append((time, values))
    records.sort(key=lambda item: item[0])
    outcomes = np.array([values for _, values in records])

    missing = [name for name in treated_names if name not in units]
    if missing:
        raise ParseError(f"treated unit(s) {missing} not found among columns {units}")
    order = treated_names + [name for name in units if name not in treated_names]
    col = [units.index(name) for name in order]
    panel = PanelData(outcomes[:, col], t0=t0, n_treated=len(treated_names))
    return panel, order


def _read_long(path, t0: int, treated_names: list[str]):
    rows = _read_rows(path)
    _, header = rows[0]
    if len(header) < 3:
        raise ParseError("line 1: long layout needs columns unit, time, outcome")
    cov_names = [name.strip() for name in header[3:]]
    records: dict[tuple[str, float], tuple[float, list[float]]] = {}
    units_seen: list[str] = []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        unit = row[0].strip()
        time = _parse_float(row[1], lineno, header[1])
        key = (unit, time)
        if key in records:
            raise ParseError(f"line {lineno}: duplicate observation for unit {unit!r} at time {row[1]!r}")
        outcome = _parse_float(row[2], lineno, header[2])
        covs = [_parse_float(cell, lineno, cov_names[j]) for j, cell in enumerate(row[3:])]
        records[key] = (outcome, covs)
        if unit not in units_seen:
            units_seen.append(unit)

    missing = [name for name in treated_names if name not in units_seen]
    if missing:
        raise ParseError(f"treated unit(s) {missing} not found among units {sorted(units_seen)}")
    order = treated_names + sorted(name for name in units_seen if name not in treated_names)
    times = sorted({time for _, time in records})
    outcomes = np.empty((len(times), len(order)))
    covariates = np.empty((len(times), len(order), len(cov_names))) if cov_names else None
    for i, time in enumerate(times):
        for j, unit in enumerate(order):
            key = (unit, time)
            if key not in records:
                raise ParseError(
                    f"panel is unbalanced: no observation for unit {unit!r} at time {time:g}"
                )
            outcome, covs = records[key]
            outcomes[i, j] = outcome
            if covariates is not None:
                covariates[i, j] = covs
    panel = PanelData(outcomes, t0=t0, n_treated=len(treated_names), covariates=covariates)
    return panel, order


def write_panel_csv(panel: PanelData, path, unit_names=None) -> None:
    """Write a panel in wide layout with 17-significant-digit values."""
    if unit_names is None:
        unit_names = [f"treated{i + 1}" for i in range(panel.n_treated)]
        unit_names += [f"control{i + 1}" for i in range(panel.n_controls)]
    if len(unit_names) != panel.n_units:
        raise DimensionError(
            f"{len(unit_names)} names supplied for {panel.n_units} units"
        )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", *unit_names])
        for t in range(panel.n_periods):
            writer.writerow([t + 1] + [format(x, ".17g") for x in panel.outcomes[t]])


def write_json_result(path, payload: dict) -> None:
    """Serialize a result document; key order is fixed so reruns are comparable."""
    document = {"schema_version": SCHEMA_VERSION,
                "timestamp": datetime.now(timezone.utc).isoformat()}
    document.update(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_seed() -> int:
    """Seed used when none is given; overridable via the environment."""
    return int(os.environ.get(SEED_ENV_VAR, "0"))


@dataclass(frozen=True)
class RunConfig:
    """All parameters of one command-line run.

    Instances round-trip losslessly through a ``key=value`` text file:
    floats are written with ``repr`` and unit names are comma-joined
    (names therefore must not contain commas).
    """

    command: str
    data: str | None = None
    layout: str = "wide"
    t0: int | None = None
    treated: tuple[str, ...] = ()
    estimator: str = "sc"
    statistic: str = "sq"
    q: float = 1.0
    permutations: str = "moving-block"
    n_perm: int = 5000
    alpha: float = 0.1
    alpha0: tuple[float, ...] | None = None
    grid: str | None = None
    tau: int | None = None
    seed: int = 0
    out: str = "."
    dgp: str = "DGP1"
    rho_u: float = 0.0
    rho_eps: float = 0.0
    sim_t0: int = 20
    controls: int = 20
    trend: str = "stationary"
    reps: int = 5000
    alpha_true: float = 0.0

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for f in fields(self):
                value = getattr(self, f.name)
                if value is None:
                    continue
                if isinstance(value, tuple):
                    value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
                elif isinstance(value, float):
                    value = repr(value)
                fh.write(f"{f.name}={value}\n")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        raw: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ParseError(f"line {lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                raw[key.strip()] = value.strip()
        kwargs = {}
        by_name = {f.name: f for f in fields(cls)}
        for key, value in raw.items():
            if key not in by_name:
                raise ParseError(f"unknown configuration key {key!r}")
            kwargs[key] = _coerce(key, value)
        if "command" not in kwargs:
            raise ParseError("configuration file must set 'command'")
        return cls(**kwargs)


def _coerce(key: str, value: str):
    if key in ("t0", "tau", "seed", "n_perm", "sim_t0", "controls", "reps"):
        return int(value)
    if key in ("q", "alpha", "rho_u", "rho_eps", "alpha_true"):
        return float(value)
    if key == "treated":
        return tuple(part for part in value.split(",") if part)
    if key == "alpha0":
        return tuple(float(part) for part in value.split(","))
    return value
