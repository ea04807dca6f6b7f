"""File formats: logistic dataset loader and the CSV/JSON emitters."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import BoundCurve
from .meeting import MeetingRecord
from .targets import LogisticDataset

__all__ = [
    "DatasetFormatError",
    "load_logistic_dataset",
    "write_meetings_csv",
    "write_bounds_csv",
    "write_summary_json",
]

MEETINGS_HEADER = ("experiment", "replicate", "L", "tau", "censored")
BOUNDS_HEADER = ("experiment", "metric", "t", "bound", "std_error", "N", "L")


class DatasetFormatError(ValueError):
    pass


def load_logistic_dataset(
    path,
    intercept: bool = False,
    standardize: bool = False,
    prior_variance: float = 10.0,
) -> LogisticDataset:
    """Read a delimited numeric matrix with the response in the first column.

    Responses may be coded {-1, +1} or {0, 1}; the latter is mapped to the
    former. Blank lines and '#' comments are skipped. ``standardize``
    rescales each covariate column to mean 0 / variance 1 before the
    optional intercept column is prepended.
    """
    rows: list[tuple[int, list[float]]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.replace(",", " ").split()
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: non-numeric cell ({exc})")
            rows.append((lineno, values))
    if not rows:
        raise DatasetFormatError(f"{path}: no data rows")
    width = len(rows[0][1])
    if width < 2:
        raise DatasetFormatError(f"{path}: need a response column plus covariates")
    for lineno, values in rows:
        if len(values) != width:
            raise DatasetFormatError(
                f"{path}: line {lineno}: expected {width} columns, got {len(values)}"
            )

    data = np.array([values for _, values in rows], dtype=float)
    raw = data[:, 0]
    if np.any(raw == 0):
        if not np.all(np.isin(raw, (0.0, 1.0))):
            raise DatasetFormatError(f"{path}: responses mix {{0,1}} and other values")
        responses = np.where(raw == 1.0, 1, -1)
    else:
        if not np.all(np.isin(raw, (-1.0, 1.0))):
            raise DatasetFormatError(f"{path}: responses must be coded {{-1,+1}} or {{0,1}}")
        responses = raw.astype(int)

    covariates = data[:, 1:]
    if standardize:
        std = covariates.std(axis=0)
        if np.any(std == 0):
            bad = int(np.flatnonzero(std == 0)[0]) + 1
            raise DatasetFormatError(
                f"{path}: covariate column {bad} is constant and cannot be standardized"
            )
        covariates = (covariates - covariates.mean(axis=0)) / std
    if intercept:
        covariates = np.hstack([np.ones((covariates.shape[0], 1)), covariates])

    dim = covariates.shape[1]
    return LogisticDataset(
        responses=responses,
        covariates=covariates,
        prior_mean=np.zeros(dim),
        prior_cov=prior_variance * np.eye(dim),
    )


def write_meetings_csv(path, experiments: Sequence[tuple[str, Sequence[MeetingRecord]]]):
    """One row per replicate: experiment,replicate,L,tau,censored."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MEETINGS_HEADER)
        for name, records in experiments:
            for i, record in enumerate(records):
                writer.writerow(
                    (name, i, record.lag, record.tau, "true" if record.censored else "false")
                )


def write_bounds_csv(path, curves: Sequence[tuple[str, BoundCurve]]):
    """One row per grid point per metric: experiment,metric,t,bound,std_error,N,L."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BOUNDS_HEADER)
        for name, curve in curves:
            for t, bound, se in zip(curve.t_grid, curve.bound, curve.std_error):
                writer.writerow(
                    (name, curve.metric, int(t), repr(float(bound)), repr(float(se)),
                     curve.n_replicates, curve.lag)
                )


def write_summary_json(path, summary: dict):
    with open(Path(path), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
