"""Paired-sample containers, CSV ingestion and MCAR missingness insertion."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .exceptions import FormatError, ParameterError, ValidationError

MISSING_TOKENS = {"", "na"}


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PairedSample:
    """n matched pairs, each with at most one missing component.

    Parameters
    ----------
    x : ndarray of shape (n, 2)
        Pair components; ``nan`` marks a missing cell.
    aux : ndarray of shape (n, q), optional
        Fully observed auxiliary covariates used only by imputation.
    n_dropped : int
        Rows discarded during ingestion because both components were missing.
    """

    x: np.ndarray
    aux: np.ndarray | None = None
    n_dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        x = _frozen(self.x)
        if x.ndim != 2 or x.shape[1] != 2:
            raise ValidationError(f"pair matrix must have shape (n, 2), got {x.shape}")
        if np.isinf(x).any():
            raise ValidationError("pair matrix contains infinite values")
        both = np.isnan(x).all(axis=1)
        if both.any():
            raise ValidationError(
                f"{int(both.sum())} row(s) have both components missing "
                f"(first at row {int(np.flatnonzero(both)[0])})"
            )
        object.__setattr__(self, "x", x)
        if self.aux is not None:
            aux = _frozen(self.aux)
            if aux.ndim == 1:
                aux = _frozen(aux[:, None])
            if aux.shape[0] != x.shape[0]:
                raise ValidationError(
                    f"aux has {aux.shape[0]} rows but the sample has {x.shape[0]}"
                )
            if not np.isfinite(aux).all():
                raise ValidationError("auxiliary covariates must be fully observed")
            object.__setattr__(self, "aux", aux)

    @classmethod
    def from_columns(cls, x1, x2, aux=None) -> "PairedSample":
        return cls(np.column_stack([np.asarray(x1, float), np.asarray(x2, float)]), aux)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def observed(self) -> np.ndarray:
        """Boolean (n, 2) observation indicators."""
        return ~np.isnan(self.x)

    @property
    def complete_index(self) -> np.ndarray:
        obs = self.observed
        return np.flatnonzero(obs[:, 0] & obs[:, 1])

    @property
    def first_only_index(self) -> np.ndarray:
        obs = self.observed
        return np.flatnonzero(obs[:, 0] & ~obs[:, 1])

    @property
    def second_only_index(self) -> np.ndarray:
        obs = self.observed
        return np.flatnonzero(~obs[:, 0] & obs[:, 1])

    @property
    def sizes(self) -> tuple[int, int, int]:
        """``(n1, n2, n3)``: complete pairs, first-only and second-only rows."""
        obs = self.observed
        n1 = int((obs[:, 0] & obs[:, 1]).sum())
        n2 = int((obs[:, 0] & ~obs[:, 1]).sum())
        return n1, n2, self.n - n1 - n2

    @property
    def n_aux(self) -> int:
        return 0 if self.aux is None else self.aux.shape[1]

    def matrix(self) -> np.ndarray:
        """Pair columns followed by auxiliaries, with ``nan`` at missing cells."""
        if self.aux is None:
            return np.array(self.x)
        return np.hstack([self.x, self.aux])

    def with_mask(self, observed: np.ndarray) -> "PairedSample":
        """Copy of this sample with cells outside ``observed`` set missing."""
        x = np.array(self.x)
        x[~np.asarray(observed, bool)] = np.nan
        return PairedSample(x, self.aux)


@dataclass(frozen=True, eq=False)
class CompletedDataset:
    """One imputation draw: a fully observed matrix plus its imputed-cell mask."""

    matrix: np.ndarray
    imputed_mask: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        mask = np.array(self.imputed_mask, dtype=bool, copy=True)
        mask.setflags(write=False)
        if m.shape != mask.shape:
            raise ValidationError("matrix and imputed_mask shapes differ")
        if not np.isfinite(m).all():
            raise ValidationError("completed matrix contains non-finite values")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "imputed_mask", mask)

    @property
    def differences(self) -> np.ndarray:
        """Per-row contrast ``x1 - x2``."""
        return self.matrix[:, 0] - self.matrix[:, 1]


@dataclass(frozen=True)
class FixedCounts:
    """Remove the second component from ``n2`` rows and the first from ``n3`` rows."""

    n2: int
    n3: int

    def __post_init__(self):
        if self.n2 < 0 or self.n3 < 0:
            raise ParameterError("missing counts must be non-negative")


@dataclass(frozen=True)
class Bernoulli:
    """Drop each component independently with probability ``rate``."""

    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ParameterError(f"missing rate must lie in [0, 1), got {self.rate}")


MissingSpec = Union[FixedCounts, Bernoulli]


def inject_mcar(full: PairedSample, spec: MissingSpec, rng: np.random.Generator) -> PairedSample:
    """Insert MCAR missingness into a fully observed sample.

    Fixed counts: one uniform permutation of the rows is drawn; its first
    ``n2`` rows lose ``x2`` and the next ``n3`` rows lose ``x1``.

    Bernoulli: each component is dropped with probability ``rate``; a row whose
    two indicators both fire is re-drawn until at least one component
    survives. The realized per-component missing rate is therefore
    ``r(1 - r) / (1 - r**2) = r / (1 + r)``, slightly below ``r``.
    """
    if full.sizes[0] != full.n:
        raise ValidationError("inject_mcar requires a fully observed sample")
    n = full.n
    observed = np.ones((n, 2), dtype=bool)
    if isinstance(spec, FixedCounts):
        if spec.n2 + spec.n3 > n:
            raise ParameterError(f"n2 + n3 = {spec.n2 + spec.n3} exceeds n = {n}")
        order = rng.permutation(n)
        observed[order[: spec.n2], 1] = False
        observed[order[spec.n2 : spec.n2 + spec.n3], 0] = False
    elif isinstance(spec, Bernoulli):
        pending = np.arange(n)
        while pending.size:
            drop = rng.random((pending.size, 2)) < spec.rate
            both = drop.all(axis=1)
            ok = pending[~both]
            observed[ok] = ~drop[~both]
            pending = pending[both]
    else:
        raise ParameterError(f"unknown missingness spec {spec!r}")
    return full.with_mask(observed)


def split(sample: PairedSample) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Complete-pair differences, first-only values and second-only values, in row order."""
    c = sample.complete_index
    d = sample.x[c, 0] - sample.x[c, 1]
    return d, sample.x[sample.first_only_index, 0], sample.x[sample.second_only_index, 1]


def _parse_cell(text: str, row: int, column: str) -> float:
    s = text.strip()
    if s.lower() in MISSING_TOKENS:
        return np.nan
    try:
        value = float(s)
    except ValueError:
        raise FormatError(
            f"row {row}, column {column!r}: cannot parse {text!r} as a number",
            row=row,
            column=column,
        ) from None
    if not np.isfinite(value):
        raise FormatError(f"row {row}, column {column!r}: non-finite value", row=row, column=column)
    return value


def ingest_csv(
    path,
    x1: str,
    x2: str,
    aux: Sequence[str] = (),
    delimiter: str = ",",
) -> PairedSample:
    """Read a paired sample from a CSV file with a header row.

    Empty cells and ``NA`` (any case) are missing. Rows missing both pair
    components are dropped with a warning; their count is kept on
    ``PairedSample.n_dropped``. Row numbers in errors are 1-based data rows.
    """
    columns = [x1, x2, *aux]
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty file, header row required")
        absent = [c for c in columns if c not in reader.fieldnames]
        if absent:
            raise ValidationError(f"{path}: columns not found in header: {absent}")
        values = []
        for i, record in enumerate(reader, start=1):
            values.append([_parse_cell(record[c] or "", i, c) for c in columns])
    data = np.array(values, dtype=float).reshape(-1, len(columns))
    pair = data[:, :2]
    both = np.isnan(pair).all(axis=1)
    n_dropped = int(both.sum())
    if n_dropped:
        warnings.warn(f"dropped {n_dropped} row(s) with both pair components missing", stacklevel=2)
    data = data[~both]
    aux_data = None
    if aux:
        aux_data = data[:, 2:]
        bad = np.isnan(aux_data)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ValidationError(f"auxiliary column {aux[c]!r} has a missing cell (data row {r + 1})")
    return PairedSample(data[:, :2], aux_data, n_dropped=n_dropped)


def format_value(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_csv(
    matrix: np.ndarray,
    path,
    names: Sequence[str],
    delimiter: str = ",",
) -> None:
    """Write a numeric matrix with a header; ``nan`` is emitted as an empty cell."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[1] != len(names):
        raise ValidationError("number of column names does not match the matrix")
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(names)
        for row in matrix:
            writer.writerow([format_value(v) for v in row])
