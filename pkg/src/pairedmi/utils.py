"""Input validation and random-stream helpers."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .data import PairedSample
from .exceptions import ValidationError


def check_random_state(seed) -> np.random.Generator:
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    Accepts ``None``, an int, a sequence of ints, a ``SeedSequence`` or an
    existing ``Generator`` (returned as is).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence, list, tuple)):
        return np.random.default_rng(seed)
    raise ValidationError(f"{seed!r} cannot be used to seed a numpy Generator")


def spawn(rng: np.random.Generator, k: int) -> list[np.random.Generator]:
    """``k`` independent child streams of ``rng``."""
    return rng.spawn(k)


def check_missing_matrix(X) -> np.ndarray:
    """2-D float copy of ``X`` where ``nan`` marks missing cells."""
    return check_array(X, dtype=np.float64, ensure_all_finite="allow-nan", copy=True)


def check_pairs(X) -> PairedSample:
    """Build a :class:`PairedSample` from a PairedSample or an (n, 2 + q) array.

    The first two columns are the pair; any further columns are auxiliaries.
    """
    if isinstance(X, PairedSample):
        return X
    X = check_missing_matrix(X)
    if X.shape[1] < 2:
        raise ValidationError("need at least the two pair columns")
    return PairedSample(X[:, :2], X[:, 2:] if X.shape[1] > 2 else None)
