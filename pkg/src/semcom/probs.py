"""Probability-simplex primitives: distributions, joint matrices, entropies, seeded sampling.

All values are immutable after construction and all operations are pure, so
shared read-only use from concurrent contexts is safe.  ``Rng`` is the only
stateful object; derive one stream per trial with :meth:`Rng.split` and never
share it.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import AllZeroError, InvalidParamsError, NegativeEntryError, SupportMismatchError

# Tolerance for "sums to one" on construction.  Arithmetic that can drift
# (elementwise powers, repeated blending) renormalizes defensively instead of
# relying on this slack.
SIMPLEX_ATOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def as_array(x) -> np.ndarray:
    """Return the underlying float array of a Dist/ContextMatrix/CondMatrix or array-like."""
    return np.asarray(getattr(x, "p", x), dtype=float)


class Dist:
    """Probability distribution over an indexed finite set."""

    __slots__ = ("p",)

    def __init__(self, weights):
        p = np.asarray(weights, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidParamsError("Dist needs a nonempty 1-D weight vector")
        if (p < 0).any():
            raise NegativeEntryError("Dist weights must be nonnegative")
        if (p > 1 + SIMPLEX_ATOL).any():
            raise InvalidParamsError("Dist weights must lie in [0, 1]")
        if abs(p.sum() - 1.0) > SIMPLEX_ATOL:
            raise InvalidParamsError(f"Dist weights sum to {p.sum()!r}, expected 1")
        self.p = _freeze(p)

    @classmethod
    def uniform(cls, n: int) -> "Dist":
        if n < 1:
            raise InvalidParamsError("uniform Dist needs n >= 1")
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, index: int, n: int) -> "Dist":
        w = np.zeros(n)
        w[index] = 1.0
        return cls(w)

    def __len__(self) -> int:
        return self.p.size

    def __getitem__(self, i: int) -> float:
        return float(self.p[i])

    def __repr__(self) -> str:
        return f"Dist({np.array2string(self.p, precision=4, threshold=8)})"


class ContextMatrix:
    """Joint distribution over action x concept pairs."""

    __slots__ = ("p", "row_labels", "col_labels")

    def __init__(self, entries, row_labels: Sequence[int] | None = None,
                 col_labels: Sequence[int] | None = None):
        p = np.asarray(entries, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise InvalidParamsError("ContextMatrix needs a nonempty 2-D matrix")
        if (p < 0).any():
            raise NegativeEntryError("ContextMatrix entries must be nonnegative")
        if (p > 1 + SIMPLEX_ATOL).any():
            raise InvalidParamsError("ContextMatrix entries must lie in [0, 1]")
        if abs(p.sum() - 1.0) > SIMPLEX_ATOL:
            raise InvalidParamsError(f"ContextMatrix entries sum to {p.sum()!r}, expected 1")
        self.p = _freeze(p)
        self.row_labels = tuple(row_labels) if row_labels is not None else tuple(range(p.shape[0]))
        self.col_labels = tuple(col_labels) if col_labels is not None else tuple(range(p.shape[1]))

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    def __repr__(self) -> str:
        return f"ContextMatrix(shape={self.p.shape})"


class CondMatrix:
    """Conditional distribution matrix: each row conditions, columns are outcomes."""

    __slots__ = ("p",)

    def __init__(self, entries):
        p = np.asarray(entries, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise InvalidParamsError("CondMatrix needs a nonempty 2-D matrix")
        if (p < 0).any():
            raise NegativeEntryError("CondMatrix entries must be nonnegative")
        if (p > 1 + SIMPLEX_ATOL).any():
            raise InvalidParamsError("CondMatrix entries must lie in [0, 1]")
        rowsums = p.sum(axis=1)
        if np.abs(rowsums - 1.0).max() > SIMPLEX_ATOL:
            raise InvalidParamsError("every CondMatrix row must sum to 1")
        self.p = _freeze(p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    def row(self, i: int) -> Dist:
        return Dist(self.p[i])

    def __repr__(self) -> str:
        return f"CondMatrix(shape={self.p.shape})"


class Rng:
    """Deterministic, splittable random stream.

    Streams are PCG64 generators keyed by ``SeedSequence(seed, spawn_key)``;
    the same (seed, key path) yields the same draw sequence on every platform
    and run.  ``split`` derives an independent child stream addressed purely
    by integers, so per-trial streams do not depend on scheduling order.
    """

    __slots__ = ("seed", "key", "generator")

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def split(self, *key: int) -> "Rng":
        return Rng(self.seed, self.key + key)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, key={self.key})"


def _normalized_array(raw) -> np.ndarray:
    a = np.asarray(raw, dtype=float)
    if (a < 0).any():
        raise NegativeEntryError("cannot normalize: negative entry present")
    total = a.sum()
    if total <= 0:
        raise AllZeroError("cannot normalize: every entry is zero")
    return a / total


def normalize(raw) -> Dist | ContextMatrix:
    """Scale nonnegative weights to sum to one; 1-D gives a Dist, 2-D a ContextMatrix."""
    a = _normalized_array(raw)
    if a.ndim == 1:
        return Dist(a)
    if a.ndim == 2:
        return ContextMatrix(a)
    raise InvalidParamsError("normalize expects a 1-D or 2-D input")


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    a = as_array(p)
    mask = a > 0
    return float(-(a[mask] * np.log(a[mask])).sum())


def cross_entropy(p, q) -> float:
    """-sum p log q in nats; requires q > 0 wherever p > 0."""
    pa, qa = as_array(p), as_array(q)
    if pa.shape != qa.shape:
        raise InvalidParamsError("cross_entropy requires equal shapes")
    mask = pa > 0
    if (qa[mask] <= 0).any():
        raise SupportMismatchError("p has mass where q is zero")
    return float(-(pa[mask] * np.log(qa[mask])).sum())


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats; nonnegative, zero iff p == q."""
    return cross_entropy(p, q) - entropy(p)


def sample(d: Dist, rng: Rng) -> int:
    """Draw one index from d; deterministic given the rng stream."""
    cdf = np.cumsum(as_array(d))
    u = rng.generator.random()
    idx = int(np.searchsorted(cdf, u, side="right"))
    return min(idx, len(cdf) - 1)
