"""Bipartite instances, text IO, padding and the offline optimum."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment


class InstanceFormatError(ValueError):
    """Base class for instance file parse errors."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class HeaderError(InstanceFormatError):
    pass


class NegativeWeightError(InstanceFormatError):
    pass


class RowLengthError(InstanceFormatError):
    pass


def pos_part(x: float) -> float:
    """Return max(0, x)."""
    return x if x > 0.0 else 0.0


def gain(w: float, maxw: float) -> float:
    """Marginal value of adding an edge of weight `w` on top of `maxw`."""
    return pos_part(w - maxw)


@dataclass(frozen=True, eq=False)
class Instance:
    """Weights are stored impressions-by-advertisers; row k arrives at time k+1."""

    weights: np.ndarray
    adv_labels: Optional[tuple] = None
    imp_labels: Optional[tuple] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim == 1 and w.size == 0:
            w = w.reshape(0, 0)
        if w.ndim != 2:
            raise ValueError("weights must be a 2-d matrix")
        if w.shape[1] < 1:
            raise ValueError("instance needs at least one advertiser")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.adv_labels is not None and len(self.adv_labels) != w.shape[1]:
            raise ValueError("advertiser labels do not match column count")
        if self.imp_labels is not None and len(self.imp_labels) != w.shape[0]:
            raise ValueError("impression labels do not match row count")

    @property
    def num_impressions(self) -> int:
        return self.weights.shape[0]

    @property
    def num_advertisers(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.weights.shape == other.weights.shape
                and bool(np.array_equal(self.weights, other.weights))
                and self.adv_labels == other.adv_labels
                and self.imp_labels == other.imp_labels)

    def __hash__(self):
        return hash((self.weights.shape, self.weights.tobytes()))

    def __repr__(self):
        return f"Instance({self.weights.tolist()!r})"


@dataclass(frozen=True)
class AssignmentTrace:
    """One realized run: `assigned[k]` is the advertiser that got impression k."""

    assigned: tuple
    num_advertisers: int
    weights: np.ndarray = field(repr=False, compare=False)

    def maxw_history(self) -> np.ndarray:
        """Array of shape (m+1, n) with row t holding MaxW^t."""
        m = len(self.assigned)
        hist = np.zeros((m + 1, self.num_advertisers))
        for k, a in enumerate(self.assigned):
            hist[k + 1] = hist[k]
            if a is not None:
                hist[k + 1, a] = max(hist[k, a], self.weights[k, a])
        return hist

    def final_maxw(self) -> np.ndarray:
        return self.maxw_history()[-1]


def make_trace(instance: Instance, assigned: Sequence) -> AssignmentTrace:
    n = instance.num_advertisers
    if len(assigned) > instance.num_impressions:
        raise ValueError("trace longer than the instance")
    for a in assigned:
        if a is not None and not (0 <= a < n):
            raise ValueError(f"dangling advertiser id {a}")
    return AssignmentTrace(tuple(None if a is None else int(a) for a in assigned),
                           n, instance.weights)


def allocation_value(instance: Instance, trace) -> float:
    """Sum over advertisers of the largest weight each one received."""
    if not isinstance(trace, AssignmentTrace):
        trace = make_trace(instance, trace)
    best = [0.0] * instance.num_advertisers
    for k, a in enumerate(trace.assigned):
        if a is None:
            continue
        if not (0 <= a < instance.num_advertisers):
            raise ValueError(f"dangling advertiser id {a}")
        best[a] = max(best[a], float(instance.weights[k, a]))
    return float(sum(best))


@dataclass(frozen=True)
class OfflineMatching:
    value: float
    match: tuple  # impression -> advertiser or None


def _lsa_value(w: np.ndarray) -> float:
    if w.shape[0] == 0 or w.shape[1] == 0:
        return 0.0
    r, c = linear_sum_assignment(w, maximize=True)
    return float(w[r, c].sum())


def offline_optimum(instance: Instance) -> OfflineMatching:
    """Maximum-weight matching with a canonical (lexicographically smallest) match.

    Among all optimal matchings of the square-padded matrix, impression 0 takes
    the lowest advertiser id that still admits an optimal completion, then
    impression 1, and so on. Dummy columns sort after every real advertiser
    and are reported as None.
    """
    w0 = instance.weights
    m, n = w0.shape
    k = max(m, n)
    w = np.zeros((k, k))
    w[:m, :n] = w0
    best = _lsa_value(w)
    tol = 1e-9 * max(1.0, abs(best))
    rows = list(range(k))
    cols = list(range(k))
    fixed = 0.0
    match = []
    for i in range(m):
        rest_rows = rows[1:]
        for c in cols:
            rest_cols = [x for x in cols if x != c]
            sub = w[np.ix_(rest_rows, rest_cols)]
            if fixed + w[i, c] + _lsa_value(sub) >= best - tol:
                fixed += w[i, c]
                match.append(c if c < n else None)
                cols = rest_cols
                rows = rest_rows
                break
    value = float(sum(w0[i, a] for i, a in enumerate(match) if a is not None))
    return OfflineMatching(value, tuple(match))


def pad_with_dummies(instance: Instance) -> Instance:
    """Square the matrix with zero rows (appended last) or zero columns."""
    m, n = instance.weights.shape
    k = max(m, n)
    if m == n:
        return instance
    w = np.zeros((k, k))
    w[:m, :n] = instance.weights
    adv = instance.adv_labels
    if adv is not None:
        adv = tuple(adv) + tuple(f"dummy{j}" for j in range(n, k))
    imp = instance.imp_labels
    if imp is not None:
        imp = tuple(imp) + tuple(f"dummy{j}" for j in range(m, k))
    return Instance(w, adv, imp)


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_instance(text: str) -> Instance:
    lines = list(_content_lines(text))
    header = {}
    for key, pos in (("advertisers", 0), ("impressions", 1)):
        if len(lines) <= pos:
            raise HeaderError(lines[-1][0] if lines else 1, f"missing '{key}' header")
        lineno, line = lines[pos]
        parts = line.split()
        if len(parts) != 2 or parts[0] != key:
            raise HeaderError(lineno, f"expected '{key} <count>'")
        try:
            header[key] = int(parts[1])
        except ValueError:
            raise HeaderError(lineno, f"'{parts[1]}' is not an integer") from None
        if header[key] < 0 or (key == "advertisers" and header[key] == 0):
            raise HeaderError(lineno, f"invalid {key} count {header[key]}")
    n, m = header["advertisers"], header["impressions"]
    body = lines[2:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (lines[-1][0])
        raise RowLengthError(where, f"expected {m} weight rows, found {len(body)}")
    w = np.zeros((m, n))
    for k, (lineno, line) in enumerate(body):
        parts = line.split()
        if len(parts) != n:
            raise RowLengthError(lineno, f"expected {n} weights, found {len(parts)}")
        for j, tok in enumerate(parts):
            try:
                x = float(tok)
            except ValueError:
                raise InstanceFormatError(lineno, f"bad number '{tok}'") from None
            if not np.isfinite(x):
                raise InstanceFormatError(lineno, f"non-finite weight '{tok}'")
            if x < 0:
                raise NegativeWeightError(lineno, f"negative weight {tok}")
            w[k, j] = x
    return Instance(w)


def format_instance(instance: Instance) -> str:
    m, n = instance.weights.shape
    out = [f"advertisers {n}", f"impressions {m}"]
    for row in instance.weights:
        out.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(instance))
