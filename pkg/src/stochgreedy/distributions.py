"""Finite distributions over nonnegative weights."""

from __future__ import annotations

from typing import Iterable, Sequence

MERGE_TOL = 1e-12


class DiscreteDistribution:
    """Finite support with strictly increasing values.

    Values closer than MERGE_TOL are merged into the smaller one. Zero
    probability atoms are dropped.
    """

    __slots__ = ("values", "probs")

    def __init__(self, pairs: Iterable):
        items = sorted((float(v), float(p)) for v, p in pairs if p > 0.0)
        values: list = []
        probs: list = []
        for v, p in items:
            if values and v - values[-1] <= MERGE_TOL:
                probs[-1] += p
            else:
                values.append(v)
                probs.append(p)
        if not values:
            raise ValueError("distribution has no mass")
        self.values = tuple(values)
        self.probs = tuple(probs)

    @classmethod
    def point(cls, w: float = 0.0) -> "DiscreteDistribution":
        return cls([(w, 1.0)])

    def pairs(self):
        return list(zip(self.values, self.probs))

    def total(self) -> float:
        return sum(self.probs)

    def mean(self) -> float:
        return sum(v * p for v, p in zip(self.values, self.probs))

    def expected_gain(self, w: float) -> float:
        """E[(w - X)^+] for X drawn from this distribution."""
        return sum(p * (w - v) for v, p in zip(self.values, self.probs) if w > v)

    def expected_excess(self, w: float) -> float:
        """E[(X - w)^+]."""
        return sum(p * (v - w) for v, p in zip(self.values, self.probs) if v > w)

    def cdf(self, x: float) -> float:
        return sum(p for v, p in zip(self.values, self.probs) if v <= x)

    def max_with(self, w: float) -> "DiscreteDistribution":
        """Distribution of max(w, X)."""
        return DiscreteDistribution((max(v, w), p) for v, p in zip(self.values, self.probs))

    def close_to(self, other: "DiscreteDistribution", tol: float = 1e-9) -> bool:
        """CDF agreement at every support point of either distribution."""
        pts = set(self.values) | set(other.values)
        if any(abs(self.cdf(x) - other.cdf(x)) > tol for x in pts):
            return False
        return abs(self.total() - other.total()) <= tol

    def dominates(self, other: "DiscreteDistribution", tol: float = 1e-12) -> bool:
        """First-order stochastic dominance of self over other."""
        pts = set(self.values) | set(other.values)
        return all(self.cdf(x) <= other.cdf(x) + tol for x in pts)

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.values == other.values and self.probs == other.probs

    def __hash__(self):
        return hash((self.values, self.probs))

    def __repr__(self):
        body = ", ".join(f"({v:g}, {p:.6g})" for v, p in zip(self.values, self.probs))
        return f"DiscreteDistribution([{body}])"


def max_convolve(d1: DiscreteDistribution, d2: DiscreteDistribution) -> DiscreteDistribution:
    """Law of max(X1, X2) for independent X1 ~ d1, X2 ~ d2.

    Uses P(max <= x) = F1(x) F2(x) evaluated on the merged support.
    """
    pts = sorted(set(d1.values) | set(d2.values))
    out = []
    prev = 0.0
    c1 = c2 = 0.0
    i = j = 0
    for x in pts:
        while i < len(d1.values) and d1.values[i] <= x:
            c1 += d1.probs[i]
            i += 1
        while j < len(d2.values) and d2.values[j] <= x:
            c2 += d2.probs[j]
            j += 1
        cur = c1 * c2
        out.append((x, cur - prev))
        prev = cur
    return DiscreteDistribution(out)


def mixture(parts: Sequence) -> DiscreteDistribution:
    """Mixture of (weight, distribution) pairs; weights should sum to 1."""
    acc = []
    for c, d in parts:
        if c == 0.0:
            continue
        acc.extend((v, c * p) for v, p in zip(d.values, d.probs))
    return DiscreteDistribution(acc)
