"""Vectorized interval arrays: the batch evaluation engine.

A VI holds parallel lo/hi arrays of outward-rounded bounds, one interval per
lane.  Semantics match the scalar kernel with two deliberate differences:
every inexact bound is nudged one step outward unconditionally (cheaper than
exactness detection, never tighter than the scalar kernel), and domain
violations poison the lane with NaN instead of raising, so one bad subcell
cannot abort a batch.  NaN lanes fail every sign test, which is the safe
direction for certification.
"""

from __future__ import annotations

import numpy as np

__all__ = ["VI"]

_INF = np.inf


def _dn(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


def _dn2(x):
    return np.nextafter(np.nextafter(x, -_INF), -_INF)


def _up2(x):
    return np.nextafter(np.nextafter(x, _INF), _INF)


class VI:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)

    @classmethod
    def point(cls, x) -> "VI":
        x = np.asarray(x, dtype=float)
        return cls(x, x.copy())

    @classmethod
    def full_like(cls, other: "VI", lo: float, hi: float) -> "VI":
        shape = other.lo.shape
        return cls(np.full(shape, lo), np.full(shape, hi))

    @property
    def width(self):
        return self.hi - self.lo

    def copy(self) -> "VI":
        return VI(self.lo.copy(), self.hi.copy())

    def invalid(self):
        return ~(np.isfinite(self.lo) & np.isfinite(self.hi))

    @staticmethod
    def _coerce(other) -> "VI":
        if isinstance(other, VI):
            return other
        return VI.point(np.asarray(other, dtype=float))

    def __add__(self, other) -> "VI":
        o = self._coerce(other)
        return VI(_dn(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "VI":
        return VI(-self.hi, -self.lo)

    def __sub__(self, other) -> "VI":
        o = self._coerce(other)
        return VI(_dn(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other) -> "VI":
        return self._coerce(other).__sub__(self)

    def __mul__(self, other) -> "VI":
        o = self._coerce(other)
        p1 = self.lo * o.lo
        p2 = self.lo * o.hi
        p3 = self.hi * o.lo
        p4 = self.hi * o.hi
        lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
        hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        return VI(_dn(lo), _up(hi))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "VI":
        o = self._coerce(other)
        with np.errstate(divide="ignore", invalid="ignore"):
            bad = (o.lo <= 0.0) & (o.hi >= 0.0)
            q1 = self.lo / o.lo
            q2 = self.lo / o.hi
            q3 = self.hi / o.lo
            q4 = self.hi / o.hi
            lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
            hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
        lo = np.where(bad, np.nan, lo)
        hi = np.where(bad, np.nan, hi)
        return VI(_dn(lo), _up(hi))

    def __rtruediv__(self, other) -> "VI":
        return self._coerce(other).__truediv__(self)

    def exp(self) -> "VI":
        with np.errstate(over="ignore"):
            lo = _dn2(np.exp(self.lo))
            hi = _up2(np.exp(self.hi))
        hi = np.where(np.isinf(hi), np.nan, hi)
        lo = np.where(np.isnan(hi), np.nan, np.maximum(lo, 0.0))
        return VI(lo, hi)

    def log(self) -> "VI":
        with np.errstate(divide="ignore", invalid="ignore"):
            lo = _dn2(np.log(self.lo))
            hi = _up2(np.log(self.hi))
        bad = ~(self.lo > 0.0)
        lo = np.where(bad, np.nan, lo)
        hi = np.where(bad, np.nan, hi)
        return VI(lo, hi)

    def pow(self, other) -> "VI":
        """self**other for positive self (NaN lanes otherwise)."""
        o = self._coerce(other)
        return (o * self.log()).exp()

    def pow_nonneg(self, other) -> "VI":
        """self**other for self >= 0 and positive exponents: the zero-touching
        lower bound maps to 0 instead of poisoning the lane."""
        o = self._coerce(other)
        touches = self.lo <= 0.0
        reg = self.pow(o)  # NaN on zero-touching lanes
        hi_safe = np.where(self.hi > 0.0, self.hi, 1.0)
        top = VI(hi_safe, hi_safe.copy()).pow(o).hi
        top = np.where(self.hi > 0.0, top, 0.0)
        lo = np.where(touches, 0.0, reg.lo)
        hi = np.where(touches, top, reg.hi)
        bad = (self.lo < 0.0) | ~(o.lo > 0.0)
        return VI(np.where(bad, np.nan, lo), np.where(bad, np.nan, hi))

    def intersect(self, other: "VI"):
        """(intersection VI, empty mask); empty lanes become NaN.

        NaN (invalid) input lanes stay NaN and are not marked empty."""
        o = self._coerce(other)
        lo = np.maximum(self.lo, o.lo)
        hi = np.minimum(self.hi, o.hi)
        with np.errstate(invalid="ignore"):
            empty = lo > hi  # False on NaN lanes
        lo = np.where(empty, np.nan, lo)
        hi = np.where(empty, np.nan, hi)
        return VI(lo, hi), empty

    def contains_zero(self):
        return (self.lo <= 0.0) & (self.hi >= 0.0)

    def __repr__(self) -> str:
        return f"VI({self.lo!r}, {self.hi!r})"
