"""Interval kernel: anchor examples, containment, isotonicity, rounding direction."""

import math
import random
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest

from critlat.interval import (
    EMPTY,
    Box,
    DivisionByZeroInterval,
    DomainError,
    EmptyIntervalError,
    Interval,
    IntervalOverflow,
    arith,
    elem,
    hull,
    intersect,
    ipow,
    metrics,
    setops,
)


def ulps_wide(iv: Interval) -> int:
    """Width of iv measured in steps of math.nextafter from lo."""
    x = iv.lo
    n = 0
    while x < iv.hi and n < 64:
        x = math.nextafter(x, math.inf)
        n += 1
    return n


class TestArith:
    def test_add_exact(self):
        r = arith(Interval(1, 2), Interval(3, 4), "add")
        assert r == Interval(4, 6)

    def test_mul_sign_cases(self):
        r = arith(Interval(1, 2), Interval(-1, 1), "mul")
        assert r == Interval(-2, 2)

    def test_div_third_tight(self):
        r = arith(Interval(1, 1), Interval(3, 3), "div")
        third = Fraction(1, 3)
        assert Fraction(r.lo) <= third <= Fraction(r.hi)
        assert ulps_wide(r) <= 2

    def test_div_by_zero_interval(self):
        with pytest.raises(DivisionByZeroInterval):
            arith(Interval(1, 1), Interval(-1, 2), "div")

    def test_overflow_is_explicit(self):
        big = Interval(1e308, 1e308)
        with pytest.raises(IntervalOverflow):
            big + big

    def test_sub_exact(self):
        assert Interval(5, 7) - Interval(2, 3) == Interval(2, 5)

    def test_directed_rounding_add(self):
        # 0.1 + 0.2 rounds; bounds must bracket the exact rational sum.
        r = Interval(0.1, 0.1) + Interval(0.2, 0.2)
        exact = Fraction(0.1) + Fraction(0.2)
        assert Fraction(r.lo) <= exact <= Fraction(r.hi)
        assert ulps_wide(r) <= 2

    def test_mul_directed(self):
        r = Interval(0.1, 0.1) * Interval(0.3, 0.3)
        exact = Fraction(0.1) * Fraction(0.3)
        assert Fraction(r.lo) <= exact <= Fraction(r.hi)
        assert ulps_wide(r) <= 2


class TestElem:
    def test_pow_sqrt4(self):
        r = elem(Interval(4, 4), "pow", Interval(0.5, 0.5))
        assert r.contains(2.0)
        assert ulps_wide(r) <= 4

    def test_ln_one_contains_zero(self):
        r = elem(Interval(1, 1), "ln")
        assert r.lo < 0.0 < r.hi

    def test_pow_interval_base(self):
        getcontext().prec = 40
        lo_exact = Decimal(2) ** Decimal("1.5")
        hi_exact = Decimal(3) ** Decimal("1.5")
        r = elem(Interval(2, 3), "pow", Interval(1.5, 1.5))
        assert Decimal(r.lo) <= lo_exact
        assert Decimal(r.hi) >= hi_exact
        # stays reasonably tight
        assert float(hi_exact) - r.hi > -1e-12
        assert r.hi - float(hi_exact) < 1e-12

    def test_pow_rejects_zero_base(self):
        with pytest.raises(DomainError):
            ipow(Interval(0.0, 2.0), Interval(1.5, 1.5))

    def test_ln_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            elem(Interval(0.0, 1.0), "ln")

    def test_exp_log_roundtrip_contains(self):
        x = Interval(0.3, 0.7)
        r = x.exp().log()
        assert r.lo <= 0.3 and r.hi >= 0.7


class TestSetOps:
    def test_intersect_overlap(self):
        assert setops(Interval(0, 0.36), Interval(0.2, 0.5), "intersect") == Interval(
            0.2, 0.36
        )

    def test_intersect_disjoint_empty(self):
        assert setops(Interval(0, 1), Interval(2, 3), "intersect") is EMPTY

    def test_hull(self):
        assert setops(Interval(0, 1), Interval(2, 3), "hull") == Interval(0, 3)

    def test_commutative_idempotent(self):
        a, b = Interval(0.1, 0.9), Interval(0.5, 1.7)
        assert intersect(a, b) == intersect(b, a)
        assert hull(a, b) == hull(b, a)
        assert intersect(a, a) == a
        assert hull(a, a) == a


class TestMetrics:
    def test_simple(self):
        assert metrics(Interval(1, 3)) == (2.0, 2.0)

    def test_iteration_seed_interval(self):
        w, m = metrics(Interval(0, 0.36))
        assert w == 0.36
        assert m == 0.18

    def test_degenerate(self):
        w, m = metrics(Interval(0.7, 0.7))
        assert w == 0.0
        assert m == 0.7

    def test_empty_rejected(self):
        with pytest.raises(EmptyIntervalError):
            metrics(EMPTY)

    def test_midpoint_always_member(self):
        rng = random.Random(7)
        for _ in range(200):
            lo = rng.uniform(-10, 10)
            hi = lo + abs(rng.gauss(0, 1e-13))
            iv = Interval(lo, hi)
            assert iv.contains(iv.mid)


def _sample_intervals(rng, n):
    los = rng.uniform(-5, 5, size=n)
    his = los + rng.uniform(0, 3, size=n)
    return los, his


class TestContainment:
    """Point results never escape interval results (10^6 samples over all ops)."""

    N = 250_000  # per operation; 10^6 total

    def test_containment_all_ops(self):
        rng = np.random.default_rng(20240811)
        for op in ("add", "sub", "mul", "div"):
            alo, ahi = _sample_intervals(rng, self.N)
            blo, bhi = _sample_intervals(rng, self.N)
            if op == "div":
                blo = np.abs(blo) + 0.1
                bhi = blo + rng.uniform(0, 3, size=self.N)
            xs = rng.uniform(alo, ahi)
            ys = rng.uniform(blo, bhi)
            pts = {
                "add": xs + ys,
                "sub": xs - ys,
                "mul": xs * ys,
                "div": xs / ys,
            }[op]
            # spot-build intervals on a subsample (interval op is scalar code)
            idx = rng.choice(self.N, size=400, replace=False)
            for i in idx:
                a = Interval(alo[i], ahi[i])
                b = Interval(blo[i], bhi[i])
                r = arith(a, b, op)
                assert r.lo <= pts[i] <= r.hi, (op, i)
            # full-vector check against a single hull interval
            a = Interval(float(alo.min()), float(ahi.max()))
            b = Interval(float(blo.min()), float(bhi.max()))
            r = arith(a, b, op)
            assert r.lo <= pts.min() and pts.max() <= r.hi

    def test_containment_elem(self):
        rng = np.random.default_rng(99)
        los = rng.uniform(0.05, 4, size=100)
        his = los + rng.uniform(0, 2, size=100)
        for lo, hi in zip(los, his):
            x = Interval(lo, hi)
            pts = rng.uniform(lo, hi, size=1000)
            e = x.exp()
            assert np.all((np.exp(pts) >= e.lo) & (np.exp(pts) <= e.hi))
            l = x.log()
            assert np.all((np.log(pts) >= l.lo) & (np.log(pts) <= l.hi))
            pw = ipow(x, Interval(1.3, 1.7))
            ys = rng.uniform(1.3, 1.7, size=1000)
            vals = pts**ys
            assert np.all((vals >= pw.lo) & (vals <= pw.hi))


class TestDirectedBoundsExact:
    """Every arithmetic bound brackets the exact rational result."""

    def test_arith_vs_fractions(self):
        rng = random.Random(20260808)
        for _ in range(1500):
            a = rng.uniform(-50, 50) * rng.choice((1e-8, 1.0, 1e6))
            b = rng.uniform(-50, 50) * rng.choice((1e-8, 1.0, 1e6))
            fa, fb = Fraction(a), Fraction(b)
            ia, ib = Interval.point(a), Interval.point(b)
            cases = [
                (ia + ib, fa + fb),
                (ia - ib, fa - fb),
                (ia * ib, fa * fb),
            ]
            if b != 0.0:
                cases.append((ia / ib, fa / fb))
            for iv, exact in cases:
                assert Fraction(iv.lo) <= exact <= Fraction(iv.hi)


class TestIsotonicity:
    def test_inclusion_isotone(self):
        rng = random.Random(3)
        for _ in range(300):
            lo = rng.uniform(-3, 3)
            hi = lo + rng.uniform(0.01, 2)
            a = Interval(lo, hi)
            shrink = rng.uniform(0, 0.4) * (hi - lo)
            a_sub = Interval(lo + shrink / 2, hi - shrink / 2)
            blo = rng.uniform(0.1, 2)
            b = Interval(blo, blo + rng.uniform(0.01, 1))
            b_sub = Interval(b.lo + 0.003, b.hi - 0.003)
            for op in ("add", "sub", "mul", "div"):
                outer = arith(a, b, op)
                inner = arith(a_sub, b_sub, op)
                assert outer.contains_interval(inner), op
            if a_sub.lo > 0:
                assert a.exp().contains_interval(a_sub.exp())
                pos = Interval(a_sub.lo, a_sub.hi)
                outer_pos = Interval(min(a.lo, pos.lo), max(a.hi, pos.hi))
                assert outer_pos.exp().contains_interval(pos.exp())

    def test_composed_outward_vs_decimal(self):
        # exp(x * ln x) - x/3 at point intervals vs 40-digit decimal
        getcontext().prec = 40
        rng = random.Random(11)
        for _ in range(50):
            x = rng.uniform(0.2, 3.0)
            xi = Interval(x, x)
            r = (xi * xi.log()).exp() - xi / Interval(3, 3)
            d = Decimal(x)
            exact = (d * d.ln()).exp() - d / 3
            assert Decimal(r.lo) <= exact <= Decimal(r.hi)


class TestBox:
    def test_guards(self):
        with pytest.raises(DomainError):
            Box.of(0.9, 2.0, 1.0, 1.5)
        with pytest.raises(DomainError):
            Box.of(2.0, 2.5, 0.5, 1.5)

    def test_mid_and_contains(self):
        b = Box.of(2.0, 3.0, 1.0, 1.5)
        pm, sm = b.mid
        assert b.contains_point(pm, sm)
        assert b.contains_box(Box.of(2.2, 2.8, 1.1, 1.4))
        assert not b.contains_box(Box.of(2.2, 3.2, 1.1, 1.4))
