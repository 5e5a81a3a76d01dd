"""Certification engine: per-cell certificates, strip verification, the p0
enclosure, and certificate documents."""

import json

import numpy as np
import pytest

from critlat.interval import Box, DomainError, Interval
from critlat import moduli as M
from critlat import verifier as V


def leaf_bounds(p_lo, p_hi):
    return V._leaf_bounds(p_lo, p_hi)


class TestCertifyBox:
    def test_interior_macroscopic(self):
        # point grid first: the interior excess over the min is macroscopic
        # (~1e-3 near p = 2.3, tapering toward p0) before the rigorous check
        ps = np.linspace(2.3, 2.35, 6)
        ss = np.linspace(1.3, 1.35, 6)
        for p in ps:
            for s in ss:
                assert M.delta_point(p, s).delta - M.boundary_min(p).value > 5e-4
        X = Box.of(2.3, 2.35, 1.3, 1.35)
        bl, bh = leaf_bounds(2.3, 2.35)
        st = V.certify_box(X, bl, bh)
        assert st.verdict == V.VERDICT_INTERIOR
        assert st.witness is not None and st.witness.value.lo > 0.0

    def test_low_edge_never_interior_when_min_is_low(self):
        # where the minimum sits on the sigma = 1 side (p > p0), the boundary
        # value is attained at the touching edge, so no interior margin exists
        X = Box.of(2.6, 2.65, 1.0, 1.01)
        bl, bh = leaf_bounds(2.6, 2.65)
        st = V.certify_box(X, bl, bh, band="low")
        assert st.verdict in (V.VERDICT_MONO_LOW, V.VERDICT_UNDECIDED)

    def test_low_edge_interior_when_min_is_high(self):
        # for 2 < p < p0 the minimum sits on the sigma_p side, so a touching
        # cell still carries the positive gap between the two boundary values
        X = Box.of(2.4, 2.45, 1.0, 1.01)
        bl, bh = leaf_bounds(2.4, 2.45)
        st = V.certify_box(X, bl, bh, band="low")
        assert st.verdict in (V.VERDICT_INTERIOR, V.VERDICT_MONO_LOW,
                              V.VERDICT_UNDECIDED)
        assert st.verdict != V.VERDICT_UNDECIDED

    def test_p2_always_undecided(self):
        for w in (0.05, 0.01, 0.002):
            X = Box.of(2.0 - w, 2.0 + w, 1.2, 1.25)
            bl, bh = leaf_bounds(2.0 - w, 2.0 + w)
            st = V.certify_box(X, bl, bh)
            assert st.verdict == V.VERDICT_UNDECIDED

    def test_monotone_high_near_curve(self):
        top = V._sigma_p_sup(2.34, 2.36)
        X = Box(Interval(2.34, 2.36), Interval(1.79, top))
        bl, bh = leaf_bounds(2.34, 2.36)
        st = V.certify_box(X, bl, bh, band="high", sigma_top=top)
        assert st.verdict == V.VERDICT_MONO_HIGH
        assert st.witness.fid == "d_sigma2_column_high"
        assert st.witness.value.lo > 0.0

    def test_monotone_low_for_large_p(self):
        X = Box.of(2.7, 2.72, 1.0, 1.02)
        bl, bh = leaf_bounds(2.7, 2.72)
        st = V.certify_box(X, bl, bh, band="low")
        assert st.verdict == V.VERDICT_MONO_LOW
        assert st.witness.fid == "d_sigma2_column_low"


class TestVerifyStrip:
    def test_small_interior_complete(self):
        cert = V.verify_strip(Interval(2.31, 2.34), "interior", strip=0.02, budget=500)
        assert cert.complete
        assert cert.totals.get(V.VERDICT_UNDECIDED, 0) == 0
        assert V.VERDICT_INTERIOR in cert.totals

    def test_small_full_complete(self):
        cert = V.verify_strip(Interval(2.33, 2.35), "full", strip=0.02, budget=2000)
        assert cert.complete
        # leaves tile the region in area
        area = sum(
            r.cell.interval("p").width * r.cell.interval("sigma").width
            for r in cert.leaves
        )
        reg = cert.region
        assert abs(area - reg.p.width * reg.sigma.width) < 1e-9

    def test_reversed_range_rejected(self):
        with pytest.raises(DomainError):
            V.verify_strip(Interval(2.3, 2.3), "full")
        with pytest.raises(Exception):
            V.verify_strip(Interval(2.4, 2.3), "full")

    def test_bad_policy_and_strip(self):
        with pytest.raises(DomainError):
            V.verify_strip(Interval(2.3, 2.4), "sideways")
        with pytest.raises(DomainError):
            V.verify_strip(Interval(2.3, 2.4), "full", strip=-0.1)

    def test_budget_exhaustion_near_2(self):
        with pytest.raises(V.BudgetExhausted) as ei:
            V.verify_strip(Interval(1.995, 2.005), "interior", strip=0.02, budget=12)
        cert = ei.value.certificate
        assert not cert.complete
        assert len(cert.undecided) > 0

    def test_leaf_soundness_sampling(self):
        cert = V.verify_strip(Interval(2.31, 2.335), "full", strip=0.02, budget=2000)
        rng = np.random.default_rng(10)
        for r in cert.leaves:
            ivp, ivs = r.cell.interval("p"), r.cell.interval("sigma")
            for _ in range(40):
                p = rng.uniform(ivp.lo, ivp.hi)
                s = rng.uniform(ivs.lo, ivs.hi)
                sp = M.sigma_p(p)
                if s >= sp * (1.0 - 1e-12):
                    continue  # beyond the curve: no claim
                d = M.delta_point(p, s).delta
                if r.status.verdict == V.VERDICT_INTERIOR:
                    assert d > M.boundary_min(p).value - 1e-12
                elif r.status.verdict == V.VERDICT_MONO_LOW:
                    if s > 1.0:
                        assert d > M.delta_edge_low(p) - 1e-12
                elif r.status.verdict == V.VERDICT_MONO_HIGH:
                    assert d > sp / 2.0 - 1e-12


class TestP0:
    def test_tol_1e3_inside_theorem_bracket(self):
        iv = V.enclose_p0(1e-3)
        assert 2.57 <= iv.lo and iv.hi <= 2.58

    def test_tol_1e6_contains_float_root(self):
        iv = V.enclose_p0(1e-6)
        assert iv.width <= 1e-6
        # independent float bisection on the boundary difference
        g = lambda p: M.delta_edge_low(p) - M.delta_edge_high(p)
        lo, hi = 2.5, 2.65
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if g(lo) * g(mid) <= 0.0:
                hi = mid
            else:
                lo = mid
        root = 0.5 * (lo + hi)
        assert iv.lo - 1e-12 <= root <= iv.hi + 1e-12

    def test_bracket_ends_sign_definite(self):
        g_lo = V._g_enclosure(2.5)
        g_hi = V._g_enclosure(2.65)
        assert not g_lo.contains_zero()
        assert not g_hi.contains_zero()
        assert (g_lo.lo > 0.0) != (g_hi.lo > 0.0)

    def test_very_tight_tolerance(self):
        iv = V.enclose_p0(1e-9)
        assert iv.width <= 1e-9

    def test_bad_tolerance(self):
        with pytest.raises(DomainError):
            V.enclose_p0(0.0)

    def test_no_sign_change_error(self):
        with pytest.raises(V.NoSignChange):
            V.enclose_p0(1e-3, bracket=(2.6, 2.65))


class TestCertificateDocuments:
    def make_cert(self):
        return V.verify_strip(Interval(2.32, 2.34), "interior", strip=0.02, budget=400)

    def test_round_trip_bit_exact(self):
        cert = self.make_cert()
        doc = V.emit_certificate(cert, format="structured")
        parsed = V.parse_certificate(doc)
        assert parsed["complete"] == cert.complete
        assert parsed["totals"] == cert.totals
        for leaf, rec in zip(parsed["leaves"], cert.leaves):
            assert float(leaf["p"][0]) == rec.cell.interval("p").lo
            assert float(leaf["p"][1]) == rec.cell.interval("p").hi
            assert float(leaf["sigma"][0]) == rec.cell.interval("sigma").lo
            assert leaf["verdict"] == rec.status.verdict
            if rec.status.witness is not None:
                assert float(leaf["witness"]["value"][0]) == rec.status.witness.value.lo
                assert float(leaf["witness"]["value"][1]) == rec.status.witness.value.hi

    def test_empty_certificate_emits(self):
        cert = V.Certificate(
            region=Box(Interval(2.3, 2.4), Interval(1.0, 1.8)),
            policy={}, leaves=[], totals={}, complete=True,
            version="x", scheme=V.SCHEME,
        )
        doc = V.emit_certificate(cert)
        assert V.parse_certificate(doc)["leaves"] == []

    def test_tabular_summary(self):
        cert = self.make_cert()
        tab = V.emit_certificate(cert, format="tabular")
        lines = tab.strip().splitlines()
        assert lines[0] == "metric,value"
        assert any(l.startswith("leaves,") for l in lines)
        assert any(l.startswith("complete,1") for l in lines)

    def test_replay_reproduces_verdicts(self):
        cert = self.make_cert()
        doc = V.parse_certificate(V.emit_certificate(cert))
        for leaf in doc["leaves"]:
            assert V.replay_leaf(leaf) == leaf["verdict"]

    def test_timing_excluded_from_structured(self):
        cert = self.make_cert()
        doc = V.emit_certificate(cert)
        assert "timing" not in json.loads(doc)
        assert cert.timing > 0.0  # carried on the object, printed in tabular

    def test_deterministic_documents(self):
        c1 = self.make_cert()
        c2 = self.make_cert()
        assert V.emit_certificate(c1) == V.emit_certificate(c2)
