"""Certification engine for the critical-determinant inequality.

Certifies Delta(p, sigma) > min(Delta(p, 1), Delta(p, sigma_p)) on strips of
the parameter domain by adaptive covering.  Three certificate kinds per leaf:

  CertifiedInterior      Delta exceeds an upper enclosure of one boundary
                         value outright (subpaved natural + mean-value forms).
  CertifiedMonotoneLow   d2Delta/dsigma2 > 0 on the column from the cell down
                         to sigma = 1; with the exact stationarity
                         dDelta/dsigma(p, 1) = 0 this gives strict growth away
                         from the low edge, so Delta > Delta(p, 1) there.
  CertifiedMonotoneHigh  the symmetric convexity column up to the sigma_p
                         curve; with dDelta/dsigma(p, sigma_p) = 0 it gives
                         strict growth away from the curve, so
                         Delta > Delta(p, sigma_p).

dDelta/dsigma itself vanishes identically on both boundary lines (both edges
are stationary branches of critical lattices; the identities reduce to
b1(1+tau^p) = b0 and s1*alpha1 = beta1 at tau = 0), so a first-derivative
sign witness on a boundary-touching strip cannot exist; the convexity witness
carries the monotone certificates instead.  All claims are restricted to the
parameter domain 1 < sigma < sigma_p(p); evaluation boxes may straddle the
curved upper boundary, where enclosures remain valid for in-domain points by
inclusion isotonicity.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from . import __version__ as _version
from .batch import (
    subpave_convex_positive,
    subpave_delta_above,
)
from .cells import ICell
from .enclosure import (
    DEFAULT_SEED,
    EifElement,
    EmptyEnclosure,
    NotConverged,
    SingularConstraint,
    delta_edge_high_enclosure,
    delta_edge_low_enclosure,
    delta_eif,
    precheck_clamped,
    sigma_p_enclosure,
    tau_interval,
)
from .interval import Box, DomainError, Interval
from .jets import delta_sigma_derivs
from .moduli import delta_edge_low, delta_point, sigma_p, tau_point

__all__ = [
    "CertStatus",
    "LeafRecord",
    "Certificate",
    "BudgetExhausted",
    "NoSignChange",
    "VerifyError",
    "certify_box",
    "verify_strip",
    "enclose_p0",
    "emit_certificate",
    "parse_certificate",
    "replay_leaf",
]

SCHEME = "convex-column-1"

VERDICT_INTERIOR = "CertifiedInterior"
VERDICT_MONO_LOW = "CertifiedMonotoneLow"
VERDICT_MONO_HIGH = "CertifiedMonotoneHigh"
VERDICT_UNDECIDED = "Undecided"


class VerifyError(Exception):
    pass


class BudgetExhausted(VerifyError):
    """Raised when the leaf budget runs out; carries the partial certificate."""

    def __init__(self, certificate: "Certificate"):
        super().__init__(
            f"budget exhausted with {certificate.totals.get(VERDICT_UNDECIDED, 0)} "
            "undecided leaves"
        )
        self.certificate = certificate


class NoSignChange(VerifyError):
    """The boundary-difference enclosures fail to be sign-definite at the
    bracket ends."""


@dataclass(frozen=True)
class CertStatus:
    verdict: str
    witness: EifElement | None = None
    reason: str = ""


@dataclass(frozen=True)
class LeafRecord:
    cell: ICell
    band: str  # "low" | "mid" | "high"
    status: CertStatus
    bound_low: Interval  # enclosure of Delta(p, 1) over the leaf p-range
    bound_high: Interval  # enclosure of Delta(p, sigma_p) over the leaf p-range
    tau: Interval | None = None
    precheck: bool | None = None


@dataclass
class Certificate:
    region: Box
    policy: dict
    leaves: list[LeafRecord]
    totals: dict[str, int]
    complete: bool
    version: str
    scheme: str
    timing: float = 0.0

    @property
    def undecided(self) -> list[LeafRecord]:
        return [r for r in self.leaves if r.status.verdict == VERDICT_UNDECIDED]


@dataclass
class _Work:
    cell: ICell
    band: str
    depth: int = 0


def _sigma_p_inf(p_lo: float, p_hi: float, m: int = 16) -> float:
    """Verified lower bound for sigma_p over [p_lo, p_hi] (sliced, so no
    monotonicity assumption)."""
    cuts = np.linspace(p_lo, p_hi, m + 1)
    return min(
        sigma_p_enclosure(Interval(float(cuts[i]), float(cuts[i + 1]))).lo
        for i in range(m)
    )


def _sigma_p_sup(p_lo: float, p_hi: float, m: int = 16) -> float:
    cuts = np.linspace(p_lo, p_hi, m + 1)
    return max(
        sigma_p_enclosure(Interval(float(cuts[i]), float(cuts[i + 1]))).hi
        for i in range(m)
    )


def _float_margins(pm: float, sm: float) -> tuple[float, float]:
    """Point margins (vs high bound, vs low bound); heuristics only."""
    sm = min(max(sm, 1.0), sigma_p(pm) * (1.0 - 1e-12))
    d = delta_point(pm, sm).delta
    return d - 0.5 * sigma_p(pm), d - delta_edge_low(pm)


def _float_dds2(pm: float, sm: float) -> float:
    """Point second sigma-derivative; heuristics only (NaN on failure)."""
    try:
        sm = min(max(sm, 1.0), sigma_p(pm) * (1.0 - 1e-9))
        _, dds2 = delta_sigma_derivs(pm, sm, tau_point(pm, sm))
        return dds2
    except Exception:
        return float("nan")


def certify_box(
    X: Box,
    bound_low: Interval,
    bound_high: Interval,
    band: str = "mid",
    sigma_top: float | None = None,
    node_budget: int = 24000,
) -> CertStatus:
    """Attempt interior, then monotone certificates for one cell.

    bound_low/bound_high are enclosures of the two boundary values over the
    cell's p-range; sigma_top is a verified upper bound for sigma_p over the
    p-range (needed for the monotone-high column).
    """
    p_lo, p_hi = X.p.lo, X.p.hi
    s_lo, s_hi = X.sigma.lo, X.sigma.hi

    # float prescreens at corners and midpoint: a sampled point with a
    # non-positive margin rules the corresponding certificate out for this
    # cell entirely, so the expensive subpaving is skipped (prescreens gate
    # attempts, never certify anything).
    pm, sm = X.mid
    samples = [(pm, sm), (p_lo, s_lo), (p_lo, s_hi), (p_hi, s_lo), (p_hi, s_hi)]
    mh_list, ml_list = [], []
    for ps, ss in samples:
        try:
            a, b = _float_margins(ps, ss)
        except Exception:
            a, b = float("nan"), float("nan")
        mh_list.append(a)
        ml_list.append(b)
    mh = min(mh_list)
    ml = min(ml_list)
    mh, ml = (mh if mh == mh else -1.0), (ml if ml == ml else -1.0)
    mh_mean = sum(mh_list) / len(mh_list) if mh == mh else -1.0
    ml_mean = sum(ml_list) / len(ml_list) if ml == ml else -1.0

    straddles = s_hi > sigma_p(pm)

    # quick interior test from the plain natural extension
    bound_hi = min(bound_low.hi, bound_high.hi)
    if max(mh, ml) > 1e-7:
        try:
            enc = tau_interval(X)
            nat = delta_eif(X, enc, refine=True)
            if nat.value.lo > bound_hi:
                return CertStatus(
                    verdict=VERDICT_INTERIOR,
                    witness=EifElement(
                        box=X, value=nat.value - bound_hi, fid="delta_minus_bound"
                    ),
                )
        except (EmptyEnclosure, NotConverged, DomainError, SingularConstraint):
            pass

    # cost models: subpaving with the mean-value form needs ~area*C/margin
    # nodes inside the domain; curve-straddling regions fall back to natural
    # extensions, ~area*(C/margin)^2, and the second-derivative columns carry
    # a heavier dependency constant.  Attempts whose estimate dwarfs the node
    # budget are skipped and attempts get cost-proportional budgets (the leaf
    # splits instead; estimates tune cost, never soundness).
    def _interior_est(margin_min: float, margin_mean: float, area: float) -> float:
        # straddling cells pay the quadratic natural-extension price along the
        # whole curve edge, where the minimum margin binds; in-domain cells
        # pay the mean-value price, which tracks the average margin
        if margin_mean <= 1e-13 or margin_min <= 1e-13:
            return float("inf")
        if straddles:
            return area * (2.5 / margin_min) ** 2
        return area * 24.0 / margin_mean

    def _attempt_nodes(est: float) -> int:
        return int(min(3.0 * node_budget, max(float(node_budget), 6.0 * est)))

    area = (p_hi - p_lo) * (s_hi - s_lo)

    def try_interior_high():
        est = _interior_est(mh, mh_mean, area)
        if not mh > 1e-7 or est > 3.0 * node_budget:
            return None
        w = subpave_delta_above(
            p_lo, p_hi, s_lo, s_hi, "high", max_nodes=_attempt_nodes(est)
        )
        if w is not None:
            return CertStatus(
                verdict=VERDICT_INTERIOR,
                witness=EifElement(
                    box=X, value=Interval(*w), fid="delta_minus_edge_high"
                ),
            )
        return None

    def try_interior_low():
        est = _interior_est(ml, ml_mean, area)
        if not ml > 1e-7 or est > 3.0 * node_budget:
            return None
        w = subpave_delta_above(
            p_lo, p_hi, s_lo, s_hi, "low", max_nodes=_attempt_nodes(est)
        )
        if w is not None:
            return CertStatus(
                verdict=VERDICT_INTERIOR,
                witness=EifElement(
                    box=X, value=Interval(*w), fid="delta_minus_edge_low"
                ),
            )
        return None

    def _column_est(margin: float, col_area: float, dep: float) -> float:
        # dep ~ 30 for the sigma=1 anchor (tau ~ 0.27 fattens every atom),
        # ~ 12 for curve columns where tau is pinned near zero
        if margin <= 1e-13:
            return float("inf")
        return col_area * (dep / margin) ** 2

    def _column_nodes(est: float) -> int:
        return int(min(6.0 * node_budget, max(float(node_budget), 4.0 * est)))

    def try_mono_low():
        probes = [
            _float_dds2(pp, ss)
            for pp in (p_lo, pm, p_hi)
            for ss in (1.0 + 1e-9, 1.0 + 0.5 * (s_hi - 1.0), s_hi)
        ]
        m = min(probes) if probes else 0.0
        est = _column_est(m, (p_hi - p_lo) * (s_hi - 1.0), 30.0)
        if not m > 1e-8 or est > 4.0 * node_budget:
            return None
        w = subpave_convex_positive(
            p_lo, p_hi, 1.0, s_hi, max_nodes=_column_nodes(est)
        )
        if w is not None:
            return CertStatus(
                verdict=VERDICT_MONO_LOW,
                witness=EifElement(
                    box=Box(X.p, Interval(1.0, s_hi)),
                    value=Interval(*w),
                    fid="d_sigma2_column_low",
                ),
            )
        return None

    def try_mono_high():
        top = sigma_top if sigma_top is not None else _sigma_p_sup(p_lo, p_hi)
        if s_hi >= top:
            top = s_hi  # high-band cells already cover the curve
        if p_lo <= 2.0:
            return None  # tau^(p-2) atoms degenerate at the curve for p <= 2
        probes = [
            _float_dds2(pp, ss)
            for pp in (p_lo, pm, p_hi)
            for ss in (s_lo, 0.5 * (s_lo + sigma_p(pm)), sigma_p(pm) * (1.0 - 1e-9))
        ]
        m = min(probes) if probes else 0.0
        est = _column_est(m, (p_hi - p_lo) * (top - s_lo), 12.0)
        if not m > 1e-8 or est > 4.0 * node_budget:
            return None
        w = subpave_convex_positive(
            p_lo, p_hi, s_lo, top, max_nodes=_column_nodes(est)
        )
        if w is not None:
            return CertStatus(
                verdict=VERDICT_MONO_HIGH,
                witness=EifElement(
                    box=Box(X.p, Interval(s_lo, top)),
                    value=Interval(*w),
                    fid="d_sigma2_column_high",
                ),
            )
        return None

    if band == "high":
        attempts = [try_mono_high, try_interior_low, try_interior_high]
    elif band == "low":
        attempts = (
            [try_interior_high, try_mono_low, try_interior_low]
            if mh >= ml
            else [try_mono_low, try_interior_low, try_interior_high]
        )
    else:
        attempts = (
            [try_interior_high, try_interior_low, try_mono_high]
            if mh >= ml
            else [try_interior_low, try_interior_high, try_mono_low]
        )
    for attempt in attempts:
        try:
            st = attempt()
        except (DomainError, SingularConstraint, EmptyEnclosure, NotConverged):
            st = None
        if st is not None:
            return st
    return CertStatus(verdict=VERDICT_UNDECIDED, reason="all tests inconclusive")


def _leaf_bounds(p_lo: float, p_hi: float) -> tuple[Interval, Interval]:
    P = Interval(p_lo, p_hi)
    return delta_edge_low_enclosure(P), delta_edge_high_enclosure(P)


def _certify_leaf(args) -> tuple[str, CertStatus, Interval, Interval, Interval | None, bool | None]:
    cell, band, sigma_top, node_budget = args
    X = cell.as_box()
    bl, bh = _leaf_bounds(X.p.lo, X.p.hi)
    tau_iv = None
    pre = None
    try:
        enc = tau_interval(X)
        tau_iv = enc.tau
        pre = enc.precheck
    except (EmptyEnclosure, NotConverged, DomainError):
        pre = precheck_clamped(X)
    status = certify_box(
        X, bl, bh, band=band, sigma_top=sigma_top, node_budget=node_budget
    )
    return cell.id, status, bl, bh, tau_iv, pre


def verify_strip(
    p_range: Interval,
    sigma_policy: str = "full",
    strip: float = 0.02,
    budget: int = 10000,
    workers: int = 1,
    node_budget: int = 24000,
    initial_p_slices: int | None = None,
) -> Certificate:
    """Adaptive certification over {p in p_range, 1 <= sigma <= sigma_p(p)}.

    sigma_policy "full" covers the whole domain with boundary bands of width
    `strip`; "interior" covers only [1 + strip, sigma_p - strip].  Leaves are
    certified generation by generation (a work queue; `workers` only shards
    the generation, results merge by cell id, so output is worker-count
    independent), undecided leaves split on their widest relative axis until
    certification or `budget` total leaves.

    Raises BudgetExhausted (carrying the partial certificate) when the budget
    runs out with undecided leaves.
    """
    t0 = time.perf_counter()
    if not (1.0 < p_range.lo < p_range.hi):
        raise DomainError(f"invalid p range {p_range!r}")
    if strip <= 0.0:
        raise DomainError("strip width must be positive")
    if sigma_policy not in ("full", "interior"):
        raise DomainError(f"unknown sigma policy {sigma_policy!r}")
    p_lo, p_hi = p_range.lo, p_range.hi
    s_inf = _sigma_p_inf(p_lo, p_hi)
    s_sup = _sigma_p_sup(p_lo, p_hi)
    if 1.0 + strip >= s_inf - strip:
        raise DomainError(
            f"strip {strip} leaves no interior band (sigma_p as low as {s_inf})"
        )

    if sigma_policy == "full":
        bands = [
            ("low", 1.0, 1.0 + strip),
            ("mid", 1.0 + strip, s_inf - strip),
            ("high", s_inf - strip, s_sup),
        ]
        region = Box(p_range, Interval(1.0, s_sup))
    else:
        bands = [("mid", 1.0 + strip, s_inf - strip)]
        region = Box(p_range, Interval(1.0 + strip, s_inf - strip))

    if initial_p_slices is None:
        initial_p_slices = max(1, min(8, round((p_hi - p_lo) / 0.025)))
    p_cuts = [p_lo + (p_hi - p_lo) * k / initial_p_slices for k in range(initial_p_slices + 1)]
    p_cuts[0], p_cuts[-1] = p_lo, p_hi

    frontier: list[_Work] = []
    serial = 0
    for band, a, b in bands:
        for k in range(initial_p_slices):
            cell = ICell(
                id=f"c{serial}",
                free_axes=(
                    ("p", Interval(p_cuts[k], p_cuts[k + 1])),
                    ("sigma", Interval(a, b)),
                ),
            )
            serial += 1
            frontier.append(_Work(cell=cell, band=band))

    leaves: dict[str, LeafRecord] = {}
    n_leaves = len(frontier)
    scale_p = p_hi - p_lo
    scale_s = region.sigma.hi - region.sigma.lo

    while frontier:
        frontier.sort(key=lambda w: w.cell.id)
        tasks = [(w.cell, w.band, s_sup, node_budget) for w in frontier]
        if workers > 1 and len(tasks) > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_certify_leaf, tasks))
        else:
            results = [_certify_leaf(t) for t in tasks]

        next_frontier: list[_Work] = []
        for w, (cid, status, bl, bh, tau_iv, pre) in zip(frontier, results):
            rec = LeafRecord(
                cell=w.cell, band=w.band, status=status,
                bound_low=bl, bound_high=bh, tau=tau_iv, precheck=pre,
            )
            leaves[cid] = rec
            if status.verdict != VERDICT_UNDECIDED:
                continue
            if n_leaves + 1 > budget:
                continue  # cannot split further: stays undecided
            # split: high band keeps covering the curve, so p only there
            iv_p = w.cell.interval("p")
            iv_s = w.cell.interval("sigma")
            if w.band == "high":
                axis = "p"
            else:
                axis = (
                    "p"
                    if (iv_p.width / scale_p) >= (iv_s.width / scale_s)
                    else "sigma"
                )
            iv = w.cell.interval(axis)
            mid = iv.mid
            if mid == iv.lo or mid == iv.hi:
                continue  # cannot split thinner than floats allow
            del leaves[cid]
            n_leaves += 1
            for tag, piece in (("0", Interval(iv.lo, mid)), ("1", Interval(mid, iv.hi))):
                free = tuple(
                    (a, piece if a == axis else v) for a, v in w.cell.free_axes
                )
                child = ICell(id=f"{cid}{tag}", free_axes=free)
                next_frontier.append(_Work(cell=child, band=w.band, depth=w.depth + 1))
        frontier = next_frontier

    ordered = [leaves[k] for k in sorted(leaves)]
    totals: dict[str, int] = {}
    for r in ordered:
        totals[r.status.verdict] = totals.get(r.status.verdict, 0) + 1
    complete = totals.get(VERDICT_UNDECIDED, 0) == 0
    cert = Certificate(
        region=region,
        policy={
            "p_lo": p_lo,
            "p_hi": p_hi,
            "sigma_policy": sigma_policy,
            "strip": strip,
            "budget": budget,
            "node_budget": node_budget,
            "initial_p_slices": initial_p_slices,
            "seed": [DEFAULT_SEED.lo, DEFAULT_SEED.hi],
        },
        leaves=ordered,
        totals=totals,
        complete=complete,
        version=_version,
        scheme=SCHEME,
        timing=time.perf_counter() - t0,
    )
    if not complete:
        raise BudgetExhausted(cert)
    return cert


# -- p0 enclosure -------------------------------------------------------------------


def _g_enclosure(p: float) -> Interval:
    """Rigorous enclosure of Delta(p,1) - Delta(p,sigma_p) at a point."""
    P = Interval.point(p)
    return delta_edge_low_enclosure(P) - delta_edge_high_enclosure(P)


def enclose_p0(tolerance: float, bracket: tuple[float, float] = (2.5, 2.65)) -> Interval:
    """Interval bisection for the crossover p0 of the two boundary values.

    Requires sign-definite difference enclosures at the bracket ends; result
    has width <= tolerance and contains the crossover.
    """
    if tolerance <= 0.0:
        raise DomainError("tolerance must be positive")
    lo, hi = bracket
    g_lo = _g_enclosure(lo)
    g_hi = _g_enclosure(hi)
    if g_lo.contains_zero() or g_hi.contains_zero():
        raise NoSignChange(f"bracket enclosures {g_lo!r}, {g_hi!r} not sign-definite")
    if (g_lo.lo > 0.0) == (g_hi.lo > 0.0):
        raise NoSignChange("bracket endpoints have the same verified sign")
    lo_pos = g_lo.lo > 0.0
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        g_mid = _g_enclosure(mid)
        if g_mid.contains_zero():
            raise NoSignChange(
                f"indecisive enclosure {g_mid!r} at p = {mid}; tolerance too small"
            )
        if (g_mid.lo > 0.0) == lo_pos:
            lo = mid
        else:
            hi = mid
    return Interval(lo, hi)


# -- certificate documents ------------------------------------------------------------

_FORMAT_VERSION = 1


def _iv(iv: Interval | None):
    if iv is None:
        return None
    return [repr(iv.lo), repr(iv.hi)]


def emit_certificate(cert: Certificate, format: str = "structured") -> str:
    """Serialize a certificate.

    structured: complete machine-checkable JSON; bounds are shortest
    round-trip decimal strings (exact, no rounding), so parsing reproduces
    every float bit-for-bit.  Timing is deliberately excluded: documents are
    byte-identical across runs and worker counts.
    tabular: comma-separated summary (verdict counts, worst margins).
    """
    if format == "structured":
        doc = {
            "format": "critlat-certificate",
            "format_version": _FORMAT_VERSION,
            "toolkit_version": cert.version,
            "scheme": cert.scheme,
            "bounds_encoding": "decimal strings, exact shortest round-trip (no rounding)",
            "claims": "Delta(p,sigma) > min(Delta(p,1), Delta(p,sigma_p)) on certified "
            "leaves, restricted to 1 < sigma < sigma_p(p)",
            "region": {"p": _iv(cert.region.p), "sigma": _iv(cert.region.sigma)},
            "policy": cert.policy,
            "totals": cert.totals,
            "complete": cert.complete,
            "leaves": [
                {
                    "id": r.cell.id,
                    "band": r.band,
                    "p": _iv(r.cell.interval("p")),
                    "sigma": _iv(r.cell.interval("sigma")),
                    "verdict": r.status.verdict,
                    "reason": r.status.reason,
                    "witness": None
                    if r.status.witness is None
                    else {
                        "fid": r.status.witness.fid,
                        "value": _iv(r.status.witness.value),
                        "box_p": _iv(r.status.witness.box.p),
                        "box_sigma": _iv(r.status.witness.box.sigma),
                    },
                    "bound_low": _iv(r.bound_low),
                    "bound_high": _iv(r.bound_high),
                    "tau": _iv(r.tau),
                    "precheck": r.precheck,
                }
                for r in cert.leaves
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    if format == "tabular":
        lines = ["metric,value"]
        lines.append(f"leaves,{len(cert.leaves)}")
        for k in sorted(cert.totals):
            lines.append(f"count_{k},{cert.totals[k]}")
        lines.append(f"complete,{int(cert.complete)}")
        margins = [
            r.status.witness.value.lo
            for r in cert.leaves
            if r.status.witness is not None
        ]
        if margins:
            lines.append(f"worst_witness_margin,{min(margins)!r}")
        lines.append(f"scheme,{cert.scheme}")
        lines.append(f"toolkit_version,{cert.version}")
        lines.append(f"timing_seconds,{cert.timing:.3f}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown certificate format {format!r}")


def parse_certificate(text: str) -> dict:
    doc = json.loads(text)
    if doc.get("format") != "critlat-certificate":
        raise ValueError("not a certificate document")
    return doc


def replay_leaf(leaf: dict, node_budget: int = 24000) -> str:
    """Recertify one parsed leaf record; returns the fresh verdict."""
    X = Box(
        Interval(float(leaf["p"][0]), float(leaf["p"][1])),
        Interval(float(leaf["sigma"][0]), float(leaf["sigma"][1])),
    )
    bl = Interval(float(leaf["bound_low"][0]), float(leaf["bound_low"][1]))
    bh = Interval(float(leaf["bound_high"][0]), float(leaf["bound_high"][1]))
    status = certify_box(X, bl, bh, band=leaf["band"], node_budget=node_budget)
    return status.verdict
