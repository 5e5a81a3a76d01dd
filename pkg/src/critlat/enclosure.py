"""Rigorous interval enclosures on (p, sigma) boxes.

The tau enclosure comes from the interval fixed-point iteration
tau <- (1 + tau^p)^(1/p) * ((1 - A^p)^(1/p) - sigma*a0), seeded and clamped at
[0, 0.36], intersected with the previous iterate after every step (natural
extension mode, the soundness anchor).  The classical endpoint-mixed
recurrences are available as mode="mixed" with the end clamp only.

Delta and its five constraint-surface derivatives get interval extensions via
the jet engine; boundary-column second-derivative enclosures use the explicit
atom formulas so they stay valid where the tau enclosure touches zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .interval import (
    EMPTY,
    Box,
    DomainError,
    Interval,
    intersect,
    ipow,
)
from .jets import (
    SingularConstraint,
    delta_jet,
    delta_scalar,
    delta_sigma_derivs,
    phi_prime,
    solve_tau_jet,
    spow_nonneg,
)
from .moduli import sigma_p, tau_point

__all__ = [
    "EifElement",
    "TauEnclosure",
    "EmptyEnclosure",
    "NotConverged",
    "SingularConstraint",
    "DEFAULT_SEED",
    "convergence_precheck",
    "precheck_clamped",
    "tau_interval",
    "delta_eif",
    "derivative_eifs",
    "sigma_derivs_enclosure",
    "sigma_p_enclosure",
    "tau_p_enclosure",
    "delta_edge_low_enclosure",
    "delta_edge_high_enclosure",
    "d_sigma_p_enclosure",
    "d_delta_edge_low_enclosure",
]

DEFAULT_SEED = Interval(0.0, 0.36)
_ONE = Interval(1.0, 1.0)
_TWO = Interval(2.0, 2.0)


class EmptyEnclosure(Exception):
    """The iteration intersected away to nothing: the box has no surface
    points (domain violation) or the map diverged."""


class NotConverged(Exception):
    """Stall tolerance not reached within the iteration budget."""


@dataclass(frozen=True)
class EifElement:
    """Interval functional element: an enclosure of a tagged function's range
    on a box.  Sign-definite elements qualify as c-elements."""

    box: Box
    value: Interval
    fid: str
    optimal: bool = False  # bounds proven attained; never claimed here

    @property
    def is_c_element(self) -> bool:
        return not self.value.contains_zero()

    @property
    def sign(self) -> int:
        if self.value.lo > 0.0:
            return 1
        if self.value.hi < 0.0:
            return -1
        return 0


@dataclass(frozen=True)
class TauEnclosure:
    box: Box
    tau: Interval
    iterations: int
    converged: bool
    precheck: bool
    seed: Interval
    mode: str


# -- closed-form boundary enclosures ------------------------------------------


def sigma_p_enclosure(P: Interval) -> Interval:
    """(2^P - 1)^(1/P)."""
    if P.lo <= 1.0:
        raise DomainError(f"sigma_p needs p > 1, got {P!r}")
    u = ipow(_TWO, P) - _ONE
    return ipow(u, _ONE / P)


def _tau_p_resid_enclosure(tau: float, P: Interval) -> Interval:
    t = Interval.point(tau)
    lhs = _TWO * ipow(_ONE - t, P)
    rhs = _ONE + (spow_nonneg(t, P) if tau <= 0.0 else ipow(t, P))
    return lhs - rhs


def tau_p_enclosure(P: Interval, max_iter: int = 80) -> Interval:
    """Bracket of {tau_p(p) : p in P} by interval-sign bisection.

    The residual 2(1-t)^p - 1 - t^p is decreasing in t for every p, so a
    verified positive sign at t pushes the lower bracket and a verified
    negative sign pushes the upper one; an indecisive midpoint ends the
    refinement with the bracket still sound.
    """
    if P.lo <= 1.0:
        raise DomainError(f"tau_p needs p > 1, got {P!r}")
    lo, hi = 0.0, 0.5
    if _tau_p_resid_enclosure(hi, P).hi >= 0.0:
        raise DomainError("tau_p bracket failed at 0.5")
    stuck = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        r = _tau_p_resid_enclosure(mid, P)
        if r.lo > 0.0:
            lo = mid
        elif r.hi < 0.0:
            hi = mid
        else:
            stuck = mid
            break
    if stuck is not None:
        # the midpoint became indecisive: push each endpoint independently
        # toward it as far as its verified sign allows
        a, b = lo, stuck
        for _ in range(max_iter):
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            if _tau_p_resid_enclosure(m, P).lo > 0.0:
                a = m
            else:
                b = m
        lo = a
        a, b = stuck, hi
        for _ in range(max_iter):
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            if _tau_p_resid_enclosure(m, P).hi < 0.0:
                b = m
            else:
                a = m
        hi = b
    return Interval(lo, hi)


def delta_edge_low_enclosure(P: Interval) -> Interval:
    """Delta(P, 1) = 4^(-1/P) (1 + tau_p)/(1 - tau_p)."""
    tp = tau_p_enclosure(P)
    return ipow(Interval(4.0, 4.0), -(_ONE / P)) * (_ONE + tp) / (_ONE - tp)


def delta_edge_high_enclosure(P: Interval) -> Interval:
    """Delta(P, sigma_p) = sigma_p / 2."""
    return sigma_p_enclosure(P) / _TWO


def d_sigma_p_enclosure(P: Interval) -> Interval:
    """d sigma_p / dp = sigma_p * [2^p ln2 / (p(2^p-1)) - ln(2^p-1)/p^2]."""
    two_p = ipow(_TWO, P)
    u = two_p - _ONE
    ln2 = Interval(math.nextafter(math.log(2.0), 0.0), math.nextafter(math.log(2.0), 1.0))
    term1 = two_p * ln2 / (P * u)
    term2 = u.log() / (P * P)
    return sigma_p_enclosure(P) * (term1 - term2)


def d_delta_edge_low_enclosure(P: Interval) -> Interval:
    """d/dp of Delta(p, 1), via implicit tau_p'(p) = -h_p/h_tau."""
    tp = tau_p_enclosure(P)
    one_m = _ONE - tp
    ln4 = Interval(math.nextafter(math.log(4.0), 0.0), math.nextafter(math.log(4.0), 4.0))
    h_p = _TWO * ipow(one_m, P) * one_m.log() - ipow(tp, P) * tp.log()
    h_t = -_TWO * P * ipow(one_m, P - _ONE) - P * ipow(tp, P - _ONE)
    tp_prime = -(h_p / h_t)
    dl = delta_edge_low_enclosure(P)
    return dl * (ln4 / (P * P) + _TWO * tp_prime / (_ONE - tp * tp))


# -- Remark-1 convergence precheck ----------------------------------------------


def convergence_precheck(X: Box) -> bool:
    """|phi'_tau| < 1 at the box midpoint with its point-solved tau.

    Guard: the box must satisfy sigma.hi <= sigma_p(p.lo) rigorously.
    """
    guard = sigma_p_enclosure(Interval.point(X.p.lo)).lo
    if X.sigma.hi > guard:
        raise DomainError(
            f"sigma.hi = {X.sigma.hi} exceeds verified sigma_p(p.lo) >= {guard}"
        )
    pm, sm = X.mid
    tau = tau_point(pm, sm)
    return abs(phi_prime(pm, sm, tau)) < 1.0


def precheck_clamped(X: Box) -> bool:
    """Precheck with the midpoint clamped into the parameter domain (total:
    curve-straddling boxes get the nearest in-domain midpoint)."""
    pm, sm = X.mid
    hi = sigma_p(pm) * (1.0 - 1e-12)
    sm = min(max(sm, 1.0), hi)
    try:
        tau = tau_point(pm, sm)
        return abs(phi_prime(pm, sm, tau)) < 1.0
    except Exception:
        return False


# -- the interval fixed-point iteration ------------------------------------------


def _phi_interval(P: Interval, S: Interval, a0: Interval, sa0: Interval, T: Interval) -> Interval:
    """Natural interval extension of the fixed-point map at tau interval T."""
    inv_p = _ONE / P
    u = _ONE + spow_nonneg(T, P)
    b0 = ipow(u, -inv_p)
    A = b0 - a0
    if A.lo <= 0.0:
        raise DomainError(f"A enclosure {A!r} not positive (box too wide)")
    inner = _ONE - ipow(A, P)
    if inner.lo <= 0.0:
        raise DomainError(f"1 - A^p enclosure {inner!r} not positive")
    return ipow(u, inv_p) * (ipow(inner, inv_p) - sa0)


def _check_seed_clamp(P: Interval, seed: Interval) -> None:
    # tau_p(p) < seed.hi for all p in P iff the residual at seed.hi is negative.
    r = _tau_p_resid_enclosure(seed.hi, P)
    if r.hi >= 0.0:
        raise DomainError(
            f"cannot verify tau_p < {seed.hi} over {P!r}: residual {r!r}"
        )


def _phi_mixed_endpoint(P: Interval, S: Interval, t: float, side: str) -> Interval:
    # Endpoint-mixed recurrence: contracting positions get the far exponent
    # and parameter endpoints, expanding positions the near ones.
    if side == "lo":
        p_pre, p_in, s_in = Interval.point(P.hi), Interval.point(P.lo), Interval.point(S.hi)
    else:
        p_pre, p_in, s_in = Interval.point(P.lo), Interval.point(P.hi), Interval.point(S.lo)
    ti = Interval.point(t)
    u = _ONE + spow_nonneg(ti, p_pre)
    a0 = ipow(_ONE + ipow(s_in, p_in), -(_ONE / p_in))
    A = ipow(u, -(_ONE / p_pre)) - a0
    if A.lo <= 0.0:
        raise DomainError("A not positive in mixed step")
    inner = _ONE - ipow(A, p_in)
    if inner.lo <= 0.0:
        raise DomainError("1 - A^p not positive in mixed step")
    return ipow(u, _ONE / p_pre) * (ipow(inner, _ONE / p_in) - s_in * a0)


def tau_interval(
    X: Box,
    max_iterations: int = 200,
    stall_tol: float = 1e-15,
    seed: Interval = DEFAULT_SEED,
    mode: str = "natural",
) -> TauEnclosure:
    """Enclosure of {tau(p, sigma) : (p, sigma) in X within the domain}.

    Natural mode intersects the interval image with the current iterate every
    step, so every true fixed point present at the start is present at the
    end; convergence is declared when the width stalls (or the float fixpoint
    is reached exactly).  EmptyEnclosure means the box holds no surface point.
    """
    _check_seed_clamp(X.p, seed)
    pre = precheck_clamped(X)
    P, S = X.p, X.sigma

    if mode == "mixed":
        lo, hi = seed.lo, seed.hi
        n = 0
        for n in range(1, max_iterations + 1):
            new_lo = _phi_mixed_endpoint(P, S, lo, "lo").lo
            new_hi = _phi_mixed_endpoint(P, S, hi, "hi").hi
            ch = max(abs(new_lo - lo), abs(new_hi - hi))
            lo, hi = new_lo, new_hi
            if ch <= stall_tol:
                break
        else:
            raise NotConverged(f"mixed iteration stalled after {max_iterations}")
        final = intersect(Interval(min(lo, hi), max(lo, hi)), seed)
        if final is EMPTY:
            raise EmptyEnclosure(f"mixed-mode clamp emptied on {X!r}")
        return TauEnclosure(
            box=X, tau=final, iterations=n, converged=True, precheck=pre,
            seed=seed, mode=mode,
        )

    if mode != "natural":
        raise ValueError(f"unknown mode {mode!r}")

    inv_p = _ONE / P
    a0 = ipow(_ONE + ipow(S, P), -inv_p)
    sa0 = S * a0
    T = seed
    for n in range(1, max_iterations + 1):
        phi = _phi_interval(P, S, a0, sa0, T)
        Tn = intersect(phi, T)
        if Tn is EMPTY:
            raise EmptyEnclosure(f"iteration emptied on {X!r} at step {n}")
        stalled = (Tn == T) or abs(T.width - Tn.width) <= stall_tol
        T = Tn
        if stalled:
            return TauEnclosure(
                box=X, tau=T, iterations=n, converged=True, precheck=pre,
                seed=seed, mode=mode,
            )
    raise NotConverged(f"no stall within {max_iterations} iterations on {X!r}")


# -- eif-elements ------------------------------------------------------------------


def _require_converged(tau: TauEnclosure) -> None:
    if not tau.converged:
        raise NotConverged("tau enclosure not converged")


def _mid_point_delta(X: Box, max_iterations: int) -> tuple[float, float, Interval]:
    pm, sm = X.mid
    sm = min(max(sm, 1.0), sigma_p(pm) * (1.0 - 1e-12))
    mid_box = Box(Interval.point(pm), Interval.point(sm))
    t_mid = tau_interval(mid_box, max_iterations=max_iterations)
    dm = delta_scalar(mid_box.p, mid_box.sigma, t_mid.tau)
    return pm, sm, dm


def delta_eif(X: Box, tau: TauEnclosure, refine: bool = False) -> EifElement:
    """Interval extension of (tau+sigma)(1+tau^p)^(-1/p)(1+sigma^p)^(-1/p).

    refine=True intersects the natural extension with a mean-value form
    centered at the box midpoint (gradient enclosures from the jet engine);
    it needs the tau enclosure bounded away from zero.
    """
    _require_converged(tau)
    value = delta_scalar(X.p, X.sigma, tau.tau)
    if refine and tau.tau.lo > 0.0:
        try:
            t, s, pj = solve_tau_jet(X.p, X.sigma, tau.tau, 1, 1)
            dj = delta_jet(t, s, pj)
            dds, ddp = dj.coeff(1, 0), dj.coeff(0, 1)
            pm, sm, dm = _mid_point_delta(X, 300)
            mvf = dm + dds * (X.sigma - sm) + ddp * (X.p - pm)
            tight = intersect(value, mvf)
            if tight is not EMPTY:
                value = tight
        except (DomainError, SingularConstraint, EmptyEnclosure, NotConverged):
            pass
    return EifElement(box=X, value=value, fid="delta")


_DERIV_IDS = ("d_sigma", "d_sigma2", "d_p", "d_sigma_p", "d_sigma2_p")


def derivative_eifs(X: Box, tau: TauEnclosure) -> dict[str, EifElement]:
    """Interval extensions of the five constraint-surface derivatives.

    Requires tau strictly positive over the box (jet transport goes through
    log tau) and an F_tau enclosure excluding zero (SingularConstraint else).
    """
    _require_converged(tau)
    if tau.tau.lo <= 0.0:
        raise DomainError(
            "derivative enclosures need tau bounded away from zero "
            f"(tau = {tau.tau!r}); box reaches the sigma_p boundary"
        )
    t, s, pj = solve_tau_jet(X.p, X.sigma, tau.tau, 2, 1)
    dj = delta_jet(t, s, pj)
    vals = {
        "d_sigma": dj.coeff(1, 0),
        "d_sigma2": dj.coeff(2, 0) * 2.0,
        "d_p": dj.coeff(0, 1),
        "d_sigma_p": dj.coeff(1, 1),
        "d_sigma2_p": dj.coeff(2, 1) * 2.0,
    }
    return {k: EifElement(box=X, value=v, fid=k) for k, v in vals.items()}


def sigma_derivs_enclosure(X: Box, tau: TauEnclosure) -> tuple[EifElement, EifElement]:
    """(dDelta/dsigma, d2Delta/dsigma2) enclosures from the atom formulas.

    Unlike the jet route this stays valid when the tau enclosure touches
    zero, provided every tau exponent is positive (needs p > 2 there); used
    for the boundary-column convexity certificates.
    """
    _require_converged(tau)
    dds, dds2 = delta_sigma_derivs(X.p, X.sigma, tau.tau)
    return (
        EifElement(box=X, value=dds, fid="d_sigma"),
        EifElement(box=X, value=dds2, fid="d_sigma2"),
    )
