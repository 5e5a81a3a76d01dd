"""Truncated bivariate Taylor jets over a generic scalar type.

A jet carries Taylor coefficients of a function of (sigma, p) up to sigma-degree
`mi` and p-degree `mj` (total degree <= mi + mj, which keeps every series
recurrence below exact).  Coefficients may be floats, Intervals, numpy arrays
or anything else with ring operators plus exp/log, so the identical formulas
produce machine-double derivatives, rigorous interval enclosures of
derivatives, or vectorized derivative samples.

The implicit function tau(sigma, p) defined by F(tau, sigma, p) = A^p + B^p - 1
is transported order by order: each new Taylor coefficient of tau equals
-(residual coefficient of F)/F_tau, i.e. implicit differentiation mechanized.
"""

from __future__ import annotations

import math

import numpy as np

from .interval import DomainError, Interval, ipow
from .vints import VI

__all__ = [
    "Jet",
    "sexp",
    "slog",
    "spow",
    "spow_nonneg",
    "tpow",
    "f_tau_scalar",
    "atoms_f",
    "delta_scalar",
    "phi_scalar",
    "phi_prime",
    "delta_sigma_derivs",
    "delta_p_deriv",
    "tau_pow_log",
    "solve_tau_jet",
    "delta_jet",
    "SingularConstraint",
]


class SingularConstraint(Exception):
    """F_tau vanishes (or its enclosure contains zero): implicit function
    theorem unavailable at this point/box."""


# -- generic scalar helpers ----------------------------------------------------


def sexp(x):
    if type(x) is float:
        return math.exp(x)
    if isinstance(x, np.ndarray):
        return np.exp(x)
    return x.exp()  # Interval, Decimal


def slog(x):
    if type(x) is float:
        return math.log(x)
    if isinstance(x, np.ndarray):
        return np.log(x)
    if isinstance(x, (Interval, VI)):
        return x.log()
    return x.ln()  # Decimal


def spow(x, y):
    """x**y for positive x, generic scalar."""
    if isinstance(x, Interval):
        return ipow(x, y)
    if isinstance(x, VI):
        return x.pow(y)
    return x**y


def spow_nonneg(x, y):
    """x**y for x >= 0 and exponent y with positive lower range.

    The strict kernel pow rejects zero-containing bases; here x = 0 is allowed
    (tau intervals are clamped into [0, 0.36] and may touch zero).
    """
    if isinstance(x, Interval):
        ylo = y.lo if isinstance(y, Interval) else float(y)
        if ylo <= 0.0:
            raise DomainError("spow_nonneg needs a positive exponent")
        if x.lo > 0.0:
            return ipow(x, y)
        if x.lo < 0.0:
            raise DomainError(f"negative base {x!r}")
        if x.hi == 0.0:
            return Interval(0.0, 0.0)
        return Interval(0.0, ipow(Interval(x.hi, x.hi), y).hi)
    if isinstance(x, VI):
        return x.pow_nonneg(y)
    return x**y


# -- moduli atoms in generic scalars -------------------------------------------


def atoms_f(p, sigma, tau):
    """(a0, a1, b0, b1, A, B) for F and F_tau; tau may touch zero."""
    one = 1
    inv_p = one / p
    sp = spow(sigma, p)
    tp = spow_nonneg(tau, p)
    a0 = spow(one + sp, -inv_p)
    b0 = spow(one + tp, -inv_p)
    a1 = spow(one + sp, -one - inv_p)
    b1 = spow(one + tp, -one - inv_p)
    A = b0 - a0
    B = tau * b0 + sigma * a0
    return a0, a1, b0, b1, A, B


def f_tau_scalar(p, sigma, tau):
    """dF/dtau = p * b1 * (B^(p-1) - tau^(p-1) * A^(p-1)), generic scalar."""
    _, _, _, b1, A, B = atoms_f(p, sigma, tau)
    one = 1
    t1 = spow_nonneg(tau, p - one)
    alpha1 = spow(A, p - one)
    beta1 = spow(B, p - one)
    return p * b1 * (beta1 - t1 * alpha1)


# -- jets ----------------------------------------------------------------------

_MUL_TABLES: dict[tuple[int, int], list[list[tuple[int, int]]]] = {}
_SHAPES: dict[tuple[int, int], list[tuple[int, int]]] = {}


def _indices(mi: int, mj: int) -> list[tuple[int, int]]:
    key = (mi, mj)
    if key not in _SHAPES:
        _SHAPES[key] = [(i, j) for j in range(mj + 1) for i in range(mi + 1)]
    return _SHAPES[key]


def _mul_table(mi: int, mj: int):
    key = (mi, mj)
    tab = _MUL_TABLES.get(key)
    if tab is None:
        idx = _indices(mi, mj)
        pos = {ij: k for k, ij in enumerate(idx)}
        tab = [[] for _ in idx]
        for (i1, j1) in idx:
            for (i2, j2) in idx:
                out = (i1 + i2, j1 + j2)
                if out in pos:
                    tab[pos[out]].append((pos[(i1, j1)], pos[(i2, j2)]))
        _MUL_TABLES[key] = tab
    return tab


class Jet:
    __slots__ = ("c", "mi", "mj")

    def __init__(self, coeffs: list, mi: int, mj: int):
        self.c = coeffs
        self.mi = mi
        self.mj = mj

    @classmethod
    def const(cls, value, mi: int, mj: int) -> "Jet":
        c = [0.0] * len(_indices(mi, mj))
        c[0] = value
        return cls(c, mi, mj)

    @classmethod
    def var_sigma(cls, value, mi: int, mj: int) -> "Jet":
        j = cls.const(value, mi, mj)
        j.c[_indices(mi, mj).index((1, 0))] = 1.0
        return j

    @classmethod
    def var_p(cls, value, mi: int, mj: int) -> "Jet":
        j = cls.const(value, mi, mj)
        j.c[_indices(mi, mj).index((0, 1))] = 1.0
        return j

    def coeff(self, i: int, j: int):
        return self.c[_indices(self.mi, self.mj).index((i, j))]

    def deriv(self, i: int, j: int):
        """Partial derivative d^{i+j} / dsigma^i dp^j from the Taylor coefficient."""
        return self.coeff(i, j) * float(math.factorial(i) * math.factorial(j))

    def _like(self, coeffs) -> "Jet":
        return Jet(coeffs, self.mi, self.mj)

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self._like([a + b for a, b in zip(self.c, other.c)])
        c = list(self.c)
        c[0] = c[0] + other
        return self._like(c)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return self._like([-a for a in self.c])

    def __sub__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self._like([a - b for a, b in zip(self.c, other.c)])
        c = list(self.c)
        c[0] = c[0] - other
        return self._like(c)

    def __rsub__(self, other) -> "Jet":
        return (-self).__add__(other)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self._like([a * other for a in self.c])
        a, b = self.c, other.c
        out = []
        for pairs in _mul_table(self.mi, self.mj):
            (ka, kb) = pairs[0]
            acc = a[ka] * b[kb]
            for ka, kb in pairs[1:]:
                acc = acc + a[ka] * b[kb]
            out.append(acc)
        return self._like(out)

    __rmul__ = __mul__

    def _tilde(self) -> "Jet":
        c = list(self.c)
        c[0] = 0.0
        return self._like(c)

    def _poly123(self, k1, k2, k3) -> "Jet":
        # k1*t + k2*t^2 + k3*t^3 truncated; t has zero constant term.
        t = self._tilde()
        total = self.mi + self.mj
        acc = t * k1
        if total >= 2:
            t2 = t * t
            acc = acc + t2 * k2
            if total >= 3:
                acc = acc + (t2 * t) * k3
        return acc

    def recip(self) -> "Jet":
        u0 = self.c[0]
        inv = 1 / u0
        w = self * inv  # constant becomes 1
        series = w._poly123(-1.0, 1.0, -1.0)
        series.c[0] = series.c[0] + 1.0
        return series * inv

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.recip()
        return self * (1 / other)

    def __rtruediv__(self, other) -> "Jet":
        return self.recip() * other

    def exp(self) -> "Jet":
        e0 = sexp(self.c[0])
        series = self._poly123(1.0, 0.5, 1.0 / 6.0)
        series.c[0] = series.c[0] + 1.0
        return series * e0

    def log(self) -> "Jet":
        u0 = self.c[0]
        w = self * (1 / u0)
        series = w._poly123(1.0, -0.5, 1.0 / 3.0)
        series.c[0] = slog(u0)
        return series

    def pow(self, expo) -> "Jet":
        """self**expo for positive constant term; expo is a Jet or scalar."""
        lg = self.log()
        if isinstance(expo, Jet):
            return (expo * lg).exp()
        return (lg * expo).exp()


# -- implicit tau jet and the delta jet ----------------------------------------


def tpow(tau, e):
    """tau**e; a zero-touching tau interval is only valid for e > 0."""
    if isinstance(tau, Interval) and tau.lo <= 0.0:
        return spow_nonneg(tau, e)
    if isinstance(tau, VI):
        touches = tau.lo <= 0.0
        if not np.any(touches):
            return tau.pow(e)
        reg = tau.pow(e)
        nn = tau.pow_nonneg(e)
        return VI(
            np.where(touches, nn.lo, reg.lo), np.where(touches, nn.hi, reg.hi)
        )
    return spow(tau, e)


def delta_scalar(p, sigma, tau):
    """Delta = (tau + sigma)(1 + tau^p)^(-1/p)(1 + sigma^p)^(-1/p), generic."""
    one = 1
    inv_p = one / p
    a0 = spow(one + spow(sigma, p), -inv_p)
    b0 = spow(one + spow_nonneg(tau, p), -inv_p)
    return (tau + sigma) * a0 * b0


def phi_scalar(p, sigma, tau):
    """Fixed-point map for tau: (1+tau^p)^(1/p) * ((1 - A^p)^(1/p) - sigma*a0)."""
    one = 1
    inv_p = one / p
    a0 = spow(one + spow(sigma, p), -inv_p)
    u = one + spow_nonneg(tau, p)
    A = spow(u, -inv_p) - a0
    inner = one - spow(A, p)
    return spow(u, inv_p) * (spow(inner, inv_p) - sigma * a0)


def phi_prime(p, sigma, tau):
    """d/dtau of the fixed-point map (for the convergence precheck)."""
    one = 1
    inv_p = one / p
    a0 = spow(one + spow(sigma, p), -inv_p)
    u = one + spow_nonneg(tau, p)
    t1 = tpow(tau, p - one)
    A = spow(u, -inv_p) - a0
    Ap = spow(A, p)
    inner = one - Ap
    g = spow(inner, inv_p) - sigma * a0
    d_prefix = t1 * spow(u, inv_p - one)
    d_g = t1 * spow(u, -inv_p - one) * spow(A, p - one) * spow(inner, inv_p - one)
    return d_prefix * g + spow(u, inv_p) * d_g


def tau_pow_log(tau, p):
    """Enclosure of tau^p * ln(tau) for tau in [0, 0.36] and p > 1.

    The product extends continuously by 0 at tau = 0; it is decreasing in tau
    on [0, 0.36] (p ln tau + 1 < 0 there for p > 1) and increasing in p, so
    monotone endpoint evaluation is tight.  Scalar types: float, Interval, VI.
    """
    if isinstance(tau, Interval):
        P = p if isinstance(p, Interval) else Interval.point(float(p))
        if tau.hi == 0.0:
            return Interval(0.0, 0.0)
        th = Interval.point(tau.hi)
        lo = (ipow(th, Interval.point(P.lo)) * th.log()).lo
        if tau.lo > 0.0:
            tl = Interval.point(tau.lo)
            hi = (ipow(tl, Interval.point(P.hi)) * tl.log()).hi
        else:
            hi = 0.0
        return Interval(lo, hi)
    if isinstance(tau, VI):
        P = p if isinstance(p, VI) else VI.point(np.asarray(p, dtype=float))
        th = VI.point(np.where(tau.hi > 0.0, tau.hi, 0.5))
        plo = VI.point(P.lo)
        lo = (th.pow(plo) * th.log()).lo
        lo = np.where(tau.hi > 0.0, lo, 0.0)
        tl = VI.point(np.where(tau.lo > 0.0, tau.lo, 0.5))
        phi = VI.point(P.hi)
        hi = (tl.pow(phi) * tl.log()).hi
        hi = np.where(tau.lo > 0.0, hi, 0.0)
        bad = (tau.lo < 0.0) | np.isnan(tau.lo)
        return VI(np.where(bad, np.nan, lo), np.where(bad, np.nan, hi))
    if tau <= 0.0:
        return 0.0
    return tau**p * math.log(tau)


def delta_p_deriv(p, sigma, tau):
    """dDelta/dp along the constraint surface, atom form.

    Valid on zero-touching tau enclosures: every ln(tau) occurrence is folded
    into the bounded product tau^p ln(tau).
    """
    one = 1
    inv_p = one / p
    sp = spow(sigma, p)
    tp_ = spow_nonneg(tau, p)
    t1 = spow_nonneg(tau, p - one)
    s1 = spow(sigma, p - one)
    us = one + sp
    ut = one + tp_
    a0 = spow(us, -inv_p)
    a1 = spow(us, -one - inv_p)
    b0 = spow(ut, -inv_p)
    b1 = spow(ut, -one - inv_p)
    A = b0 - a0
    B = tau * b0 + sigma * a0
    if isinstance(A, Interval) and A.lo <= 0.0:
        raise DomainError(f"A enclosure {A!r} not positive (box too wide)")
    alpha1 = spow(A, p - one)
    beta1 = spow(B, p - one)
    alpha0 = spow(A, p)
    beta0 = spow(B, p)

    La = slog(us)
    Lb = slog(ut)
    tpl = tau_pow_log(tau, p)  # tau^p ln tau
    a0_p = a0 * (La / (p * p) - sp * slog(sigma) / (p * us))
    b0_p = b0 * (Lb / (p * p) - tpl / (p * ut))
    A_p = b0_p - a0_p
    B_p = tau * b0_p + sigma * a0_p

    f_p = alpha0 * slog(A) + p * alpha1 * A_p + beta0 * slog(B) + p * beta1 * B_p
    f_tau = p * b1 * (beta1 - t1 * alpha1)
    if isinstance(f_tau, Interval):
        if f_tau.contains_zero():
            raise SingularConstraint(f"F_tau enclosure {f_tau!r} contains zero")
    tau_p_slope = -f_p / f_tau

    G = tau + sigma
    H = a0 * b0
    dDelta_dp = G * (a0_p * b0 + a0 * b0_p)
    dDelta_dtau = H - G * t1 * b1 * a0
    return dDelta_dp + dDelta_dtau * tau_p_slope


def delta_sigma_derivs(p, sigma, tau):
    """(dDelta/dsigma, d2Delta/dsigma2) along the constraint surface.

    Assembled from the power atoms only, so it stays valid on zero-touching
    tau intervals whenever every tau exponent is positive (p > 2 covers the
    curve-adjacent columns where this matters; elsewhere tau is bounded away
    from zero and any p > 1 works).  Implicit differentiation throughout:
    tau' = -F_sigma/F_tau, tau'' = -(F_ss + 2 F_st tau' + F_tt tau'^2)/F_tau.
    """
    one = 1
    inv_p = one / p
    sp = spow(sigma, p)
    s1 = spow(sigma, p - one)
    s2 = spow(sigma, p - 2)
    tp_ = spow_nonneg(tau, p)
    t1 = spow_nonneg(tau, p - one)
    t2 = tpow(tau, p - 2)
    us = one + sp
    ut = one + tp_
    a0 = spow(us, -inv_p)
    a1 = spow(us, -one - inv_p)
    a2 = spow(us, -2 - inv_p)
    b0 = spow(ut, -inv_p)
    b1 = spow(ut, -one - inv_p)
    b2 = spow(ut, -2 - inv_p)
    A = b0 - a0
    B = tau * b0 + sigma * a0
    if isinstance(A, Interval) and A.lo <= 0.0:
        raise DomainError(f"A enclosure {A!r} not positive (box too wide)")
    alpha1 = spow(A, p - one)
    alpha2 = spow(A, p - 2)
    beta1 = spow(B, p - one)
    beta2 = spow(B, p - 2)

    f_sigma = p * a1 * (s1 * alpha1 + beta1)
    f_tau = p * b1 * (beta1 - t1 * alpha1)
    if isinstance(f_tau, Interval):
        if f_tau.contains_zero():
            raise SingularConstraint(f"F_tau enclosure {f_tau!r} contains zero")
    tau1 = -f_sigma / f_tau

    A_s = s1 * a1
    A_t = -t1 * b1
    B_s = a1
    B_t = b1
    A_ss = (p - one) * s2 * a1 - (p + one) * s1 * s1 * a2
    A_tt = -(p - one) * t2 * b1 + (p + one) * t1 * t1 * b2
    B_ss = -(p + one) * s1 * a2
    B_tt = -(p + one) * t1 * b2

    f_ss = p * (
        (p - one) * alpha2 * A_s * A_s
        + alpha1 * A_ss
        + (p - one) * beta2 * B_s * B_s
        + beta1 * B_ss
    )
    f_st = p * (p - one) * a1 * b1 * (beta2 - alpha2 * s1 * t1)
    f_tt = p * (
        (p - one) * alpha2 * A_t * A_t
        + alpha1 * A_tt
        + (p - one) * beta2 * B_t * B_t
        + beta1 * B_tt
    )
    tau2 = -(f_ss + 2 * f_st * tau1 + f_tt * tau1 * tau1) / f_tau

    G = tau + sigma
    H = a0 * b0
    H_s = -s1 * a1 * b0
    H_t = -t1 * b1 * a0
    H_ss = -A_ss * b0
    H_st = s1 * t1 * a1 * b1
    H_tt = A_tt * a0
    dH = H_s + H_t * tau1
    dds = (one + tau1) * H + G * dH
    dds2 = (
        tau2 * H
        + 2 * (one + tau1) * dH
        + G * (H_ss + 2 * H_st * tau1 + H_tt * tau1 * tau1 + H_t * tau2)
    )
    return dds, dds2


def _f_jet(t: Jet, s: Jet, pj: Jet) -> Jet:
    inv_p = pj.recip()
    neg_inv = -inv_p
    a0 = (s.pow(pj) + 1.0).pow(neg_inv)
    b0 = (t.pow(pj) + 1.0).pow(neg_inv)
    A = b0 - a0
    B = t * b0 + s * a0
    return A.pow(pj) + B.pow(pj) - 1.0


def solve_tau_jet(p_val, s_val, tau0, mi: int, mj: int):
    """Jets (tau, sigma, p) at the point/box, tau transported through F = 0.

    tau0 must enclose (or equal) the root of F(., s_val, p_val); its scalar
    type dictates the arithmetic.  Raises SingularConstraint when F_tau is
    zero or its enclosure contains zero.
    """
    ftau = f_tau_scalar(p_val, s_val, tau0)
    if isinstance(ftau, Interval):
        if ftau.contains_zero():
            raise SingularConstraint(f"F_tau enclosure {ftau!r} contains zero")
    elif isinstance(ftau, np.ndarray):
        if np.any(np.abs(ftau) < 1e-12):
            raise SingularConstraint("F_tau vanishes in sample")
    elif abs(ftau) < 1e-12:
        raise SingularConstraint(f"F_tau = {ftau} below tolerance")

    s = Jet.var_sigma(s_val, mi, mj)
    pj = Jet.var_p(p_val, mi, mj)
    t = Jet.const(tau0, mi, mj)
    idx = _indices(mi, mj)
    for degree in range(1, mi + mj + 1):
        level = [ij for ij in idx if sum(ij) == degree]
        if not level:
            continue
        F = _f_jet(t, s, pj)
        for ij in level:
            k = idx.index(ij)
            t.c[k] = -F.c[k] / ftau
    return t, s, pj


def delta_jet(t: Jet, s: Jet, pj: Jet) -> Jet:
    """(tau + sigma)(1 + tau^p)^(-1/p)(1 + sigma^p)^(-1/p) as a jet."""
    neg_inv = -pj.recip()
    a0 = (s.pow(pj) + 1.0).pow(neg_inv)
    b0 = (t.pow(pj) + 1.0).pow(neg_inv)
    return (t + s) * a0 * b0
