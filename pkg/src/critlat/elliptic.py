"""Complexified critical lattices and their dynamics: multiplier actions,
Eisenstein-type invariants, the Weierstrass curve model, and the doubling
(Lattes) map on x-coordinates.

Eisenstein sums c_n = sum' alpha^(-2n) are truncated over a disk; the tail is
controlled by integral comparison with the lattice covolume and a covering
radius correction, so every reported value carries an explicit bound.  The
disk is symmetric, so lattice symmetries cancel exactly in the partial sums
(the hexagonal lattice's c_2 vanishes to rounding noise long before the tail
bound says so).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .moduli import Lattice2

__all__ = [
    "ComplexLattice",
    "EisensteinSum",
    "EllipticCurve",
    "MultiplierAction",
    "DegenerateLattice",
    "ExponentTooSmall",
    "NotAMultiplier",
    "DegenerateCurve",
    "OrbitHitSingularity",
    "INFINITY",
    "complexify",
    "covolume",
    "covering_radius_bound",
    "lattice_points",
    "tail_bound",
    "eisenstein",
    "weierstrass_curve",
    "multiplier_check",
    "z_action_orbit",
    "weierstrass_p",
    "lattes_step",
    "lattes_derivative",
    "orbit_stats",
]

INFINITY = complex(math.inf, 0.0)

_MAX_POINTS = 4e7


class DegenerateLattice(Exception):
    pass


class ExponentTooSmall(Exception):
    """Eisenstein sums need exponent 2n > 2 for absolute convergence."""


class NotAMultiplier(Exception):
    pass


class DegenerateCurve(Exception):
    pass


class OrbitHitSingularity(Exception):
    pass


@dataclass(frozen=True)
class ComplexLattice:
    omega1: complex
    omega2: complex

    def __post_init__(self):
        if covolume(self) == 0.0:
            raise DegenerateLattice(
                f"basis {self.omega1}, {self.omega2} has real ratio"
            )


@dataclass(frozen=True)
class EisensteinSum:
    n: int
    value: complex
    radius: float
    tail: float
    terms: int


@dataclass(frozen=True)
class EllipticCurve:
    g2: complex
    g3: complex
    discriminant: complex
    g2_err: float
    g3_err: float


@dataclass(frozen=True)
class MultiplierAction:
    lattice: ComplexLattice
    lam: complex
    matrix: tuple[tuple[int, int], tuple[int, int]]


def is_infinity(x: complex) -> bool:
    return cmath.isinf(x)


def covolume(L: ComplexLattice | None = None, *, omega1=None, omega2=None) -> float:
    if L is not None:
        omega1, omega2 = L.omega1, L.omega2
    return abs((omega1.conjugate() * omega2).imag)


def complexify(L: Lattice2) -> ComplexLattice:
    """(x, y) -> x + iy on both basis vectors, swapped so Im(w2/w1) > 0."""
    w1 = complex(*L.omega1)
    w2 = complex(*L.omega2)
    cross = (w1.conjugate() * w2).imag
    if cross == 0.0:
        raise DegenerateLattice(f"lattice {L} collapses on complexification")
    if cross < 0.0:
        w1, w2 = w2, w1
    return ComplexLattice(omega1=w1, omega2=w2)


def covering_radius_bound(L: ComplexLattice) -> float:
    # every point of the plane is within half a cell diagonal of the lattice
    return 0.5 * max(abs(L.omega1 + L.omega2), abs(L.omega1 - L.omega2))


def lattice_points(L: ComplexLattice, radius: float) -> np.ndarray:
    """All nonzero lattice points with |alpha| <= radius (complex array)."""
    w1, w2 = L.omega1, L.omega2
    cov = covolume(L)
    jmax = int(radius * abs(w2) / cov) + 2
    kmax = int(radius * abs(w1) / cov) + 2
    if (2 * jmax + 1) * (2 * kmax + 1) > _MAX_POINTS:
        raise ValueError(
            f"radius {radius} needs ~{(2 * jmax + 1) * (2 * kmax + 1):.2g} "
            "candidate points; loosen the target accuracy"
        )
    j = np.arange(-jmax, jmax + 1)
    k = np.arange(-kmax, kmax + 1)
    J, K = np.meshgrid(j, k, indexing="ij")
    alpha = J * w1 + K * w2
    mask = (np.abs(alpha) <= radius) & ~((J == 0) & (K == 0))
    return alpha[mask]


def tail_bound(L: ComplexLattice, radius: float, two_n: float) -> float:
    """Upper bound for sum over |alpha| > radius of |alpha|^(-two_n).

    Integral comparison: each point owns a cell of area covol within the
    covering radius rho of it, so the tail is at most
    (2 pi / covol) [ (R-2rho)^(2-2n)/(2n-2) + rho (R-2rho)^(1-2n)/(2n-1) ],
    valid for radius > 2 rho and two_n > 2.
    """
    if two_n <= 2.0:
        raise ExponentTooSmall(f"exponent {two_n} <= 2 diverges")
    rho = covering_radius_bound(L)
    s = radius - 2.0 * rho
    if s <= 0.0:
        return math.inf
    cov = covolume(L)
    return (2.0 * math.pi / cov) * (
        s ** (2.0 - two_n) / (two_n - 2.0) + rho * s ** (1.0 - two_n) / (two_n - 1.0)
    )


def eisenstein(L: ComplexLattice, n: int, target: float = 1e-6) -> EisensteinSum:
    """c_n = sum over nonzero lattice points of alpha^(-2n), to a tail bound
    <= target.  Lemma threshold: needs n >= 2 (exponent 2n > 2)."""
    if n < 2:
        raise ExponentTooSmall(f"n = {n}: the sum needs exponent 2n > 2")
    if target <= 0.0:
        raise ValueError("target accuracy must be positive")
    rho = covering_radius_bound(L)
    radius = max(8.0 * rho, 4.0)
    while tail_bound(L, radius, 2 * n) > target:
        radius *= 1.5
        # lattice_points raises once the point count gets absurd
        if radius > 1e9:
            raise ValueError("unreachable target accuracy")
    pts = lattice_points(L, radius)
    value = complex(np.sum(pts ** (-2 * n)))
    return EisensteinSum(
        n=n,
        value=value,
        radius=radius,
        tail=tail_bound(L, radius, 2 * n),
        terms=int(pts.size),
    )


def weierstrass_curve(L: ComplexLattice, target: float = 6e-3) -> EllipticCurve:
    """y^2 = 4x^3 - 60 c_2 x - 140 c_3 with g2 = 60 c_2 and g3 = 140 c_3
    accurate to `target` (split across the two sums)."""
    c2 = eisenstein(L, 2, target=target / 120.0)
    c3 = eisenstein(L, 3, target=target / 280.0)
    g2 = 60.0 * c2.value
    g3 = 140.0 * c3.value
    g2_err = 60.0 * c2.tail
    g3_err = 140.0 * c3.tail
    disc = g2**3 - 27.0 * g3**2
    # first-order error propagation into the discriminant
    disc_err = 3.0 * (abs(g2) + g2_err) ** 2 * g2_err + 54.0 * (abs(g3) + g3_err) * g3_err
    if abs(disc) <= disc_err:
        raise DegenerateCurve(
            f"discriminant {disc} below its error bound {disc_err}"
        )
    return EllipticCurve(g2=g2, g3=g3, discriminant=disc, g2_err=g2_err, g3_err=g3_err)


def multiplier_check(
    L: ComplexLattice, lam: complex, tol: float = 1e-9
) -> MultiplierAction:
    """Accept lam iff (lam w1, lam w2) = M (w1, w2) for an integer matrix M."""
    w = np.array([[L.omega1.real, L.omega2.real], [L.omega1.imag, L.omega2.imag]])
    rows = []
    scale = max(abs(L.omega1), abs(L.omega2)) * max(1.0, abs(lam))
    for wi in (L.omega1, L.omega2):
        target = lam * wi
        ab = np.linalg.solve(w, np.array([target.real, target.imag]))
        m = np.rint(ab)
        resid = abs(target - (m[0] * L.omega1 + m[1] * L.omega2))
        if resid > tol * scale:
            raise NotAMultiplier(
                f"lambda = {lam}: coefficients {ab} are {resid:.3g} from integers"
            )
        rows.append((int(m[0]), int(m[1])))
    return MultiplierAction(lattice=L, lam=lam, matrix=(rows[0], rows[1]))


def z_action_orbit(
    action: MultiplierAction, omega: tuple[int, int], n: int
) -> list[tuple[int, int]]:
    """Orbit omega, lam*omega, ..., lam^n*omega in integer coordinates."""
    (m11, m12), (m21, m22) = action.matrix
    j, k = omega
    out = [(j, k)]
    for _ in range(n):
        j, k = m11 * j + m21 * k, m12 * j + m22 * k
        out.append((j, k))
    return out


# -- Weierstrass p-function oracle ----------------------------------------------


def weierstrass_p(L: ComplexLattice, z: complex, target: float = 1e-8) -> complex:
    """p(z) by the defining series 1/z^2 + sum'((z+alpha)^-2 - alpha^-2).

    Summed over a symmetric disk, so the +-alpha pairing is exact and the
    tail behaves like |z|^2 |alpha|^-4; the radius is chosen from that bound.
    """
    rho = covering_radius_bound(L)
    az = abs(z)
    radius = max(8.0 * rho, 4.0 * az, 4.0)

    def p_tail(R: float) -> float:
        if R <= 2.0 * az:
            return math.inf
        q = 1.0 - (az / R) ** 2
        pair_const = 2.0 * az**2 * (3.0 + (az / R) ** 2) / q**2
        return pair_const * tail_bound(L, R, 4.0)

    while p_tail(radius) > target:
        radius *= 1.5
        if radius > 1e7:
            raise ValueError("unreachable target accuracy for p(z)")
    pts = lattice_points(L, radius)
    terms = 1.0 / (z + pts) ** 2 - 1.0 / pts**2
    return 1.0 / z**2 + complex(np.sum(terms))


# -- the doubling (Lattes) map ---------------------------------------------------


def lattes_step(E: EllipticCurve, x: complex) -> complex:
    """x-coordinate doubling for y^2 = 4x^3 - g2 x - g3: a degree-4 rational
    map, total on the extended plane (poles and infinity map to infinity)."""
    if is_infinity(x):
        return INFINITY
    g2, g3 = E.g2, E.g3
    den = 4.0 * x**3 - g2 * x - g3
    num = x**4 + 0.5 * g2 * x**2 + 2.0 * g3 * x + g2**2 / 16.0
    if den == 0:
        return INFINITY
    v = num / den
    if cmath.isinf(v) or cmath.isnan(v):
        return INFINITY
    return v


def lattes_derivative(E: EllipticCurve, x: complex) -> complex:
    """d/dx of the doubling map at a finite regular point."""
    g2, g3 = E.g2, E.g3
    den = 4.0 * x**3 - g2 * x - g3
    num = x**4 + 0.5 * g2 * x**2 + 2.0 * g3 * x + g2**2 / 16.0
    dnum = 4.0 * x**3 + g2 * x + 2.0 * g3
    dden = 12.0 * x**2 - g2
    return (dnum * den - num * dden) / den**2


def _sphere_log_deriv(E: EllipticCurve, x: complex) -> tuple[float, complex]:
    """(log of the spherical derivative at x, image point)."""
    g2, g3 = E.g2, E.g3
    if is_infinity(x):
        # chart w = 1/x: the induced germ is w -> 4w + O(w^2)
        return math.log(4.0), INFINITY
    den = 4.0 * x**3 - g2 * x - g3
    num = x**4 + 0.5 * g2 * x**2 + 2.0 * g3 * x + g2**2 / 16.0
    if den == 0:
        # simple pole: spherical derivative (1+|x|^2)/|residue|
        dden = 12.0 * x**2 - g2
        if dden == 0 or num == 0:
            raise OrbitHitSingularity(f"degenerate pole at {x}")
        c = num / dden
        return math.log((1.0 + abs(x) ** 2) / abs(c)), INFINITY
    fx = num / den
    fp = lattes_derivative(E, x)
    if fp == 0:
        raise OrbitHitSingularity(f"critical point hit exactly at {x}")
    sd = abs(fp) * (1.0 + abs(x) ** 2) / (1.0 + abs(fx) ** 2)
    if not (sd > 0.0 and math.isfinite(sd)):
        raise OrbitHitSingularity(f"non-finite spherical derivative at {x}")
    return math.log(sd), fx


def orbit_stats(E: EllipticCurve, z0: complex, n: int) -> tuple[list[complex], float]:
    """Iterate the doubling map n times from x = z0, accumulating the mean
    log spherical derivative (empirical Lyapunov exponent).

    Returns (orbit sample, mean); the sample keeps every 50th point plus the
    endpoints.  Needs n >= 100 for the mean to be meaningful.
    """
    if n < 100:
        raise ValueError("orbit statistics need n >= 100")
    x = z0
    total = 0.0
    sample = [x]
    for k in range(n):
        step_log, x = _sphere_log_deriv(E, x)
        total += step_log
        if (k + 1) % 50 == 0:
            sample.append(x)
    if sample[-1] != x:
        sample.append(x)
    return sample, total / n
