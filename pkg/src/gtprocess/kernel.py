"""Correlation kernel of the uniform Gelfand-Tsetlin measure with fixed top row.

Two evaluation paths are provided.

``ktilde_exact`` evaluates the finite sum over top-row entries in exact
rational arithmetic.  The ``(n-s)``-th derivative of the Lagrange-type
product is an elementary symmetric polynomial, so no cancellation can occur.

``jn_quadrature`` evaluates the equivalent double contour integral

    J = (2 pi i)^-2  oint dw oint dz  (z-u)^(n-r-1) prod(w-x_i)
                                     / ((w-z) (w-v)^(n-s+1) prod(z-x_i))

with the trapezoid rule on two circles, in the log domain.  It is the route
for large ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .errors import ContourError, DegenerateError, DomainError, NonConvergedError, SizeError
from .measure import TopRow

__all__ = [
    "ParticleCoord", "ContourSpec", "phi", "ktilde_exact", "kernel",
    "jn_quadrature", "kernel_quadrature", "choose_contours", "expected_count",
    "N_EXACT",
]

N_EXACT = 40
ATOM_TOL = 1e-12


@dataclass(frozen=True)
class ParticleCoord:
    """Position ``u`` on row ``r`` of the pattern."""

    u: float
    r: int

    def check(self, n: int):
        if not (1 <= self.r <= n - 1):
            raise DomainError(f"row {self.r} outside 1..{n - 1}")


@dataclass(frozen=True)
class ContourSpec:
    """Inner circle (``z``, around the top-row entries above ``u``) and outer circle (``w``)."""

    inner_center: float
    inner_radius: float
    outer_center: float
    outer_radius: float
    points: int = 512


def phi(r: int, s: int, u: float, v: float) -> float:
    """Indicator term subtracted from the kernel."""
    if not v > u or s <= r:
        return 0.0
    if s == r + 1:
        return 1.0
    return (v - u) ** (s - r - 1) / math.factorial(s - r - 1)


def _check_args(x: TopRow, p: ParticleCoord, q: ParticleCoord):
    n = x.n
    if n < 2:
        raise DomainError("need n >= 2")
    p.check(n)
    q.check(n)
    if np.any(np.abs(x.values - p.u) < ATOM_TOL):
        raise DegenerateError("u coincides with a top-row entry")


def ktilde_exact(x: TopRow, p: ParticleCoord, q: ParticleCoord, max_n: int = N_EXACT) -> float:
    """First term of the kernel, evaluated in exact rational arithmetic.

    The float inputs are converted to the rationals they represent, so the
    only rounding is the final conversion back to float.
    """
    _check_args(x, p, q)
    n = x.n
    if n > max_n:
        raise SizeError(f"n = {n} exceeds the exact-path limit {max_n}")
    r, s = p.r, q.r
    X = [Fraction(float(a)) for a in x.values]
    U = Fraction(float(p.u))
    V = Fraction(float(q.u))
    y = [V - a for a in X]
    k = s - 1
    # elementary symmetric polynomials of all of y
    e = [Fraction(1)] + [Fraction(0)] * n
    for yi in y:
        for m in range(n, 0, -1):
            e[m] += e[m - 1] * yi
    fac = Fraction(math.factorial(n - s), math.factorial(n - r - 1))
    total = Fraction(0)
    for j in range(n):
        if not X[j] > U:
            continue
        # e_k of y with y_j removed: e'_m = e_m - y_j e'_(m-1)
        ek = Fraction(1)
        for m in range(1, k + 1):
            ek = e[m] - y[j] * ek
        den = Fraction(1)
        for i in range(n):
            if i != j:
                den *= X[j] - X[i]
        total += (X[j] - U) ** (n - r - 1) * ek / den
    return float(fac * total)


def kernel(x: TopRow, p: ParticleCoord, q: ParticleCoord, method: str = "auto",
           max_n: int = N_EXACT) -> float:
    """``K_n((u, r), (v, s))``.

    ``method`` is ``"exact"``, ``"quadrature"`` or ``"auto"`` (exact up to
    ``max_n``, quadrature above).
    """
    if method == "auto":
        method = "exact" if x.n <= max_n else "quadrature"
    if method == "exact":
        return ktilde_exact(x, p, q, max_n) - phi(p.r, q.r, p.u, q.u)
    if method == "quadrature":
        return kernel_quadrature(x, p, q)
    raise DomainError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# contour integral


def _log_g(z, x, u, r):
    n = x.size
    return (n - r - 1) * np.log(z - u) - np.sum(np.log(z[:, None] - x), axis=1)


def _log_f(w, x, v, s):
    n = x.size
    return np.sum(np.log(w[:, None] - x), axis=1) - (n - s + 1) * np.log(w - v)


def _circle(c, rad, N, phase=0.0):
    th = 2.0 * np.pi * (np.arange(N) + 0.5 + phase) / N
    e = np.exp(1j * th)
    return c + rad * e, 1j * rad * e * (2.0 * np.pi / N)


def _validate_spec(x, u, v, spec: ContourSpec):
    xv = x.values
    inside = np.abs(xv - spec.inner_center) < spec.inner_radius
    if not np.array_equal(inside, xv > u):
        raise ContourError("inner circle must enclose exactly the entries above u")
    if np.any(np.abs(np.abs(xv - spec.inner_center) - spec.inner_radius) < 1e-14):
        raise ContourError("inner circle passes through a top-row entry")
    far = abs(spec.inner_center - spec.outer_center) + spec.inner_radius
    if not far < spec.outer_radius:
        raise ContourError("outer circle must enclose the inner circle")
    if not abs(v - spec.outer_center) < spec.outer_radius:
        raise ContourError("outer circle must enclose v")


def _double_sum(logF, dw, w, logG, dz, z, chunk=2048):
    """``sum_jk F_j G_k / (w_j - z_k)`` with weights, scaled by exp(-max)."""
    lf = logF + np.log(dw)
    lg = logG + np.log(dz)
    mf = lf.real.max()
    mg = lg.real.max()
    F = np.exp(lf - mf)
    G = np.exp(lg - mg)
    total = 0j
    for i0 in range(0, w.size, chunk):
        blk = 1.0 / (w[i0:i0 + chunk, None] - z[None, :])
        total += F[i0:i0 + chunk] @ (blk @ G)
    return total, mf + mg


def _jn_log(x: TopRow, p: ParticleCoord, q: ParticleCoord, spec: ContourSpec,
            rtol: float, max_points: int, phase: float = 0.0):
    """``J`` as ``(scaled value, log scale)`` with doubling until converged."""
    xv = x.values
    u, r, v, s = p.u, p.r, q.u, q.r
    _validate_spec(x, u, v, spec)
    N = int(spec.points)
    prev = None
    while True:
        z, dz = _circle(spec.inner_center, spec.inner_radius, N, phase)
        w, dw = _circle(spec.outer_center, spec.outer_radius, N, phase)
        val, lscale = _double_sum(_log_f(w, xv, v, s), dw, w, _log_g(z, xv, u, r), dz, z)
        val = val / (2j * np.pi) ** 2
        if prev is not None:
            pv, pl = prev
            diff = abs(val - pv * math.exp(pl - lscale))
            floor = 1e-13 * N
            if diff <= rtol * abs(val) or diff <= floor:
                return val, lscale
        if 2 * N > max_points:
            raise NonConvergedError(f"trapezoid rule not converged at {N} points per circle")
        prev = (val, lscale)
        N *= 2


def jn_quadrature(x: TopRow, p: ParticleCoord, q: ParticleCoord, spec: Optional[ContourSpec] = None,
                  rtol: float = 1e-9, max_points: int = 2 ** 14, phase: float = 0.0) -> complex:
    """The double contour integral ``J`` by the trapezoid rule on two circles."""
    _check_args(x, p, q)
    if spec is None:
        try:
            spec = choose_contours(x, p.u, q.u, p.r, q.r)
        except DegenerateError:
            if np.all(x.values < p.u):
                return 0j
            raise
    val, lscale = _jn_log(x, p, q, spec, rtol, max_points, phase)
    return complex(val * math.exp(lscale)) if lscale < 700 else complex(val) * math.inf


def kernel_quadrature(x: TopRow, p: ParticleCoord, q: ParticleCoord, spec: Optional[ContourSpec] = None,
                      rtol: float = 1e-9, max_points: int = 2 ** 14, return_complex: bool = False):
    """Kernel from the contour integral; factorial ratio applied in the log domain."""
    _check_args(x, p, q)
    n = x.n
    ph = phi(p.r, q.r, p.u, q.u)
    if np.all(x.values < p.u):
        return complex(-ph) if return_complex else -ph
    if spec is None:
        spec = choose_contours(x, p.u, q.u, p.r, q.r)
    val, lscale = _jn_log(x, p, q, spec, rtol, max_points)
    logfac = gammaln(n - q.r + 1) - gammaln(n - p.r)
    out = val * math.exp(lscale + logfac) - ph
    return complex(out) if return_complex else float(out.real)


def choose_contours(x: TopRow, u: float, v: float, r: Optional[int] = None, s: Optional[int] = None,
                    points: int = 512) -> ContourSpec:
    """Circles satisfying the enclosure conditions of the contour integral.

    Without ``r, s`` the inner circle is centred at the midpoint of the
    entries above ``u`` and crosses the axis in the middle of the gap that
    contains ``u``; the outer circle shares its centre with radius 1.5 times
    what is needed to cover the inner circle and ``v``.

    With ``r, s`` a small search picks circles that minimise the largest
    integrand modulus, which keeps cancellation in the trapezoid sum low.
    The optimum sits near the saddle points of the two exponents.
    """
    xv = x.values
    if np.any(np.abs(xv - u) < ATOM_TOL):
        raise DegenerateError("u coincides with a top-row entry")
    above = xv[xv > u]
    below = xv[xv < u]
    if above.size == 0:
        raise DegenerateError("no top-row entries above u: the sum is empty")
    lo_in, hi_in = above.min(), above.max()
    spread = max(xv[0] - xv[-1], abs(u - xv[0]), abs(v - xv[0]), abs(u - xv[-1]), 1e-3)
    if r is None or s is None:
        left = 0.5 * (below.max() + lo_in) if below.size else lo_in - 0.5 * max(hi_in - lo_in, 0.1 * spread)
        c = 0.5 * (lo_in + hi_in)
        rad = c - left
        if rad <= hi_in - c:
            rad = (hi_in - c) + 0.5 * (c - left)
        need = max(rad, abs(v - c))
        return ContourSpec(c, rad, c, 1.5 * need + 0.1 * spread, points)
    return _search_contours(xv, u, v, r, s, spread, below, lo_in, hi_in, points)


def _search_contours(xv, u, v, r, s, spread, below, lo_in, hi_in, points):
    M = 256
    if below.size:
        gap_lo = below.max()
        lefts = [u] + list(gap_lo + (lo_in - gap_lo) * np.array([0.1, 0.25, 0.5, 0.75, 0.9]))
    else:
        lefts = [u] + list(lo_in - spread * np.array([0.02, 0.1, 0.3, 1.0]))
    lefts = [L for L in lefts if L < lo_in and (not below.size or L > below.max())]
    rights = hi_in + spread * np.geomspace(1e-3, 20.0, 28)

    # the outer circle is centred at v, so its cost depends on the radius only
    rmin_all = max(max(abs(L - v) for L in lefts), abs(rights[-1] - v))
    radii = np.geomspace(1e-3 * spread, 2.0 * rmin_all + 20.0 * spread, 120)
    fmax = np.empty(radii.size)
    for i, Rw in enumerate(radii):
        w, dw = _circle(v, Rw, M)
        fmax[i] = np.max((_log_f(w, xv, v, s) + np.log(dw)).real)

    best = None
    for L in lefts:
        for Rz in rights:
            cz, rz = 0.5 * (L + Rz), 0.5 * (Rz - L)
            # too close to an entry for the trapezoid rule to resolve cheaply
            if np.min(np.abs(np.abs(xv - cz) - rz)) / rz < 2e-3:
                continue
            z, dz = _circle(cz, rz, M)
            gmax = np.max((_log_g(z, xv, u, r) + np.log(dz)).real)
            rmin = max(abs(L - v), abs(Rz - v))
            ok = radii > rmin * (1.0 + 2e-3)
            if not np.any(ok):
                continue
            cost = fmax[ok] + gmax - np.log(radii[ok] - rmin)
            i = int(np.argmin(cost))
            if best is None or cost[i] < best[0]:
                best = (float(cost[i]), cz, rz, float(radii[ok][i]))
    if best is None:
        raise ContourError("no admissible contour pair found")
    _, cz, rz, Rw = best
    return ContourSpec(float(cz), float(rz), float(v), float(Rw), points)


# ---------------------------------------------------------------------------
# expected counts


def expected_count(x: TopRow, r: int, interval, quad_points: Optional[int] = None,
                   method: str = "auto", max_n: int = N_EXACT) -> float:
    """Expected number of particles of row ``r`` in ``interval``.

    The diagonal kernel is a polynomial of degree ``n - 2`` between
    consecutive top-row entries and vanishes outside ``[x_n, x_1]``, so
    Gauss-Legendre on panels split at the entries is exact once it has at
    least ``n/2`` nodes per panel.
    """
    n = x.n
    if not (1 <= r <= n - 1):
        raise DomainError(f"row {r} outside 1..{n - 1}")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise DomainError("interval must satisfy lo < hi")
    lo, hi = max(lo, float(x.values[-1])), min(hi, float(x.values[0]))
    if not lo < hi:
        return 0.0
    cuts = [lo] + sorted(float(a) for a in x.values if lo < a < hi) + [hi]
    m = max(int(quad_points or 0), n // 2 + 1)
    nodes, weights = leggauss(m)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        for t, wt in zip(nodes, weights):
            u = mid + half * t
            p = ParticleCoord(u, r)
            total += wt * half * kernel(x, p, p, method=method, max_n=max_n)
    return float(total)
