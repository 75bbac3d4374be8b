"""Root analysis of f' and the liquid / edge / outside decomposition.

For an atomic measure ``mu`` and a point ``(chi, eta)`` the function

    f'(w) = C(w) - (1 - eta) / (w - chi)

is a rational function with simple poles at the atoms and at ``chi``.  All of
its roots are obtained at once as the finite eigenvalues of a small
arrowhead pencil, then polished by Newton's method.  Labels are decided from
that root set:

* ``Liquid``    a root in the open upper half plane,
* ``EdgePlus``  a repeated real root right of ``chi`` (off the support),
* ``EdgeMinus`` a repeated real root left of ``chi`` (off the support),
* ``Edge0``     ``eta = 1`` and ``C(chi) = 0``,
* ``Edge1``     ``chi`` is an atom and ``eta = 1 - mu[{chi}]``,
* ``Outside``   two simple roots in ``(b, inf)`` and no others there,
* ``Other``     anything else.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import (AmbiguousError, ConvergenceError, DegenerateError,
                     DomainError, EpsTooLargeError, NotInRegionError,
                     NotInRError, PoleError)
from .measure import POLE_TOL, AtomicMeasure, cauchy, cauchy_sum

__all__ = [
    "RegionLabel", "RegionPoint", "EdgeLocalGeometry",
    "f_value", "f_prime", "all_roots", "real_roots", "classify",
    "liquid_map", "liquid_inverse", "edge_curve", "edge_curve_derivatives",
    "edge_local_geometry", "outside_map", "outside_inverse",
    "outside_boundary", "outside_tangent", "exponent", "edge_epsilon_bounds",
    "free_compressed_norm", "root_census", "newton_grid_roots",
]

TOL_ROOT = 1e-11
MULT_TOL = 1e-6
CLASSIFY_TOL = 1e-9


class RegionLabel(str, enum.Enum):
    Liquid = "Liquid"
    EdgePlus = "EdgePlus"
    EdgeMinus = "EdgeMinus"
    Edge0 = "Edge0"
    Edge1 = "Edge1"
    Outside = "Outside"
    Other = "Other"


@dataclass(frozen=True)
class RegionPoint:
    """A classified point together with the roots that witness its label."""

    chi: float
    eta: float
    label: RegionLabel
    root: Optional[complex] = None
    repeated_root: Optional[float] = None
    multiplicity: Optional[int] = None
    pair: Optional[tuple] = None

    def witness(self) -> dict:
        out = {}
        if self.root is not None:
            out["root_re"] = self.root.real
            out["root_im"] = self.root.imag
        if self.repeated_root is not None:
            out["repeated_root"] = self.repeated_root
            out["multiplicity"] = self.multiplicity
        if self.pair is not None:
            out["t"], out["s"] = self.pair
        return out


@dataclass(frozen=True)
class EdgeLocalGeometry:
    """Taylor coefficients of the edge curve in the frame ``(x, y)``.

    Near the parameter ``t`` the curve is ``a(s) x + b(s) y`` with
    ``a = a1 h + a2 h^2`` and ``b = b1 h^2 + b2 h^3`` for ``h = s - t``.
    """

    a1: float
    a2: float
    b1: float
    b2: float
    m: int
    x: tuple
    y: tuple
    branch: str


# ---------------------------------------------------------------------------
# f and its derivatives


def _check_real_pole(w, points, what):
    w = complex(w)
    if abs(w.imag) < POLE_TOL and np.any(np.abs(w.real - np.asarray(points)) < POLE_TOL):
        raise PoleError(f"w coincides with {what}")


def f_value(mu: AtomicMeasure, chi: float, eta: float, w) -> complex:
    """``sum alpha log(w - b) - (1 - eta) log(w - chi)`` with principal logs."""
    w = complex(w)
    _check_real_pole(w, mu.positions, "an atom")
    val = np.sum(mu.weights * np.log(w - mu.positions))
    c = 1.0 - eta
    if c != 0.0:
        _check_real_pole(w, [chi], "chi")
        val = val - c * np.log(w - chi)
    return complex(val)


def f_prime(mu: AtomicMeasure, chi: float, eta: float, w, k: int = 1):
    """k-th w-derivative of `f_value`, in closed form from the Cauchy transform."""
    if k < 1:
        raise DomainError("derivative order must be at least 1")
    c = 1.0 - eta
    w_arr = np.asarray(w, dtype=complex)
    if c != 0.0 and np.any(np.abs(w_arr - chi) < POLE_TOL):
        raise PoleError("w coincides with chi")
    out = cauchy(mu, w_arr, k - 1)
    if c != 0.0:
        out = out - c * (-1.0) ** (k - 1) * math.factorial(k - 1) / (w_arr - chi) ** k
    return complex(out) if np.ndim(out) == 0 else out


def _fp_pf(p, rho, w, k=1):
    """k-th derivative of f' = sum rho/(w - p), i.e. f^(k+1)."""
    return cauchy_sum(p, rho, w, k)


def _partial_fractions(mu, chi, eta):
    """Poles and residues of f'; an atom at chi absorbs the chi term."""
    p = list(mu.positions)
    rho = list(mu.weights)
    c = 1.0 - eta
    if c != 0.0:
        hit = np.flatnonzero(mu.positions == chi)
        if hit.size:
            rho[int(hit[0])] -= c
        else:
            p.append(float(chi))
            rho.append(-c)
    p = np.array(p)
    rho = np.array(rho)
    keep = np.abs(rho) > 1e-15
    p, rho = p[keep], rho[keep]
    order = np.argsort(p)
    return p[order], rho[order]


# ---------------------------------------------------------------------------
# root finding


def _pencil_roots(p, rho):
    """Finite roots of sum rho_j/(w - p_j) as generalised eigenvalues."""
    m = p.size
    if m < 2:
        return np.zeros(0, dtype=complex)
    c0 = 0.5 * (p.max() + p.min())
    sc = max(0.5 * (p.max() - p.min()), 1e-300)
    q = (p - c0) / sc
    A = np.zeros((m + 1, m + 1))
    A[:m, :m] = np.diag(q)
    A[:m, m] = 1.0
    A[m, :m] = rho
    B = np.eye(m + 1)
    B[m, m] = 0.0
    lam = scipy.linalg.eigvals(A, B)
    lam = lam[np.isfinite(lam) & (np.abs(lam) < 1e13)]
    return c0 + sc * lam


def _polish(p, rho, w, iters=40):
    """Newton refinement of a root of f'; never moves far from the start."""
    w0 = complex(w)
    r0 = abs(_fp_pf(p, rho, w0, 0))
    best, rbest = w0, r0
    for _ in range(iters):
        f1 = _fp_pf(p, rho, w, 0)
        f2 = _fp_pf(p, rho, w, 1)
        if f2 == 0:
            break
        step = f1 / f2
        w = w - step
        r = abs(_fp_pf(p, rho, w, 0))
        if r < rbest:
            best, rbest = w, r
        if abs(step) <= 4e-16 * (1.0 + abs(w)):
            break
    scale = 1.0 + abs(w0)
    if abs(best - w0) > 1e-6 * scale:
        return w0
    return complex(best)


def all_roots(mu: AtomicMeasure, chi: float, eta: float) -> np.ndarray:
    """Every root of f' (with multiplicity), polished.

    Spurious eigenvalues with a large relative residual are dropped.
    """
    p, rho = _partial_fractions(mu, chi, eta)
    out = []
    for w in _pencil_roots(p, rho):
        if np.any(np.abs(w - p) < POLE_TOL):
            continue
        w = _polish(p, rho, w)
        terms = np.sum(np.abs(rho / (w - p)))
        if abs(_fp_pf(p, rho, w, 0)) <= 1e-8 * max(terms, 1e-300):
            out.append(w)
    return np.array(out, dtype=complex)


def _spread(mu, chi):
    return max(mu.b - mu.a, abs(chi - mu.a), abs(chi - mu.b))


def _cluster_radius(mu, chi, tol):
    return max(1e-3, 30.0 * math.sqrt(tol)) * _spread(mu, chi)


def _critical_point(p, rho, x0, radius):
    """Real root of f'' near x0, by Newton on f'' that may not cross a pole."""
    x = float(x0)
    left = p[p < x]
    right = p[p > x]
    lo = left.max() if left.size else -np.inf
    hi = right.min() if right.size else np.inf
    for _ in range(80):
        f2 = _fp_pf(p, rho, x, 1).real
        f3 = _fp_pf(p, rho, x, 2).real
        if f3 == 0:
            return None
        step = f2 / f3
        xn = x - step
        if not (lo < xn < hi) or abs(xn - x0) > 2 * radius:
            return None
        x = xn
        if abs(step) <= 4e-16 * (1.0 + abs(x)):
            break
    return x


def _multiplicity_at(p, rho, x, spread):
    """2 or 3 by the scaled third-derivative test."""
    f3 = abs(_fp_pf(p, rho, x, 2))
    f4 = abs(_fp_pf(p, rho, x, 3))
    return 3 if f3 < MULT_TOL * f4 * spread else 2


def _repeated_real_roots(mu, chi, eta, roots, tol):
    """Repeated real roots of f' within ``tol`` (in (chi, eta) units)."""
    p, rho = _partial_fractions(mu, chi, eta)
    rad = _cluster_radius(mu, chi, tol)
    spread = _spread(mu, chi)
    found = []
    for w in roots:
        if abs(w.imag) > rad:
            continue
        x = _critical_point(p, rho, w.real, rad)
        if x is None or np.any(np.abs(x - mu.positions) <= POLE_TOL):
            continue
        if any(abs(x - y) <= rad for y, _ in found):
            continue
        d = abs(_fp_pf(p, rho, x, 0)) * abs(x - chi)
        if d <= tol:
            found.append((x, _multiplicity_at(p, rho, x, spread)))
    return found


def _split_roots(mu, chi, eta, tol):
    """Roots split into repeated real, simple real and non-real parts."""
    roots = all_roots(mu, chi, eta)
    reps = _repeated_real_roots(mu, chi, eta, roots, tol)
    rad = _cluster_radius(mu, chi, tol)
    tau = 1e-10 * _spread(mu, chi)
    simple, nonreal = [], []
    for w in roots:
        if any(abs(w - x) <= rad for x, _ in reps) and abs(w.imag) <= rad:
            continue
        if abs(w.imag) <= tau:
            simple.append(w.real)
        else:
            nonreal.append(w)
    return reps, sorted(simple), nonreal


def _refine_simple(mu, chi, eta, r):
    p, rho = _partial_fractions(mu, chi, eta)
    h = 1e-9 * (1.0 + abs(r))
    g = lambda x: _fp_pf(p, rho, x, 0).real
    for _ in range(6):
        lo, hi = r - h, r + h
        if np.any((p > lo) & (p < hi)):
            break
        glo, ghi = g(lo), g(hi)
        if glo == 0:
            return lo
        if ghi == 0:
            return hi
        if np.sign(glo) != np.sign(ghi):
            return brentq(g, lo, hi, xtol=1e-15 * (1.0 + abs(r)), rtol=1e-15)
        h *= 10
    return r


def real_roots(mu: AtomicMeasure, chi: float, eta: float, interval, tol: float = CLASSIFY_TOL):
    """Real roots of f' in the open ``interval`` with their multiplicities.

    Simple roots are bracketed by a sign change and refined with Brent's
    method; repeated roots are located as critical points of f' where f'
    vanishes to within ``tol``.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise DomainError("interval must satisfy lo < hi")
    reps, simple, _ = _split_roots(mu, chi, eta, tol)
    out = [(x, m) for x, m in reps if lo < x < hi]
    for r in simple:
        if lo < r < hi:
            r = _refine_simple(mu, chi, eta, r)
            if abs(f_prime(mu, chi, eta, r)) > 1e3 * TOL_ROOT * (1 + abs(r)):
                raise ConvergenceError(f"root refinement stalled near {r!r}")
            out.append((float(r), 1))
    return sorted(out)


def newton_grid_roots(mu: AtomicMeasure, chi: float, eta: float, nx: int = 41, ny: int = 21,
                      tol_root: float = TOL_ROOT, iters: int = 60):
    """Roots of f' in the closed upper half plane from a seed grid, with deflation.

    Seeds cover ``[a-1, b+1] x [1e-3, b-a]``.  Each Newton run works on f'
    divided by the product of ``(w - r)`` over roots already found, so that a
    root is not found twice.  Used as an independent cross-check of
    `all_roots`; it can miss roots far outside the seed rectangle.
    """
    p, rho = _partial_fractions(mu, chi, eta)
    xs = np.linspace(mu.a - 1.0, mu.b + 1.0, nx)
    ys = np.linspace(1e-3, mu.b - mu.a, ny)
    found: list = []
    for y in ys:
        for x in xs:
            w = complex(x, y)
            ok = False
            for _ in range(iters):
                f1 = _fp_pf(p, rho, w, 0)
                f2 = _fp_pf(p, rho, w, 1)
                # Newton on g = f1 / prod(w - r): g/g' = 1/(f2/f1 - sum 1/(w - r))
                if f1 == 0:
                    ok = True
                    break
                denom = f2 / f1 - sum(1.0 / (w - r) for r in found)
                if denom == 0:
                    break
                step = 1.0 / denom
                w = w - step
                if not np.isfinite(w) or abs(w) > 1e8:
                    break
                if abs(step) < 1e-14 * (1 + abs(w)):
                    ok = True
                    break
            if ok and abs(_fp_pf(p, rho, w, 0)) < tol_root * (1 + abs(w)) and w.imag >= -1e-12:
                if all(abs(w - r) > 1e-8 for r in found):
                    found.append(w)
    return found


# ---------------------------------------------------------------------------
# classification


def _validate_point(mu, chi, eta):
    slack = 1e-12
    if not (mu.a - slack <= chi <= mu.b + slack and -slack <= eta <= 1 + slack):
        raise DomainError("(chi, eta) must lie in [a, b] x [0, 1]")


NEGLIGIBLE_WEIGHT = 1e-15


def _drop_negligible(mu: AtomicMeasure) -> AtomicMeasure:
    """Remove atoms lighter than ``NEGLIGIBLE_WEIGHT``; each adds a spurious root of f'."""
    keep = mu.weights >= NEGLIGIBLE_WEIGHT
    if keep.all():
        return mu
    w = mu.weights[keep]
    return AtomicMeasure(mu.positions[keep], w / w.sum())


def classify(mu: AtomicMeasure, chi: float, eta: float, tol: float = CLASSIFY_TOL) -> RegionPoint:
    """Label ``(chi, eta)`` and attach the witnessing roots.

    ``tol`` is measured in ``(chi, eta)`` units: a real critical point ``x``
    of f' with ``|f'(x)| |x - chi| <= tol`` counts as a repeated root.
    `AmbiguousError` is raised when two different boundary conditions hold
    within ``tol`` at once.
    """
    chi, eta = float(chi), float(eta)
    mu = _drop_negligible(mu)
    _validate_point(mu, chi, eta)
    conditions = []

    i = mu.atom_index(chi, tol)
    if i is not None and abs(eta - (1.0 - mu.weights[i])) <= tol:
        conditions.append(RegionPoint(chi, eta, RegionLabel.Edge1, repeated_root=float(mu.positions[i]),
                                      multiplicity=None))
    if abs(eta - 1.0) <= tol and i is None:
        c0 = cauchy(mu, chi).real
        c1 = cauchy(mu, chi, 1).real
        if abs(c0 / c1) <= tol:
            conditions.append(RegionPoint(chi, eta, RegionLabel.Edge0, repeated_root=chi, multiplicity=1))

    reps, simple, nonreal = _split_roots(mu, chi, eta, tol)
    for x, m in reps:
        label = RegionLabel.EdgePlus if x > chi else RegionLabel.EdgeMinus
        conditions.append(RegionPoint(chi, eta, label, repeated_root=float(x), multiplicity=m))

    if len(conditions) > 1:
        names = ", ".join(c.label.value for c in conditions)
        raise AmbiguousError(f"({chi!r}, {eta!r}) satisfies several boundary conditions: {names}")
    if conditions:
        return conditions[0]

    upper = [w for w in nonreal if w.imag > 0]
    if upper:
        if len(upper) > 1:
            raise ConvergenceError("found more than one root in the upper half plane")
        return RegionPoint(chi, eta, RegionLabel.Liquid, root=complex(upper[0]))

    b = mu.b
    if (mu.a < chi < b and 0.0 < eta < 1.0 and 1.0 - eta > mu.mass_at(chi, tol) + tol):
        beyond = [r for r in simple if r > b]
        if len(beyond) == 2:
            s, t = (_refine_simple(mu, chi, eta, r) for r in beyond)
            f2t = f_prime(mu, chi, eta, t, 2).real
            f2s = f_prime(mu, chi, eta, s, 2).real
            if t > s > b and f2t > 0 > f2s:
                return RegionPoint(chi, eta, RegionLabel.Outside, pair=(float(t), float(s)))
    return RegionPoint(chi, eta, RegionLabel.Other)


def root_census(mu: AtomicMeasure, chi: float, eta: float) -> dict:
    """Count roots of f' (with multiplicity) in the sets of the root-count law.

    Intended for interior points with ``1 - eta > mu[{chi}]``.  Returns the
    number of non-real roots, the counts in ``J1 = (b, inf)``,
    ``J2 = (-inf, a)``, ``J3 = (chi, inf S1)`` and ``J4 = (sup S3, chi)``,
    and a list of counts for the remaining gaps ``K``.
    """
    x = mu.positions
    right = x[x > chi]
    left = x[x < chi]
    roots = all_roots(mu, chi, eta)
    tau = 1e-9 * _spread(mu, chi)
    poles = np.unique(np.concatenate([x, [chi]]))
    counts = {"nonreal": 0, "J1": 0, "J2": 0, "J3": 0, "J4": 0}
    gaps = {}
    for w in roots:
        if abs(w.imag) > tau:
            counts["nonreal"] += 1
            continue
        r = w.real
        if r > mu.b:
            counts["J1"] += 1
        elif r < mu.a:
            counts["J2"] += 1
        elif right.size and chi < r < right.min():
            counts["J3"] += 1
        elif left.size and left.max() < r < chi:
            counts["J4"] += 1
        else:
            k = int(np.searchsorted(poles, r))
            gaps[k] = gaps.get(k, 0) + 1
    counts["K"] = [gaps[k] for k in sorted(gaps)]
    return counts


# ---------------------------------------------------------------------------
# liquid region


def liquid_map(mu: AtomicMeasure, w) -> tuple:
    """``(chi_L(w), eta_L(w))`` for ``w`` in the upper half plane."""
    w = complex(w)
    if not w.imag > 0:
        raise DomainError("w must lie in the open upper half plane")
    c = cauchy(mu, w)
    cb = c.conjugate()
    dc = c - cb
    if abs(dc) < 1e-14:
        raise DegenerateError("C(w) equals C(conj w) to machine precision")
    dw = w - w.conjugate()
    chi = w + cb * dw / dc
    eta = 1.0 + c * cb * dw / dc
    return float(chi.real), float(eta.real)


def liquid_inverse(mu: AtomicMeasure, chi: float, eta: float, tol: float = CLASSIFY_TOL) -> complex:
    """The root of f' in the upper half plane, for a liquid point."""
    try:
        pt = classify(mu, chi, eta, tol)
    except AmbiguousError as exc:
        raise NotInRegionError(str(exc)) from exc
    if pt.label is not RegionLabel.Liquid:
        raise NotInRegionError(f"({chi}, {eta}) is {pt.label.value}, not Liquid")
    return pt.root


# ---------------------------------------------------------------------------
# edge curve


def edge_curve(mu: AtomicMeasure, t: float) -> tuple:
    """``(chi_E(t), eta_E(t), branch)`` with branch in ``R+, R-, R0, R1``.

    Off the support the curve is evaluated as a convex combination of the
    atoms with weights ``alpha_i / (t - b_i)^2``, which stays accurate both
    next to atoms and for large ``|t|``.
    """
    t = float(t)
    if not math.isfinite(t):
        raise NotInRError(f"edge parameter {t!r} is not a finite real")
    i = mu.atom_index(t, POLE_TOL)
    if i is not None:
        # every atom of a finitely atomic measure is isolated
        return float(mu.positions[i]), 1.0 - float(mu.weights[i]), "R1"
    d = t - mu.positions
    dmin = np.min(np.abs(d))
    u = dmin / d                       # scaled 1/(t - b_i), |u| <= 1
    wts = mu.weights * u * u
    s1 = np.sum(mu.weights * u)
    s2 = np.sum(wts)
    chi = float(np.dot(wts, mu.positions) / s2)
    eta = float(1.0 - s1 * s1 / s2)
    c = float(np.sum(mu.weights / d))
    c_scale = float(np.sum(mu.weights / np.abs(d)))
    if abs(c) <= 1e-14 * c_scale:
        branch = "R0"
        chi, eta = t, 1.0
    else:
        branch = "R+" if c > 0 else "R-"
    return chi, eta, branch


def edge_curve_derivatives(mu: AtomicMeasure, t: float) -> tuple:
    """``(chi_E', chi_E'', eta_E')`` at an off-support ``t``."""
    c0, c1, c2, c3 = (cauchy(mu, t, k).real for k in range(4))
    d1 = 2.0 - c2 * c0 / c1 ** 2
    d2 = -(c3 * c0 + c2 * c1) / c1 ** 2 + 2.0 * c2 ** 2 * c0 / c1 ** 3
    return d1, d2, d1 * c0


def edge_local_geometry(mu: AtomicMeasure, t: float) -> EdgeLocalGeometry:
    """Local parabola / cusp coefficients of the edge curve at parameter ``t``."""
    t = float(t)
    i = mu.atom_index(t, POLE_TOL)
    if i is not None:
        alpha = float(mu.weights[i])
        p, q = mu.without_atom(i)
        g1 = float(np.sum(q / (t - p)))
        g2 = float(-np.sum(q / (t - p) ** 2))
        scale = max(abs(g2) * (mu.b - mu.a), 1e-300)
        m = 1 if abs(g1) < MULT_TOL * scale else 0
        a1, b1 = -2.0 * g1, -g1 / alpha
        if m == 1:
            a1 = b1 = 0.0
        a2 = -3.0 * g2 - g1 * g1 / alpha
        b2 = -2.0 * g2 / alpha
        return EdgeLocalGeometry(a1, a2, b1, b2, m, (0.0, 1.0), (1.0, 0.0), "R1")

    chi, eta, branch = edge_curve(mu, t)
    c0, c1, c2 = (cauchy(mu, t, k).real for k in range(3))
    if branch == "R0":
        return EdgeLocalGeometry(2.0, float("nan"), c1, float("nan"), 1, (1.0, 0.0), (0.0, 1.0), "R0")

    f3 = c2 - 2.0 * c1 ** 2 / c0
    c3 = cauchy(mu, t, 3).real
    # f'''' at the edge point; 1 - eta = -C^2/C', t - chi = -C/C'
    f4 = c3 - 6.0 * c1 ** 3 / c0 ** 2
    spread = max(mu.b - mu.a, abs(t - chi))
    m = 3 if abs(f3) < MULT_TOL * abs(f4) * spread else 2
    k = 1.0 + c0 * c0
    d1, d2, _ = edge_curve_derivatives(mu, t)
    if m == 2:
        a1 = -c0 * f3 / c1 ** 2
        b1 = c0 * f3 / (2.0 * c1 * k)
        a2 = 0.5 * (d2 + d1 * c1 * c0 / k)
        b2 = -(2.0 * d2 * c1 + d1 * c2) / (6.0 * k)
    else:
        a1 = b1 = 0.0
        a2 = -c0 * f4 / (2.0 * c1 ** 2)
        b2 = c0 * f4 / (3.0 * c1 * k)
    return EdgeLocalGeometry(a1, a2, b1, b2, m, (1.0, c0), (c0, -1.0), branch)


# ---------------------------------------------------------------------------
# outside region


def _check_pair(mu, t, s):
    if not (t > s > mu.b):
        raise DomainError("need t > s > b")


def outside_map(mu: AtomicMeasure, t: float, s: float) -> tuple:
    """``(chi_O(t, s), eta_O(t, s))`` for ``t > s > b``."""
    t, s = float(t), float(s)
    _check_pair(mu, t, s)
    ct, cs = cauchy(mu, t).real, cauchy(mu, s).real
    dc = ct - cs
    chi = (t * ct - s * cs) / dc
    eta = 1.0 + ct * cs * (t - s) / dc
    return chi, eta


def outside_inverse(mu: AtomicMeasure, chi: float, eta: float, tol: float = CLASSIFY_TOL) -> tuple:
    """The two simple roots ``t > s`` of f' in ``(b, inf)`` at an outside point."""
    try:
        pt = classify(mu, chi, eta, tol)
    except AmbiguousError as exc:
        raise NotInRegionError(str(exc)) from exc
    if pt.label is not RegionLabel.Outside:
        raise NotInRegionError(f"({chi}, {eta}) is {pt.label.value}, not Outside")
    return pt.pair


def outside_boundary(mu: AtomicMeasure, side: str, param: float) -> tuple:
    """Point on the ``edge``, ``bottom`` or ``right`` boundary piece of the outside region."""
    param = float(param)
    if not param > mu.b:
        raise DomainError("parameter must exceed b")
    if side == "edge":
        chi, eta, _ = edge_curve(mu, param)
        return chi, eta
    c = cauchy(mu, param).real
    if side == "bottom":
        return param - 1.0 / c, 0.0
    if side == "right":
        return mu.b, 1.0 - (param - mu.b) * c
    raise DomainError(f"unknown side {side!r}")


def outside_tangent(mu: AtomicMeasure, t: float, s: float) -> tuple:
    """Coefficients ``(c1, c2)`` of the partial derivatives of the outside map.

    ``d/dt (chi_O, eta_O) = c1 (1, C(s))`` and ``d/ds (chi_O, eta_O) = c2 (1, C(t))``.
    """
    chi, eta = outside_map(mu, t, s)
    ct, cs = cauchy(mu, t).real, cauchy(mu, s).real
    f2t = f_prime(mu, chi, eta, t, 2).real
    f2s = f_prime(mu, chi, eta, s, 2).real
    den = (ct - cs) ** 2
    return -(t - s) * cs * f2t / den, (t - s) * ct * f2s / den


def exponent(mu: AtomicMeasure, chi: float, eta: float, tol: float = CLASSIFY_TOL) -> float:
    """``f(t) - f(s)`` at an outside point; always negative."""
    t, s = outside_inverse(mu, chi, eta, tol)
    return float((f_value(mu, chi, eta, t) - f_value(mu, chi, eta, s)).real)


def edge_epsilon_bounds(mu: AtomicMeasure, theta: float, eps: float, strict: bool = True) -> tuple:
    """Brackets for the outside roots at ``(chi, eta - eps)`` below an edge point.

    ``(chi, eta)`` is the edge point with parameter ``theta > b``.  Returns
    ``(t_lo, t_hi, s_lo, s_hi, exponent_bound)`` with
    ``t in (theta + r, theta + 2r)``, ``s in (theta - 2r, theta - r)`` for
    ``r = sqrt(c eps)``, and the bound ``-(5/6) sqrt(c)/(theta - chi) eps^1.5``
    on the exponent.  With ``strict`` the sufficiency inequalities are checked
    and `EpsTooLargeError` is raised when one fails.
    """
    theta, eps = float(theta), float(eps)
    if not theta > mu.b:
        raise DomainError("theta must exceed b")
    if not eps > 0:
        raise DomainError("eps must be positive")
    chi, eta, _ = edge_curve(mu, theta)
    f3 = f_prime(mu, chi, eta, theta, 3).real
    c = 1.0 / ((theta - chi) * f3)
    r = math.sqrt(c * eps)
    gap = theta - mu.b
    bound = -(5.0 / 6.0) * math.sqrt(c) / (theta - chi) * eps ** 1.5
    if strict:
        failures = []
        if not r < gap / 4.0:
            failures.append("sqrt(c eps) < (theta - b)/4")
        if not eta - eps > 0:
            failures.append("eta - eps > 0")
        lhs2 = 0.25 * eps / (theta - chi)
        rhs2 = 2 ** 7 * c ** 1.5 * eps ** 1.5 / gap ** 4 + 2 * c ** 0.5 * eps ** 1.5 / gap ** 2
        if not lhs2 > rhs2:
            failures.append("second-derivative sufficiency inequality")
        lhs3 = -bound
        rhs3 = 2 ** 6 * c ** 2 * eps ** 4 / gap ** 4 + 2 ** 3 * c * eps ** 2 / gap ** 2
        if not lhs3 > rhs3:
            failures.append("exponent sufficiency inequality")
        if failures:
            raise EpsTooLargeError("eps too large: " + "; ".join(failures))
    return theta + r, theta + 2 * r, theta - 2 * r, theta - r, bound


# ---------------------------------------------------------------------------
# free compressed norm


def free_compressed_norm(mu: AtomicMeasure, t: float) -> float:
    """Rightmost abscissa of the liquid region at height ``t``.

    Solves ``eta_E(theta) = t`` for ``theta > b``, where ``eta_E`` decreases
    from ``1 - mu[{b}]`` to 0, and returns ``chi_E(theta)``.  Above
    ``1 - mu[{b}]`` the answer is ``b``.
    """
    t = float(t)
    if not 0.0 < t < 1.0:
        raise DomainError("t must lie in (0, 1)")
    top = 1.0 - float(mu.weights[-1])
    if t >= top:
        return mu.b
    g = lambda th: edge_curve(mu, th)[1] - t
    span = mu.b - mu.a
    lo = mu.b + 1e-13 * span
    if g(lo) <= 0:
        return mu.b
    hi = mu.b + span
    for _ in range(200):
        if g(hi) < 0:
            break
        hi = mu.b + 2.0 * (hi - mu.b)
    else:
        raise ConvergenceError("could not bracket the edge parameter")
    theta = brentq(g, lo, hi, xtol=1e-15 * (1 + abs(hi)), rtol=1e-15, maxiter=500)
    return edge_curve(mu, theta)[0]
