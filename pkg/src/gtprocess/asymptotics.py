"""Finite-n steepest-descent quantities for the kernel outside the liquid region.

For a top row ``x`` of length ``n`` and particle coordinates ``(u, r)``,
``(v, s)`` the double contour integral behind the kernel has integrand
``exp(n f_n(w) - n f~_n(z)) / (w - z)`` with

    f_n(w)  = (1/n) sum log(w - x_i) - (1 - (s - 1)/n) log(w - v)
    f~_n(z) = (1/n) sum log(z - x_i) - (1 - (r + 1)/n) log(z - u).

An outside point ``(chi, eta)`` comes with a pair ``t > s > b`` of simple
real critical points of the limiting exponent.  This module builds the
finite-n counterpart of that picture: shifted critical points, the descent
and ascent contours through them, the list of size conditions under which
the picture is provably valid, and the leading-order decay estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import DomainError, GeometryError, PoleError, RootEscapeError
from .measure import POLE_TOL, AtomicMeasure, TopRow, clustered_top_row
from .region import f_prime, f_value, outside_inverse, outside_map

__all__ = [
    "SteepestSetup", "DecayReport", "ContourPath", "FeasibilityItem", "FeasibilityReport",
    "paper_setup", "two_atom_measure",
    "f_n_value", "f_tilde_n_value", "f_n_derivative", "f_tilde_n_derivative",
    "nonasymptotic_map", "f_ts_n_prime",
    "steepest_roots", "feasibility_check", "feasibility_threshold",
    "descent_contours", "decay_estimate", "descent_monotonicity_probe",
    "DEFAULT_THETA",
]

DEFAULT_THETA = 5.0 / 12.0
ENVELOPE_NOTE = "envelope, constants not computed"
_CHUNK = 1 << 22  # complex entries per broadcast block


# ---------------------------------------------------------------------------
# exponent functions


def _as_row(x) -> np.ndarray:
    return x.values if isinstance(x, TopRow) else np.asarray(x, dtype=float)


def _blocks(w, n):
    step = max(1, _CHUNK // max(n, 1))
    for i in range(0, w.size, step):
        yield slice(i, i + step)


def _check_off(w, pts):
    near = w[np.abs(w.imag) < POLE_TOL]
    if near.size == 0:
        return
    srt = np.sort(pts)
    i = np.clip(np.searchsorted(srt, near.real), 1, srt.size - 1)
    d = np.minimum(np.abs(near - srt[i - 1]), np.abs(near - srt[i]))
    if np.any(d < POLE_TOL) or np.any(np.abs(near - srt[0]) < POLE_TOL):
        raise PoleError("evaluation point coincides with a top-row entry or the pole")


def _exponent_deriv(xv, pole, coef, w, k):
    """k-th derivative of ``(1/n) sum log(w - x_i) - coef log(w - pole)``."""
    w = np.asarray(w, dtype=complex)
    flat = w.ravel()
    _check_off(flat, np.append(xv, pole))
    n = xv.size
    out = np.empty(flat.shape, dtype=complex)
    if k == 0:
        for sl in _blocks(flat, n):
            out[sl] = np.log(flat[sl, None] - xv).sum(axis=1) / n
        out -= coef * np.log(flat - pole)
    else:
        c = (-1.0) ** (k - 1) * math.factorial(k - 1)
        for sl in _blocks(flat, n):
            out[sl] = c * (1.0 / (flat[sl, None] - xv) ** k).sum(axis=1) / n
        out -= coef * c / (flat - pole) ** k
    out = out.reshape(w.shape)
    return complex(out) if out.ndim == 0 else out


def _re_exponent(xv, pole, coef, w):
    """Real part of the exponent, using only real arithmetic."""
    w = np.asarray(w, dtype=complex).ravel()
    _check_off(w, np.append(xv, pole))
    wr, wi2 = w.real, w.imag ** 2
    out = np.empty(w.size)
    for sl in _blocks(w, xv.size):
        d = wr[sl, None] - xv
        out[sl] = np.log(d * d + wi2[sl, None]).sum(axis=1) / (2 * xv.size)
    return out - coef * np.log(np.abs(w - pole))


def _coef_f(n, s_n):
    return 1.0 - (s_n - 1) / n


def _coef_ft(n, r_n):
    return 1.0 - (r_n + 1) / n


def f_n_value(x: TopRow, v: float, s_n: int, w):
    """``(1/n) sum log(w - x_i) - (1 - (s_n - 1)/n) log(w - v)`` with principal logs."""
    xv = _as_row(x)
    return _exponent_deriv(xv, float(v), _coef_f(xv.size, s_n), w, 0)


def f_tilde_n_value(x: TopRow, u: float, r_n: int, w):
    """``(1/n) sum log(w - x_i) - (1 - (r_n + 1)/n) log(w - u)`` with principal logs."""
    xv = _as_row(x)
    return _exponent_deriv(xv, float(u), _coef_ft(xv.size, r_n), w, 0)


def f_n_derivative(x: TopRow, v: float, s_n: int, w, k: int = 1):
    if k < 1:
        raise DomainError("derivative order must be at least 1")
    xv = _as_row(x)
    return _exponent_deriv(xv, float(v), _coef_f(xv.size, s_n), w, k)


def f_tilde_n_derivative(x: TopRow, u: float, r_n: int, w, k: int = 1):
    if k < 1:
        raise DomainError("derivative order must be at least 1")
    xv = _as_row(x)
    return _exponent_deriv(xv, float(u), _coef_ft(xv.size, r_n), w, k)


def _cn(xv, w):
    return float(np.mean(1.0 / (w - xv)))


def nonasymptotic_map(x: TopRow, t: float, s: float) -> tuple:
    """``(chi_n, eta_n)``: the outside map with the empirical Cauchy transform of ``x``."""
    xv = _as_row(x)
    t, s = float(t), float(s)
    if not (t > s > xv.max()):
        raise DomainError("need t > s > x_1")
    ct, cs = _cn(xv, t), _cn(xv, s)
    dc = ct - cs
    return (t * ct - s * cs) / dc, 1.0 + ct * cs * (t - s) / dc


def f_ts_n_prime(x: TopRow, t: float, s: float, w, k: int = 1):
    """k-th derivative of ``f_(t,s),n``, whose first derivative is ``C_n(w) - (1 - eta_n)/(w - chi_n)``."""
    if k < 1:
        raise DomainError("derivative order must be at least 1")
    xv = _as_row(x)
    chi_n, eta_n = nonasymptotic_map(xv, t, s)
    return _exponent_deriv(xv, chi_n, 1.0 - eta_n, w, k)


# ---------------------------------------------------------------------------
# setup


def two_atom_measure() -> AtomicMeasure:
    """``(1/4) delta_1 + (3/4) delta_-1``."""
    return AtomicMeasure([-1.0, 1.0], [0.75, 0.25])


def default_xi(mu: AtomicMeasure, t, s, chi, eta) -> float:
    """Largest ``xi`` satisfying the separation chains, times 0.9."""
    a, b = mu.a, mu.b
    cap = min((t - s) / 8, (s - b) / 8, (b - chi) / 8, (chi - a) / 8, eta / 4, (1 - eta) / 4)
    return 0.9 * cap


@dataclass(frozen=True)
class SteepestSetup:
    """All finite-n data attached to one outside point.

    ``mu`` is the limiting measure and ``(t, s)`` the outside pair of
    ``(chi, eta)``.  ``(u_n, r_n)`` and ``(v_n, s_n)`` are the particle
    coordinates; ``offsets`` records their decomposition around
    ``(chi_n, eta_n)`` with zero ``n^-1/2`` parts.
    """

    mu: AtomicMeasure
    x: TopRow
    t: float
    s: float
    chi: float
    eta: float
    theta: float
    xi: float
    u_n: float
    r_n: int
    v_n: float
    s_n: int
    chi_n: float
    eta_n: float
    offsets: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.x.n

    @classmethod
    def from_particles(cls, mu: AtomicMeasure, x: TopRow, t: float, s: float,
                       u_n: float, r_n: int, v_n: float, s_n: int,
                       theta: float = DEFAULT_THETA, xi: Optional[float] = None) -> "SteepestSetup":
        t, s = float(t), float(s)
        n = x.n
        if not (t > s > max(mu.b, float(x.values[0]))):
            raise DomainError("need t > s > max(b, x_1)")
        for name, k in (("r_n", r_n), ("s_n", s_n)):
            if int(k) != k or not 1 <= k <= n - 1:
                raise DomainError(f"{name} must be an integer in 1..{n - 1}")
        if not 1.0 / 3.0 < theta < 0.5:
            raise DomainError("theta must lie in (1/3, 1/2)")
        chi, eta = outside_map(mu, t, s)
        chi_n, eta_n = nonasymptotic_map(x, t, s)
        if xi is None:
            xi = default_xi(mu, t, s, chi, eta)
        if not xi > 0:
            raise DomainError("xi must be positive")
        offsets = {
            "m_n": 0.0, "m_tilde_n": 0.0,
            "y1_n": n * (v_n - chi_n), "y2_n": (s_n - 1) - n * eta_n,
            "y1_tilde_n": n * (u_n - chi_n), "y2_tilde_n": (r_n + 1) - n * eta_n,
        }
        return cls(mu, x, t, s, chi, eta, float(theta), float(xi), float(u_n), int(r_n),
                   float(v_n), int(s_n), chi_n, eta_n, offsets)

    @classmethod
    def from_offsets(cls, mu: AtomicMeasure, x: TopRow, t: float, s: float,
                     m_n: float = 0.0, m_tilde_n: float = 0.0,
                     y1_n: float = 0.0, y2_n: float = 0.0,
                     y1_tilde_n: float = 0.0, y2_tilde_n: float = 0.0,
                     theta: float = DEFAULT_THETA, xi: Optional[float] = None) -> "SteepestSetup":
        """Place the particles at ``(chi_n, eta_n) + m x_n(.) n^-1/2 + y n^-1``.

        The implied row indices must be integers (within ``1e-8``).
        """
        n = x.n
        xv = x.values
        chi_n, eta_n = nonasymptotic_map(x, t, s)
        h = n ** -0.5
        v_n = chi_n + m_n * h + y1_n / n
        u_n = chi_n + m_tilde_n * h + y1_tilde_n / n
        s_real = 1.0 + n * (eta_n + m_n * _cn(xv, t) * h) + y2_n
        r_real = -1.0 + n * (eta_n + m_tilde_n * _cn(xv, s) * h) + y2_tilde_n
        for name, val in (("s_n", s_real), ("r_n", r_real)):
            if abs(val - round(val)) > 1e-8:
                raise DomainError(f"offsets give non-integer {name} = {val!r}")
        out = cls.from_particles(mu, x, t, s, u_n, int(round(r_real)), v_n, int(round(s_real)),
                                 theta, xi)
        offsets = {"m_n": m_n, "m_tilde_n": m_tilde_n, "y1_n": y1_n, "y2_n": y2_n,
                   "y1_tilde_n": y1_tilde_n, "y2_tilde_n": y2_tilde_n}
        return cls(**{**out.__dict__, "offsets": offsets})

    def f(self, w, k: int = 0):
        """``f_n`` (``k = 0``) or its k-th derivative."""
        return _exponent_deriv(self.x.values, self.v_n, _coef_f(self.n, self.s_n), w, k)

    def f_tilde(self, w, k: int = 0):
        return _exponent_deriv(self.x.values, self.u_n, _coef_ft(self.n, self.r_n), w, k)

    def re_f(self, w):
        return _re_exponent(self.x.values, self.v_n, _coef_f(self.n, self.s_n), w)

    def re_f_tilde(self, w):
        return _re_exponent(self.x.values, self.u_n, _coef_ft(self.n, self.r_n), w)

    def f_limit(self, w, k: int = 0):
        """Limiting exponent ``f_(chi, eta)`` or its derivatives."""
        if k == 0:
            return f_value(self.mu, self.chi, self.eta, w)
        return f_prime(self.mu, self.chi, self.eta, w, k)


def paper_setup(l: int, n: int, chi: float, theta: float = DEFAULT_THETA,
                xi: Optional[float] = None, mu: Optional[AtomicMeasure] = None) -> SteepestSetup:
    """Two-atom setup on the horizontal line ``eta = (1 - 1/l)/4``.

    The top row clusters at the atoms with spacing ``1/n^2``, both particles
    sit at ``(chi, n eta)``, and ``n`` must be a multiple of ``4 l``.
    """
    l, n = int(l), int(n)
    if l < 2:
        raise DomainError("l must be at least 2")
    if n % (4 * l):
        raise DomainError(f"n = {n} is not a multiple of 4l = {4 * l}")
    mu = two_atom_measure() if mu is None else mu
    eta = (1.0 - 1.0 / l) / 4.0
    t, s = outside_inverse(mu, chi, eta)
    x = clustered_top_row(mu, n)
    row = n * (l - 1) // (4 * l)
    return SteepestSetup.from_particles(mu, x, t, s, chi, row, chi, row, theta, xi)


# ---------------------------------------------------------------------------
# roots


def _newton_real(g, g1, seed, iters=100):
    """Newton's method with backtracking on ``|g|``."""
    x = float(seed)
    gx = g(x)
    for _ in range(iters):
        d = g1(x)
        if d == 0 or gx == 0:
            break
        step = gx / d
        for _ in range(60):
            xn = x - step
            gn = g(xn)
            if abs(gn) < abs(gx):
                break
            step /= 2
        else:
            break
        done = abs(xn - x) <= 1e-15 * max(1.0, abs(x))
        x, gx = xn, gn
        if done:
            break
    return x


def _roots(setup: SteepestSetup):
    n = setup.n
    h = n ** -0.5
    fp = lambda w: setup.f(w, 1).real
    fpp = lambda w: setup.f(w, 2).real
    gp = lambda w: setup.f_tilde(w, 1).real
    gpp = lambda w: setup.f_tilde(w, 2).real
    t, s, xi = setup.t, setup.s, setup.xi
    return {
        "t_n": (_newton_real(fp, fpp, t), t, h),
        "s_n_root": (_newton_real(fp, fpp, s), s, xi),
        "t_tilde_n": (_newton_real(gp, gpp, t), t, xi),
        "s_tilde_n": (_newton_real(gp, gpp, s), s, h),
    }


def steepest_roots(setup: SteepestSetup) -> tuple:
    """``(t_n, s_n_root, t~_n, s~_n)``: real critical points of ``f_n`` and ``f~_n`` near ``t`` and ``s``.

    ``t_n`` and ``s~_n`` must lie within ``n^-1/2`` of their seeds, the other
    two within ``xi``; `RootEscapeError` otherwise.
    """
    out = []
    for name, (root, seed, rad) in _roots(setup).items():
        if not (math.isfinite(root) and abs(root - seed) < rad):
            raise RootEscapeError(f"{name} = {root!r} is not within {rad:.3g} of {seed!r}")
        out.append(root)
    return tuple(out)


# ---------------------------------------------------------------------------
# feasibility


@dataclass(frozen=True)
class FeasibilityItem:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class FeasibilityReport:
    n: int
    items: tuple
    e2_surrogate: float
    e2_tilde_surrogate: float

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    @property
    def failures(self) -> list:
        return [i.name for i in self.items if not i.passed]

    def to_dict(self) -> dict:
        return {"n": self.n, "passed": self.passed,
                "e2_surrogate": self.e2_surrogate, "e2_tilde_surrogate": self.e2_tilde_surrogate,
                "items": [asdict(i) for i in self.items]}


def _chain(values) -> bool:
    return all(values[i] > values[i + 1] for i in range(len(values) - 1))


def _zero_count(g, center, radius, poles, m=512):
    """Zeros minus poles of ``g`` inside a circle, by the argument principle."""
    ang = 2 * np.pi * (np.arange(m) + 0.5) / m
    w = center + radius * np.exp(1j * ang)
    vals = np.asarray(g(w))
    if np.any(vals == 0):
        return None
    phase = np.unwrap(np.angle(np.append(vals, vals[0])))
    wind = int(round((phase[-1] - phase[0]) / (2 * np.pi)))
    inside = int(np.sum(np.abs(np.asarray(poles) - center) < radius))
    return wind + inside


def _third_derivative_bound(func, center, radius, m=512) -> tuple:
    """Bound on ``|f'''|`` over a closed disk from its boundary values.

    Returns ``(bound, boundary_max)`` where ``bound`` inflates the sampled
    boundary maximum by 5 percent.
    """
    ang = 2 * np.pi * np.arange(m) / m
    w = center + radius * np.exp(1j * ang)
    peak = float(np.max(np.abs(func(w, 3))))
    return 1.05 * peak, peak


def _taylor_surrogate(func, centre, root, D, n, theta):
    """Upper bound for the cubic Taylor constant on the scaled disk around ``centre``."""
    b = abs(root + 1j * n ** -theta - centre) * n ** theta
    rad = n ** -theta * b
    m3, _ = _third_derivative_bound(func, centre, rad)
    lin = abs(func(centre, 1)) * b * n ** (2 * theta)
    return m3 * b ** 3 / 6.0 + lin


def feasibility_check(setup: SteepestSetup) -> FeasibilityReport:
    """Evaluate every size condition behind the decay estimate.

    Returns a report with one item per inequality.  Never raises on a failed
    condition; a condition that cannot be evaluated is reported as failed.
    """
    st = setup
    n, th, xi = st.n, st.theta, st.xi
    mu = st.mu
    a, b = mu.a, mu.b
    t, s, chi, eta = st.t, st.s, st.chi, st.eta
    xv = st.x.values
    items = []
    add = lambda name, ok, detail="": items.append(FeasibilityItem(name, bool(ok), detail))

    add("mass at b positive", mu.weights[-1] > 0)
    add("theta in (1/3, 1/2)", 1 / 3 < th < 0.5, f"theta={th!r}")
    add("xi spatial chain", _chain([t - 4 * xi, s + 4 * xi, s - 4 * xi, b + 4 * xi,
                                    b - 4 * xi, chi + 4 * xi, chi - 4 * xi, a + 4 * xi]),
        f"xi={xi!r}")
    add("xi height chain", _chain([1 - 2 * xi, 1 - eta + 2 * xi, 1 - eta - 2 * xi, 2 * xi]))
    add("support top", b + 4 * xi > xv[0] > b - 4 * xi)
    add("support bottom", a + 4 * xi > xv[-1] > a - 4 * xi)
    cs = [st.chi_n, st.v_n, st.u_n]
    add("centres near chi", chi + 4 * xi > max(cs) and min(cs) > chi - 4 * xi)
    hs = [1 - st.eta_n, 1 - (st.s_n - 1) / n, 1 - (st.r_n + 1) / n]
    add("heights near 1 - eta", 1 - eta + 2 * xi > max(hs) and min(hs) > 1 - eta - 2 * xi)
    add("entries above the particles", np.any(xv > max(st.u_n, st.v_n)))
    add("entries below the particles", np.any(xv < min(st.u_n, st.v_n)))
    add("n^(1/3 - theta) < 1/2", n ** (1 / 3 - th) < 0.5, f"{n ** (1 / 3 - th):.6g}")
    add("n^(theta - 1/2) < 1/2", n ** (th - 0.5) < 0.5, f"{n ** (th - 0.5):.6g}")
    add("n^-theta < xi", n ** -th < xi, f"{n ** -th:.6g} vs {xi:.6g}")
    add("n^-1/2 < xi/2", n ** -0.5 < xi / 2)
    add("|v_n - u_n| < xi/2", abs(st.v_n - st.u_n) < xi / 2)
    add("1/n < xi", 1.0 / n < xi)
    f2t = float(st.f_limit(t, 2).real)
    f2s = float(st.f_limit(s, 2).real)
    scale = 2.0 ** -6 * (t - chi) * (t - b) ** 3 / (b - a) * abs(f2t)
    add("n^-theta below second-derivative scale", n ** -th < scale, f"{n ** -th:.6g} vs {scale:.6g}")

    # critical-point items
    ts_prime = lambda w, k=1: _exponent_deriv(xv, st.chi_n, 1.0 - st.eta_n, w, k)
    add("f_ts,n''(t) > f''(t)/2 > 0", ts_prime(t, 2).real > 0.5 * f2t > 0)
    add("f_ts,n''(s) < f''(s)/2 < 0", ts_prime(s, 2).real < 0.5 * f2s < 0)
    poles = np.append(xv, st.chi_n)
    add("t unique root of f_ts,n' in B(t, xi)", _zero_count(ts_prime, t, xi, poles) == 1)
    add("s unique root of f_ts,n' in B(s, xi)", _zero_count(ts_prime, s, xi, poles) == 1)
    add("f_n''(t) > f''(t)/4 > 0", st.f(t, 2).real > 0.25 * f2t > 0)
    add("f~_n''(s) < f''(s)/4 < 0", st.f_tilde(s, 2).real < 0.25 * f2s < 0)
    h = n ** -0.5
    fpoles = np.append(xv, st.v_n)
    gpoles = np.append(xv, st.u_n)
    fn1 = lambda w: st.f(w, 1)
    gn1 = lambda w: st.f_tilde(w, 1)
    add("one root of f_n' in B(t, n^-1/2)", _zero_count(fn1, t, h, fpoles) == 1)
    add("one root of f_n' in B(s, xi)", _zero_count(fn1, s, xi, fpoles) == 1)
    add("one root of f~_n' in B(t, xi)", _zero_count(gn1, t, xi, gpoles) == 1)
    add("one root of f~_n' in B(s, n^-1/2)", _zero_count(gn1, s, h, gpoles) == 1)
    roots = _roots(st)
    ok_roots = all(math.isfinite(r) and abs(r - c) < rad for r, c, rad in roots.values())
    add("real roots stay in their windows", ok_roots)
    e2 = e2t = math.inf
    if ok_roots:
        tn = roots["t_n"][0]
        stn = roots["s_tilde_n"][0]
        add("f_n''(t_n) > f''(t)/4", st.f(tn, 2).real > 0.25 * f2t)
        add("f~_n''(s~_n) < f''(s)/4", st.f_tilde(stn, 2).real < 0.25 * f2s)
        D = math.sqrt(abs(st.f(t, 2).real) / 2)
        Dt = math.sqrt(abs(st.f_tilde(s, 2).real) / 2)
        e2 = _taylor_surrogate(st.f, t, tn, D, n, th)
        e2t = _taylor_surrogate(st.f_tilde, s, stn, Dt, n, th)
        lhs = n ** (1 - 3 * th) * (e2 + e2t)
        add("n^(1 - 3 theta) (E2 + E2~) < 1 (surrogate)", lhs < 1, f"{lhs:.6g}")
    return FeasibilityReport(n, tuple(items), float(e2), float(e2t))


def feasibility_threshold(make_setup: Callable[[int], SteepestSetup], ns: Iterable[int]) -> Optional[int]:
    """Smallest ``n`` in ``ns`` from which every larger candidate passes, or ``None``."""
    ns = sorted(int(k) for k in ns)
    ok = [feasibility_check(make_setup(k)).passed for k in ns]
    threshold = None
    for k, good in zip(reversed(ns), reversed(ok)):
        if not good:
            break
        threshold = k
    return threshold


# ---------------------------------------------------------------------------
# contours


@dataclass(frozen=True)
class ContourPath:
    """Closed contour symmetric about the real axis.

    ``upper`` samples the upper part in traversal order, starting on the real
    axis at the right and ending on it at the left; ``split`` is the index
    where the second piece (arc or parametric curve) begins.  The closed
    contour runs through ``upper`` and then back along its conjugate, which
    makes it counter-clockwise.
    """

    upper: np.ndarray
    split: int

    @property
    def closed(self) -> np.ndarray:
        return np.concatenate([self.upper, np.conj(self.upper[::-1])[1:]])

    @property
    def lower(self) -> np.ndarray:
        return np.conj(self.upper)

    @property
    def line(self) -> np.ndarray:
        return self.upper[: self.split + 1]

    @property
    def second(self) -> np.ndarray:
        return self.upper[self.split:]

    @property
    def length(self) -> float:
        return 2.0 * float(np.sum(np.abs(np.diff(self.upper))))

    def winding(self, z) -> np.ndarray:
        """Winding number of the closed contour about each point of ``z``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        pts = self.closed
        out = np.empty(z.size, dtype=int)
        step = max(1, _CHUNK // pts.size)
        for i in range(0, z.size, step):
            d = pts[None, :] - z[i:i + step, None]
            ang = np.angle(d[:, 1:] / d[:, :-1]).sum(axis=1)
            out[i:i + step] = np.rint(ang / (2 * np.pi)).astype(int)
        return out


def _rn_in(setup: SteepestSetup, stn: float):
    d = stn - setup.u_n
    qt2 = d * d + setup.n ** (-2 * setup.theta)

    def R(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = d * (1.0 - 0.5 * qt2 / d ** 2 * np.log(y)) * y
        return np.where(y > 0, val, 0.0)

    def I2(y):
        return qt2 * np.asarray(y, dtype=float) - R(y) ** 2

    return R, I2


def descent_contours(setup: SteepestSetup, points: int = 4000, grid: int = 10 ** 4) -> tuple:
    """``(gamma_n, Gamma_n)``: the descent contour for ``w`` and the ascent contour for ``z``.

    ``gamma_n`` runs from ``t`` straight to ``t_n + i n^-theta`` and then along
    the circle about ``v_n`` through that point to the real axis.  ``Gamma_n``
    runs from ``s`` straight to ``s~_n + i n^-theta`` and then along
    ``u_n + R_n(Y) + i I_n(Y)`` as ``Y`` falls from 1 to 0.  Raises
    `GeometryError` if ``I_n^2`` is negative anywhere on a ``grid``-point mesh.
    """
    tn, _, _, stn = steepest_roots(setup)
    h = setup.n ** -setup.theta
    ls = max(8, points // 8)
    # gamma_n
    top = tn + 1j * h
    start = math.atan2(h, tn - setup.v_n)
    q = abs(top - setup.v_n)
    line = setup.t + (top - setup.t) * np.linspace(0.0, 1.0, ls)
    ang = np.linspace(start, math.pi, points)
    arc = setup.v_n + q * np.exp(1j * ang)
    arc[-1] = setup.v_n - q
    gamma = ContourPath(np.concatenate([line, arc[1:]]), ls - 1)
    # Gamma_n
    R, I2 = _rn_in(setup, stn)
    mesh = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    vals = I2(mesh)
    if np.any(vals < 0):
        worst = float(mesh[np.argmin(vals)])
        raise GeometryError(f"I_n^2 is negative near y = {worst:.6g}")
    tau = np.linspace(1.0, 0.0, points)
    Y = tau ** 2
    curve = setup.u_n + R(Y) + 1j * np.sqrt(np.maximum(I2(Y), 0.0))
    curve[0] = stn + 1j * h
    curve[-1] = setup.u_n
    sline = setup.s + (stn + 1j * h - setup.s) * np.linspace(0.0, 1.0, ls)
    Gamma = ContourPath(np.concatenate([sline, curve[1:]]), ls - 1)
    return gamma, Gamma


def rn_in_endpoints(setup: SteepestSetup) -> dict:
    """Values of ``R_n`` and ``I_n`` at and near the ends of ``(0, 1)``."""
    _, _, _, stn = steepest_roots(setup)
    R, I2 = _rn_in(setup, stn)
    tiny = 1e-12
    return {
        "R_1": float(R(1.0)), "I_1": float(math.sqrt(max(I2(1.0), 0.0))),
        "R_0": float(R(tiny)), "I_0": float(math.sqrt(max(I2(tiny), 0.0))),
        "s_tilde_minus_u": stn - setup.u_n, "n_pow_minus_theta": setup.n ** -setup.theta,
    }


def _min_distance(A, B):
    best = math.inf
    step = max(1, _CHUNK // B.size)
    for i in range(0, A.size, step):
        best = min(best, float(np.min(np.abs(A[i:i + step, None] - B[None, :]))))
    return best


def contour_checks(setup: SteepestSetup, gamma: ContourPath, Gamma: ContourPath,
                   sample: int = 512) -> dict:
    """Separation, lengths and winding numbers of the two contours."""
    sep = min(_min_distance(gamma.upper, Gamma.upper), _min_distance(gamma.upper, Gamma.lower))
    xv = setup.x.values
    above = xv[xv > setup.u_n]
    below = xv[xv < setup.u_n]
    pick = lambda arr: arr[np.unique(np.linspace(0, arr.size - 1, min(arr.size, sample)).astype(int))] \
        if arr.size else arr
    zs = Gamma.closed[:: max(1, Gamma.closed.size // sample)]
    return {
        "separation": sep,
        "separation_bound": 0.5 * (setup.t - setup.s),
        "gamma_length": gamma.length,
        "gamma_length_bound": 8.0 * (setup.t - setup.chi),
        "Gamma_length": Gamma.length,
        "Gamma_length_bound": 8.0 * (setup.s - setup.chi),
        "gamma_winds_v": int(gamma.winding(setup.v_n)[0]),
        "gamma_winds_Gamma": sorted(set(gamma.winding(zs).tolist())),
        "Gamma_winds_above": sorted(set(Gamma.winding(pick(above)).tolist())),
        "Gamma_winds_below": sorted(set(Gamma.winding(pick(below)).tolist())),
    }


def descent_monotonicity_probe(setup: SteepestSetup, contours: Optional[tuple] = None) -> dict:
    """Largest violation of the descent / ascent property along the curved pieces.

    Along the arc of ``gamma_n`` the real part of ``f_n`` must stay at or below
    its value at the arc's start; along the curved piece of ``Gamma_n`` the
    real part of ``f~_n`` must stay at or above its start value.
    """
    gamma, Gamma = descent_contours(setup) if contours is None else contours
    arc = gamma.second
    curve = Gamma.second[:-1]  # the end point is the pole u_n
    fa = setup.re_f(arc)
    gc = setup.re_f_tilde(curve)
    # the lower half, on a subsample
    k = max(1, arc.size // 256)
    fa_lo = setup.re_f(np.conj(arc[::k]))
    gc_lo = setup.re_f_tilde(np.conj(curve[::k]))
    descent = float(max(0.0, np.max(fa - fa[0])))
    ascent = float(max(0.0, np.max(gc[0] - gc)))
    return {
        "descent_violation": descent,
        "ascent_violation": ascent,
        "arc_start_value": float(fa[0]),
        "curve_start_value": float(gc[0]),
        "mirror_mismatch": float(max(np.max(np.abs(fa[::k] - fa_lo)), np.max(np.abs(gc[::k] - gc_lo)))),
        "passed": descent <= 1e-9 and ascent <= 1e-9,
    }


# ---------------------------------------------------------------------------
# decay estimate


@dataclass(frozen=True)
class DecayReport:
    n: int
    t: float
    s: float
    chi: float
    eta: float
    chi_n: float
    eta_n: float
    t_n: float
    s_n_root: float
    t_tilde_n: float
    s_tilde_n: float
    D_n: float
    D_tilde_n: float
    b_n: float
    b_tilde_n: float
    alpha_n: float
    alpha_tilde_n: float
    exponent_n: float
    limit_exponent: float
    leading: float
    kernel_estimate: float
    envelope_taylor: float
    envelope_tail: float
    roots_in_window: bool
    envelope_note: str = ENVELOPE_NOTE

    def to_dict(self) -> dict:
        return asdict(self)


def decay_estimate(setup: SteepestSetup) -> DecayReport:
    """Leading-order estimate of the diagonal kernel at an outside point.

    Needs ``r_n = s_n``.  The roots are reported even when they fall outside
    their guaranteed windows; ``roots_in_window`` records whether they do.
    Then the kernel equals ``(n - s_n) J_n`` and
    ``n J_n`` is approximated by
    ``exp(n (f_n(t) - f~_n(s))) / (4 pi (t - s) D_n D~_n)``.  The two relative
    error shapes of that approximation are returned with unit constants.
    """
    st = setup
    if st.r_n != st.s_n:
        raise DomainError("decay estimate needs r_n = s_n")
    n, th = st.n, st.theta
    roots = _roots(st)
    tn, snr, ttn, stn = (roots[k][0] for k in ("t_n", "s_n_root", "t_tilde_n", "s_tilde_n"))
    in_window = all(abs(r - c) < rad for r, c, rad in roots.values())
    D = math.sqrt(abs(st.f(st.t, 2).real) / 2)
    Dt = math.sqrt(abs(st.f_tilde(st.s, 2).real) / 2)
    h = n ** -th
    pt = tn + 1j * h - st.t
    ps = stn + 1j * h - st.s
    expo = float((st.f(st.t) - st.f_tilde(st.s)).real)
    lim = float((st.f_limit(st.t) - st.f_limit(st.s)).real)
    lead = math.exp(n * expo) / (4 * math.pi * (st.t - st.s) * D * Dt)
    return DecayReport(
        n=n, t=st.t, s=st.s, chi=st.chi, eta=st.eta, chi_n=st.chi_n, eta_n=st.eta_n,
        t_n=tn, s_n_root=snr, t_tilde_n=ttn, s_tilde_n=stn, D_n=D, D_tilde_n=Dt,
        b_n=abs(pt) * n ** th, b_tilde_n=abs(ps) * n ** th,
        alpha_n=math.atan2(pt.imag, pt.real), alpha_tilde_n=math.atan2(ps.imag, ps.real),
        exponent_n=expo, limit_exponent=lim, leading=lead,
        kernel_estimate=(1.0 - st.s_n / n) * lead, roots_in_window=in_window,
        envelope_taylor=n ** (1 - 3 * th),
        envelope_tail=math.exp(-0.25 * n ** (1 - 2 * th) * min(D, Dt) ** 2) * n ** (1 - th),
    )
