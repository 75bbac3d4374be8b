"""Acceptance criteria, one test per criterion.

Each criterion returns ``(ok, detail)``; the outcome is printed as one
``PASS``/``FAIL`` line in the pytest terminal summary, or on stdout when the
module is run directly.
"""

import math
import time

import numpy as np
import pytest

from gtprocess.asymptotics import (contour_checks, descent_contours, descent_monotonicity_probe,
                                   feasibility_check, paper_setup, rn_in_endpoints,
                                   two_atom_measure)
from gtprocess.kernel import ParticleCoord, expected_count, kernel, kernel_quadrature
from gtprocess.measure import AtomicMeasure, TopRow
from gtprocess.region import (classify, edge_curve, exponent, f_prime, free_compressed_norm,
                              liquid_inverse, liquid_map, outside_inverse, outside_map,
                              RegionLabel)
from gtprocess.sampler import empirical_count, sample_minor_batch, sample_rejection_batch
from conftest import random_measure
from oracles import compressed_norm_two_point, fprime_roots

RESULTS = {}


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def c1_edge_point():
    mu = two_atom_measure()

    def work():
        chi, eta, _ = edge_curve(mu, 2.0)
        return chi, eta, [f_prime(mu, 0.5, 0.25, 2.0, k) for k in (1, 2, 3)]

    work()
    best = min(_timed(work)[1] for _ in range(20))
    chi, eta, d = work()
    ok = (abs(chi - 0.5) < 1e-12 and abs(eta - 0.25) < 1e-12 and abs(d[0]) < 1e-10
          and abs(d[1]) < 1e-10 and abs(d[2] - 1 / 9) < 1e-10 and best < 1e-3)
    return ok, f"f'''(2) - 1/9 = {abs(d[2] - 1 / 9):.2e}, {best * 1e3:.3f} ms"


def c2_atom_endpoints():
    rng = np.random.default_rng(2024)

    def work():
        worst = 0.0
        for _ in range(20):
            mu = random_measure(rng, 6)
            for b, a in zip(mu.positions, mu.weights):
                chi, eta, _ = edge_curve(mu, b)
                worst = max(worst, abs(chi - b), abs(eta - (1 - a)))
        return worst

    worst, dt = _timed(work)
    return worst < 1e-12 and dt < 1, f"max error {worst:.1e}, {dt:.2f} s"


def c3_round_trips():
    rng = np.random.default_rng(33)

    def work():
        worst = 0.0
        for _ in range(5):
            mu = random_measure(rng, 5)
            for x in np.linspace(mu.a - 1, mu.b + 1, 10):
                for y in np.geomspace(0.05, 3, 10):
                    w = complex(x, y)
                    chi, eta = liquid_map(mu, w)
                    back = liquid_inverse(mu, chi, eta)
                    worst = max(worst, abs(back - w) / max(1, abs(w)))
            for t in mu.b + np.geomspace(0.05, 10, 10):
                for frac in np.linspace(0.05, 0.95, 10):
                    s = mu.b + frac * (t - mu.b)
                    chi, eta = outside_map(mu, t, s)
                    T, S = outside_inverse(mu, chi, eta)
                    worst = max(worst, abs(T - t) / max(1, t), abs(S - s) / max(1, t))
        return worst

    worst, dt = _timed(work)
    return worst < 1e-8 and dt < 10, f"max relative error {worst:.1e}, {dt:.1f} s"


def c4_exact_vs_quadrature():
    rng = np.random.default_rng(44)

    def work():
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(3, 21))
            x = np.sort(rng.uniform(-1, 1, n))[::-1]
            while np.min(-np.diff(x)) < 1e-3:
                x = np.sort(rng.uniform(-1, 1, n))[::-1]
            r = int(rng.integers(1, n - 1))
            u = rng.uniform(x[-1], x[0])
            while np.min(np.abs(x - u)) < 1e-3:
                u = rng.uniform(x[-1], x[0])
            top = TopRow(x)
            p = ParticleCoord(u, r)
            a = kernel(top, p, p, method="exact")
            b = kernel_quadrature(top, p, p)
            worst = max(worst, abs(a - b) / max(1, abs(a)))
        return worst

    worst, dt = _timed(work)
    return worst < 1e-6 and dt < 60, f"max relative gap {worst:.1e}, {dt:.1f} s"


def _top_rows(n, rng):
    equi = np.linspace(1, -1, n)
    k = max(1, n // 4)
    clustered = np.concatenate([1 - np.arange(k) / n ** 2, -1 + np.arange(n - k)[::-1] / n ** 2])
    rand = np.sort(rng.uniform(-2, 2, n))[::-1]
    return [TopRow(equi), TopRow(np.sort(clustered)[::-1]), TopRow(rand)]


def c5_row_conservation():
    rng = np.random.default_rng(55)

    def work():
        worst = 0.0
        for n in range(2, 11):
            for x in _top_rows(n, rng):
                for r in range(1, n):
                    got = expected_count(x, r, (x.values[-1] - 1, x.values[0] + 1))
                    worst = max(worst, abs(got - r))
        return worst

    worst, dt = _timed(work)
    return worst < 1e-4 and dt < 120, f"max |count - r| {worst:.1e}, {dt:.1f} s"


def c6_kernel_vs_monte_carlo():
    x = TopRow([1, 1 - 1 / 36, -1 + 3 / 36, -1 + 2 / 36, -1 + 1 / 36, -1])
    intervals = [(-1.0, -0.5), (-0.5, 0.5), (0.5, 1.0)]

    def work():
        batch = sample_minor_batch(x, 100_000, 6)
        worst = 0.0
        for r in (2, 3, 4):
            for iv in intervals:
                mean, se = empirical_count(batch, r, iv)
                worst = max(worst, abs(mean - expected_count(x, r, iv)) / se)
        return worst

    worst, dt = _timed(work)
    return worst <= 3 and dt < 300, f"max deviation {worst:.2f} stderr, {dt:.1f} s"


def c7_sampler_equivalence():
    x = TopRow([2.0, 1.0, 0.0])
    intervals = [(0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0)]

    def work():
        m = 100_000
        a = sample_minor_batch(x, m, 71)
        b = sample_rejection_batch(x, m, 72)
        worst = 0.0
        for r in (1, 2):
            for iv in intervals:
                ma, sa = empirical_count(a, r, iv)
                mb, sb = empirical_count(b, r, iv)
                worst = max(worst, abs(ma - mb) / math.hypot(sa, sb))
        return worst

    worst, dt = _timed(work)
    return worst <= 3 and dt < 120, f"max deviation {worst:.2f} stderr, {dt:.1f} s"


def c8_decay():
    mu = two_atom_measure()
    l = 4
    bound = -5 / (12 * math.sqrt(6)) * l ** -1.5

    def work():
        ks, gaps = [], []
        for n in (32, 64, 96, 128):
            st = paper_setup(l, n, 0.5)
            p = ParticleCoord(st.u_n, st.r_n)
            k = kernel(st.x, p, p)
            ks.append(k)
            gaps.append(abs(math.log(k) / n - exponent(mu, st.chi, st.eta)) * n)
        eta = (1 - 1 / l) / 4
        expos = [exponent(mu, c, eta) for c in np.linspace(0.5, 0.99, 50)]
        return ks, gaps, max(expos)

    (ks, gaps, top), dt = _timed(work)
    ok = all(a > b > 0 for a, b in zip(ks, ks[1:])) and max(gaps) < 20 and top < bound and dt < 600
    return ok, (f"kernel {', '.join(f'{k:.3e}' for k in ks)}; max n*gap {max(gaps):.2f}; "
                f"max exponent {top:.5f} < {bound:.5f}; {dt:.1f} s")


def c9_steepest_geometry():
    def work():
        fails = []
        for chi in np.round(np.arange(0.53, 0.625, 0.01), 2):
            st = paper_setup(2, 8192, float(chi))
            if not feasibility_check(st).passed:
                fails.append(f"{chi}: infeasible")
                continue
            contours = descent_contours(st)
            probe = descent_monotonicity_probe(st, contours)
            c = contour_checks(st, *contours)
            e = rn_in_endpoints(st)
            ok = (probe["passed"]
                  and c["separation"] >= c["separation_bound"]
                  and c["gamma_length"] <= c["gamma_length_bound"]
                  and c["Gamma_length"] <= c["Gamma_length_bound"]
                  and abs(e["R_1"] - e["s_tilde_minus_u"]) < 1e-9
                  and abs(e["I_1"] - e["n_pow_minus_theta"]) < 1e-6 * e["n_pow_minus_theta"]
                  and abs(e["R_0"]) < 1e-6 and abs(e["I_0"]) < 1e-4)
            if not ok:
                fails.append(str(chi))
        return fails

    fails, dt = _timed(work)
    ok = not fails and dt < 60
    return ok, f"10 setups (l=2, n=8192), failures: {fails or 'none'}, {dt:.1f} s"


def _census(mu, chi, eta):
    roots = fprime_roots(mu.positions, mu.weights, chi, eta)
    x = mu.positions
    right, left = x[x > chi], x[x < chi]
    poles = np.sort(np.append(x, chi))
    sets = {"nonreal": 0, "J1": 0, "J2": 0, "J3": 0, "J4": 0}
    gaps = {}
    for z in roots:
        if abs(z.imag) > 1e-9 * max(1, abs(z)):
            sets["nonreal"] += 1
        elif z.real > mu.b:
            sets["J1"] += 1
        elif z.real < mu.a:
            sets["J2"] += 1
        elif right.size and chi < z.real < right.min():
            sets["J3"] += 1
        elif left.size and left.max() < z.real < chi:
            sets["J4"] += 1
        else:
            k = int(np.searchsorted(poles, z.real))
            gaps[k] = gaps.get(k, 0) + 1
    return sets, list(gaps.values())


def _law_holds(sets, ks):
    big = list(sets.values())
    if max(big) > 2 or max(ks, default=0) > 3:
        return False
    for name, c in sets.items():
        if c in (1, 2):
            if any(v for k, v in sets.items() if k != name) or max(ks, default=0) > 1:
                return False
    for i, c in enumerate(ks):
        if c in (2, 3):
            if any(big) or max((v for j, v in enumerate(ks) if j != i), default=0) > 1:
                return False
    return True


def c10_root_count_law():
    rng = np.random.default_rng(1010)

    def work():
        bad = 0
        for _ in range(200):
            mu = random_measure(rng, 6)
            chi = rng.uniform(mu.a, mu.b)
            while np.min(np.abs(mu.positions - chi)) < 1e-3:
                chi = rng.uniform(mu.a, mu.b)
            eta = rng.uniform(0.01, 0.99)
            sets, ks = _census(mu, chi, eta)
            bad += not _law_holds(sets, ks)
        return bad

    bad, dt = _timed(work)
    return bad == 0 and dt < 120, f"{bad} violations in 200 points, {dt:.1f} s"


def _outside_points(mu, rng, count):
    pts = []
    while len(pts) < count:
        t = mu.b + rng.uniform(0.2, 6)
        s = mu.b + rng.uniform(0.1, 0.9) * (t - mu.b)
        pts.append(outside_map(mu, t, s))
    return pts


def _expo_pair(mu, p, q):
    t, s = outside_inverse(mu, *p)
    T, S = outside_inverse(mu, *q)
    ok_roots = T > t > s > S
    e_small, e_big = exponent(mu, *p), exponent(mu, *q)
    return ok_roots and e_big < e_small < 0


def c11_exponent_monotonicity():
    rng = np.random.default_rng(1111)
    mus = [two_atom_measure(), AtomicMeasure([-1, 0.5, 2], [0.3, 0.3, 0.4])]

    def work():
        counts = {"horizontal": [0, 0], "vertical": [0, 0]}
        while min(c[0] for c in counts.values()) < 50:
            mu = mus[int(rng.integers(len(mus)))]
            chi, eta = _outside_points(mu, rng, 1)[0]
            kind = "horizontal" if counts["horizontal"][0] <= counts["vertical"][0] else "vertical"
            step = rng.uniform(0.01, 0.3)
            q = (chi + step, eta) if kind == "horizontal" else (chi, eta - step * eta)
            if not (mu.a < q[0] < mu.b and 0 < q[1] < 1):
                continue
            if classify(mu, *q).label is not RegionLabel.Outside:
                continue
            counts[kind][0] += 1
            counts[kind][1] += not _expo_pair(mu, (chi, eta), q)
        return counts

    counts, dt = _timed(work)
    bad = sum(c[1] for c in counts.values())
    return bad == 0 and dt < 30, f"50 horizontal + 50 vertical pairs, {bad} violations, {dt:.1f} s"


def c12_free_norm():
    mu = AtomicMeasure([0.0, 1.0], [0.5, 0.5])

    def work():
        return max(abs(free_compressed_norm(mu, t) - compressed_norm_two_point(t))
                   for t in (0.1, 0.25, 0.5))

    worst, dt = _timed(work)
    return worst < 1e-6 and dt < 1, f"max error {worst:.1e}, {dt * 1e3:.1f} ms"


CRITERIA = [
    ("1 edge-point exactness", c1_edge_point),
    ("2 atom endpoints", c2_atom_endpoints),
    ("3 round trips", c3_round_trips),
    ("4 exact vs quadrature kernel", c4_exact_vs_quadrature),
    ("5 row-count conservation", c5_row_conservation),
    ("6 kernel vs Monte Carlo", c6_kernel_vs_monte_carlo),
    ("7 sampler equivalence", c7_sampler_equivalence),
    ("8 decay reproduction", c8_decay),
    ("9 steepest-descent geometry", c9_steepest_geometry),
    ("10 root-count law", c10_root_count_law),
    ("11 exponent monotonicity", c11_exponent_monotonicity),
    ("12 free compressed norm", c12_free_norm),
]


def _line(name, ok, detail):
    return f"{'PASS' if ok else 'FAIL'}  criterion {name}: {detail}"


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, fn):
    ok, detail = fn()
    RESULTS[name] = (ok, detail)
    print(_line(name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for name, fn in CRITERIA:
        print(_line(name, *fn()), flush=True)
