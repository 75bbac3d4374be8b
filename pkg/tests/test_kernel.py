
import numpy as np
import pytest

from gtprocess.errors import ContourError, DegenerateError, DomainError, SizeError
from gtprocess.kernel import (ContourSpec, ParticleCoord, choose_contours, expected_count,
                              jn_quadrature, kernel, kernel_quadrature, ktilde_exact, phi)
from gtprocess.measure import TopRow
from oracles import kernel_sympy

P = ParticleCoord


def test_phi_examples():
    assert phi(3, 2, 0, 1) == 0
    assert phi(2, 3, 0, 1) == 1
    assert phi(1, 4, 0, 2) == 2


def test_phi_vanishes_below_diagonal():
    for r in range(1, 6):
        for s in range(1, 8):
            for u, v in ((0.5, 0.5), (1.0, 0.2), (3.0, -1.0)):
                assert phi(r, s, u, v) == 0


def test_two_point_kernel():
    x = TopRow([1, 0])
    assert kernel(x, P(0.5, 1), P(0.5, 1)) == pytest.approx(1, abs=1e-14)
    for u in (-0.5, 1.5):
        assert kernel(x, P(u, 1), P(u, 1)) == 0


def test_exact_matches_symbolic_oracle():
    rng = np.random.default_rng(5)
    for _ in range(12):
        n = int(rng.integers(3, 8))
        x = np.sort(rng.uniform(-2, 2, n))[::-1]
        r, s = (int(v) for v in rng.integers(1, n, size=2))
        u, v = rng.uniform(-2.2, 2.2, size=2)
        got = kernel(TopRow(x), P(u, r), P(v, s))
        ref = kernel_sympy(x, u, r, v, s)
        assert got == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_frozen_oracle_values():
    x = TopRow([3, 2.5, 1, 0.2, -1])
    assert kernel(x, P(0.7, 2), P(1.3, 3)) == pytest.approx(-0.049143633540372, rel=1e-12)
    assert kernel(x, P(1.3, 3), P(0.7, 1)) == pytest.approx(-1.1273291925465838, rel=1e-12)


def test_exact_size_gate():
    x = TopRow(np.arange(41, 0, -1) / 41)
    with pytest.raises(SizeError):
        ktilde_exact(x, P(0.5, 3), P(0.5, 3))


def test_degenerate_position():
    x = TopRow([1, 0])
    with pytest.raises(DegenerateError):
        kernel(x, P(1.0, 1), P(0.5, 1))
    with pytest.raises(DomainError):
        kernel(x, P(0.5, 2), P(0.5, 1))


def test_quadrature_example():
    x = TopRow(np.arange(6, 0, -1) / 6)
    p = P(0.4, 3)
    exact = kernel(x, p, p)
    assert exact == pytest.approx(kernel_sympy(x.values, 0.4, 3, 0.4, 3), rel=1e-12)
    assert kernel_quadrature(x, p, p) == pytest.approx(exact, rel=1e-8)
    z = kernel_quadrature(x, p, p, return_complex=True)
    assert abs(z.imag) < 1e-9 * abs(z.real)


def test_quadrature_rotation_invariance():
    x = TopRow(np.arange(6, 0, -1) / 6)
    p = P(0.4, 3)
    spec = choose_contours(x, 0.4, 0.4, 3, 3)
    a = jn_quadrature(x, p, p, spec)
    b = jn_quadrature(x, p, p, spec, phase=0.37)
    assert abs(a - b) < 1e-10 * abs(a)


def test_exact_and_quadrature_agree_randomly():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n = int(rng.integers(3, 21))
        x = np.sort(rng.uniform(-1, 1, n))[::-1]
        while np.min(-np.diff(x)) < 1e-3:
            x = np.sort(rng.uniform(-1, 1, n))[::-1]
        r = int(rng.integers(1, n - 1)) if n > 2 else 1
        u = rng.uniform(x[-1], x[0])
        while np.min(np.abs(x - u)) < 1e-3:
            u = rng.uniform(x[-1], x[0])
        top = TopRow(x)
        a = kernel(top, P(u, r), P(u, r))
        b = kernel_quadrature(top, P(u, r), P(u, r))
        assert abs(a - b) / max(1, abs(a)) < 1e-6


def test_off_diagonal_quadrature():
    x = TopRow([3, 2.5, 1, 0.2, -1])
    for p, q in ((P(0.7, 2), P(1.3, 3)), (P(1.3, 3), P(0.7, 1)), (P(-0.5, 1), P(2.0, 3))):
        assert kernel_quadrature(x, p, q) == pytest.approx(kernel(x, p, q), rel=1e-7, abs=1e-10)


def test_choose_contours_examples():
    x = TopRow([1, 0])
    spec = choose_contours(x, 0.5, 0.5)
    assert abs(1 - spec.inner_center) < spec.inner_radius
    assert abs(0 - spec.inner_center) > spec.inner_radius
    assert abs(0.5 - spec.outer_center) < spec.outer_radius
    assert abs(spec.inner_center - spec.outer_center) + spec.inner_radius < spec.outer_radius
    assert spec.points == 512
    with pytest.raises(DegenerateError):
        choose_contours(x, 2.0, 0.5)
    assert kernel_quadrature(x, P(2.0, 1), P(0.5, 1)) == 0
    low = choose_contours(x, -0.5, 0.5)
    assert np.all(np.abs(x.values - low.inner_center) < low.inner_radius)


def test_bad_contours_rejected():
    x = TopRow([1, 0])
    p = P(0.5, 1)
    with pytest.raises(ContourError):
        jn_quadrature(x, p, p, ContourSpec(0.5, 1.0, 0.5, 3.0))
    with pytest.raises(ContourError):
        jn_quadrature(x, p, p, ContourSpec(1.0, 0.2, 1.0, 0.3))


def test_expected_count_examples():
    assert expected_count(TopRow([1, 0]), 1, (0, 1)) == pytest.approx(1, abs=1e-12)
    x = TopRow([2, 1, 0])
    assert expected_count(x, 2, (-5, 5)) == pytest.approx(2, abs=1e-10)


def test_row_count_conservation():
    rng = np.random.default_rng(3)
    for n in range(2, 11):
        x = TopRow(np.sort(rng.uniform(-1, 1, n))[::-1])
        for r in range(1, n):
            got = expected_count(x, r, (x.values[-1] - 1, x.values[0] + 1))
            assert got == pytest.approx(r, abs=1e-4)


def test_diagonal_kernel_nonnegative():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = int(rng.integers(3, 12))
        x = TopRow(np.sort(rng.uniform(-1, 1, n))[::-1])
        for r in range(1, n):
            for u in np.linspace(x.values[-1] + 1e-3, x.values[0] - 1e-3, 25):
                if np.min(np.abs(x.values - u)) < 1e-9:
                    continue
                assert kernel(x, P(u, r), P(u, r)) > -1e-8


def test_expected_count_matches_integrated_oracle():
    x = [2.0, 1.0, 0.0]
    nodes, weights = np.polynomial.legendre.leggauss(8)
    ref = 0.0
    for a, b in ((0.0, 0.5),):
        for t, w in zip(nodes, weights):
            u = 0.5 * (a + b) + 0.5 * (b - a) * t
            ref += 0.5 * (b - a) * w * kernel_sympy(x, u, 1, u, 1)
    assert expected_count(TopRow(x), 1, (0, 0.5)) == pytest.approx(ref, rel=1e-12)
    assert ref == pytest.approx(0.125, abs=1e-12)


def test_quadrature_path_above_the_gate():
    n = 48
    x = TopRow(np.arange(n, 0, -1) / n)
    p = P(0.51, n // 2)
    exact = ktilde_exact(x, p, p, max_n=n)
    assert kernel(x, p, p) == pytest.approx(exact, rel=1e-8)
