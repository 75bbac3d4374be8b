import json

import numpy as np
import pytest

from gtprocess.errors import DomainError, PoleError
from gtprocess.measure import (AtomicMeasure, TopRow, cauchy, clustered_top_row,
                               empirical_from_top_row, moment)
from conftest import random_measure


def test_constructor_sorts_and_exposes_support():
    mu = AtomicMeasure([1.0, -1.0], [0.25, 0.75])
    assert list(mu.positions) == [-1.0, 1.0]
    assert list(mu.weights) == [0.75, 0.25]
    assert (mu.a, mu.b, mu.k) == (-1.0, 1.0, 2)


@pytest.mark.parametrize("pos,w", [
    ([0.0], [1.0]),
    ([0.0, 1.0], [0.5, 0.49]),
    ([0.0, 1.0], [1.2, -0.2]),
    ([0.0, 0.0], [0.5, 0.5]),
    ([0.0, np.nan], [0.5, 0.5]),
])
def test_constructor_rejects_bad_input(pos, w):
    with pytest.raises(DomainError):
        AtomicMeasure(pos, w)


def test_weights_not_renormalised():
    with pytest.raises(DomainError):
        AtomicMeasure([0, 1], [0.5, 0.5 + 2e-12])
    AtomicMeasure([0, 1], [0.5, 0.5 + 5e-13])


def test_json_round_trip(tmp_path):
    mu = AtomicMeasure([2.0, -1.0, 0.5], [0.2, 0.5, 0.3])
    path = tmp_path / "m.json"
    path.write_text(json.dumps(mu.to_dict()))
    back = AtomicMeasure.from_json(path)
    assert np.array_equal(back.positions, mu.positions)
    assert np.array_equal(back.weights, mu.weights)


@pytest.mark.parametrize("data", [
    {"atoms": [{"x": 0, "w": 0.5}, {"x": 1, "w": 0.5}], "extra": 1},
    {"atoms": [{"x": 0, "w": 0.5, "y": 2}, {"x": 1, "w": 0.5}]},
    {"atoms": "nope"},
])
def test_json_schema_is_strict(data):
    with pytest.raises(DomainError):
        AtomicMeasure.from_dict(data)


def test_cauchy_values(two_atom):
    assert cauchy(two_atom, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert cauchy(two_atom, 2.0, 1) == pytest.approx(-(0.25 + 0.75 / 9), abs=1e-15)
    assert cauchy(two_atom, 2.0, 1) == pytest.approx(-1 / 3, abs=1e-15)


def test_cauchy_near_single_atom():
    mu = AtomicMeasure([0.0, 1e6], [1 - 1e-12, 1e-12])
    w0 = 0.3 + 0.2j
    assert abs(cauchy(mu, w0) - 1 / w0) < 1e-11


def test_cauchy_pole():
    mu = AtomicMeasure([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(PoleError):
        cauchy(mu, 1.0)
    with pytest.raises(PoleError):
        cauchy(mu, np.array([2.0, 5e-15]))


def test_cauchy_vectorised(two_atom):
    w = np.array([2.0, 3.0 + 1j, -4.0])
    out = cauchy(two_atom, w)
    assert out.shape == (3,)
    assert out[1] == pytest.approx(cauchy(two_atom, 3.0 + 1j))


def test_finite_differences_and_reflection():
    rng = np.random.default_rng(1)
    for _ in range(10):
        mu = random_measure(rng)
        w = complex(mu.b + 0.5 + rng.uniform(0, 2), rng.uniform(-1, 1))
        for k in range(4):
            h = 1e-4
            fd = (cauchy(mu, w + h, k) - cauchy(mu, w - h, k)) / (2 * h)
            exact = cauchy(mu, w, k + 1)
            assert abs(fd - exact) <= 1e-6 * abs(exact) + 1e-10
            assert cauchy(mu, w.conjugate(), k).conjugate() == pytest.approx(cauchy(mu, w, k))


def test_signs_right_of_support():
    rng = np.random.default_rng(2)
    for _ in range(10):
        mu = random_measure(rng)
        w = mu.b + rng.uniform(0.01, 5)
        assert cauchy(mu, w).real > 0
        assert cauchy(mu, w, 1).real < 0


def test_large_w_expansion():
    rng = np.random.default_rng(3)
    for _ in range(10):
        mu = random_measure(rng)
        R = 2 * np.max(np.abs(mu.positions))
        m1, m2 = moment(mu, 1), moment(mu, 2)
        for w in (R * 1.01, R * 3j, -R * 5 + R * 1j):
            err = abs(w * cauchy(mu, w) - 1 - m1 / w)
            assert err <= 2 * m2 / abs(w) ** 2


def test_moments():
    assert moment(AtomicMeasure([1, -1], [0.25, 0.75]), 1) == pytest.approx(-0.5)
    assert moment(AtomicMeasure([1, 0, -1], [1 / 3, 1 / 3, 1 / 3]), 1) == pytest.approx(0, abs=1e-15)
    assert moment(AtomicMeasure([3, 4], [0.5, 0.5]), 0) == 1


def test_empirical_measures():
    mu = empirical_from_top_row(TopRow([1.0, 0.0]))
    assert list(mu.positions) == [0.0, 1.0] and list(mu.weights) == [0.5, 0.5]
    mu3 = empirical_from_top_row(TopRow([3, 2, 1]))
    assert np.allclose(mu3.weights, 1 / 3)
    x = clustered_top_row(AtomicMeasure([-1, 1], [0.75, 0.25]), 8)
    mu8 = empirical_from_top_row(x)
    assert mu8.k == 8 and np.allclose(mu8.weights, 1 / 8)
    assert mu8.b == 1 and mu8.a == -1


def test_clustered_row_layout():
    n = 16
    x = clustered_top_row(AtomicMeasure([-1, 1], [0.75, 0.25]), n).values
    expected_top = [1 - (i - 1) / n ** 2 for i in range(1, n // 4 + 1)]
    expected_bottom = [-1 + (n - i) / n ** 2 for i in range(n // 4 + 1, n + 1)]
    assert np.allclose(x, expected_top + expected_bottom, atol=0, rtol=1e-15)
    with pytest.raises(DomainError):
        clustered_top_row(AtomicMeasure([-1, 1], [0.75, 0.25]), 6)


def test_top_row_strict():
    with pytest.raises(DomainError):
        TopRow([1, 1, 0])
    with pytest.raises(DomainError):
        TopRow([0, 1])
    assert TopRow([2, 1]).n == 2
