"""Finitely atomic probability measures, top rows and Cauchy transforms.

A measure is stored as sorted arrays of atom positions and weights.  The
Cauchy transform and its derivatives are closed-form sums, evaluated
vectorially over arrays of complex points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "AtomicMeasure",
    "TopRow",
    "cauchy",
    "empirical_from_top_row",
    "moment",
    "clustered_top_row",
    "POLE_TOL",
]

POLE_TOL = 1e-14
WEIGHT_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Probability measure with finitely many atoms.

    Parameters
    ----------
    positions : array_like
        Atom positions.  Need not be sorted; they are sorted on construction
        and must be pairwise distinct.
    weights : array_like
        Positive weights summing to one within ``1e-12``.
    """

    positions: np.ndarray
    weights: np.ndarray

    def __init__(self, positions, weights):
        x = np.asarray(positions, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if x.shape != w.shape:
            raise DomainError("positions and weights differ in length")
        if x.size < 2:
            raise DomainError("need at least two distinct atoms")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise DomainError("non-finite atom data")
        if np.any(w <= 0):
            raise DomainError("weights must be positive")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError(f"weights sum to {w.sum()!r}, not 1")
        order = np.argsort(x, kind="stable")
        x, w = x[order], w[order]
        if np.any(np.diff(x) <= 0):
            raise DomainError("atom positions must be distinct")
        object.__setattr__(self, "positions", _frozen(x))
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def from_atoms(cls, atoms: Iterable[Sequence[float]]) -> "AtomicMeasure":
        """Build from ``(position, weight)`` pairs."""
        pairs = [(float(p), float(q)) for p, q in atoms]
        return cls([p for p, _ in pairs], [q for _, q in pairs])

    @classmethod
    def from_dict(cls, data: dict) -> "AtomicMeasure":
        """Build from ``{"atoms": [{"x": .., "w": ..}, ...]}``."""
        if not isinstance(data, dict) or set(data) != {"atoms"}:
            raise DomainError("measure object must have exactly the key 'atoms'")
        atoms = data["atoms"]
        if not isinstance(atoms, list):
            raise DomainError("'atoms' must be a list")
        pairs = []
        for item in atoms:
            if not isinstance(item, dict) or set(item) != {"x", "w"}:
                raise DomainError("each atom must have exactly the keys 'x' and 'w'")
            pairs.append((item["x"], item["w"]))
        return cls.from_atoms(pairs)

    @classmethod
    def from_json(cls, path) -> "AtomicMeasure":
        with open(Path(path), "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"atoms": [{"x": float(p), "w": float(q)}
                          for p, q in zip(self.positions, self.weights)]}

    @property
    def k(self) -> int:
        return int(self.positions.size)

    @property
    def a(self) -> float:
        """Lower end of the support."""
        return float(self.positions[0])

    @property
    def b(self) -> float:
        """Upper end of the support."""
        return float(self.positions[-1])

    @property
    def mean(self) -> float:
        return float(np.dot(self.weights, self.positions))

    def mass_at(self, x: float, tol: float = 0.0) -> float:
        """Weight of the atom within ``tol`` of ``x``, or zero."""
        i = self.atom_index(x, tol)
        return 0.0 if i is None else float(self.weights[i])

    def atom_index(self, x: float, tol: float = 0.0):
        """Index of the atom within ``tol`` of ``x``, or ``None``."""
        d = np.abs(self.positions - x)
        i = int(np.argmin(d))
        return i if d[i] <= tol else None

    def without_atom(self, i: int):
        """Positions and weights with atom ``i`` removed (not renormalised)."""
        keep = np.arange(self.k) != i
        return self.positions[keep], self.weights[keep]

    def __repr__(self):
        body = ", ".join(f"({p:g}, {q:g})" for p, q in zip(self.positions, self.weights))
        return f"AtomicMeasure([{body}])"


@dataclass(frozen=True, eq=False)
class TopRow:
    """Strictly decreasing vector fixing the top row of a pattern."""

    values: np.ndarray

    def __init__(self, values):
        x = np.asarray(values, dtype=float).ravel()
        if x.size < 1:
            raise DomainError("top row must be non-empty")
        if not np.all(np.isfinite(x)):
            raise DomainError("top row must be finite")
        if np.any(np.diff(x) >= 0):
            raise DomainError("top row must be strictly decreasing")
        object.__setattr__(self, "values", _frozen(x))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"TopRow(n={self.n}, max={self.values[0]:g}, min={self.values[-1]:g})"


def _check_poles(w, positions):
    d = np.abs(np.asarray(w)[..., None] - positions)
    if np.any(d < POLE_TOL):
        raise PoleError("evaluation point coincides with an atom")


def cauchy_sum(positions, weights, w, k=0):
    """``sum_i weights_i * d^k/dw^k 1/(w - positions_i)`` without pole checks."""
    w = np.asarray(w, dtype=complex)
    sign_fact = (-1.0) ** k * math.factorial(k)
    return sign_fact * np.sum(weights / (w[..., None] - positions) ** (k + 1), axis=-1)


def cauchy(mu: AtomicMeasure, w, k: int = 0):
    """k-th derivative of the Cauchy transform of ``mu`` at ``w``.

    Accepts a scalar or an array of points.  Raises `PoleError` when a point
    lies within ``1e-14`` of an atom.
    """
    if k < 0:
        raise DomainError("derivative order must be non-negative")
    _check_poles(w, mu.positions)
    out = cauchy_sum(mu.positions, mu.weights, w, k)
    return complex(out) if np.ndim(out) == 0 else out


def empirical_from_top_row(x: TopRow) -> AtomicMeasure:
    """Empirical measure with weight ``1/n`` at each top-row entry."""
    n = x.n
    return AtomicMeasure(x.values, np.full(n, 1.0 / n))


def moment(mu: AtomicMeasure, k: int) -> float:
    if k < 0:
        raise DomainError("moment order must be non-negative")
    return float(np.dot(mu.weights, mu.positions ** k))


def clustered_top_row(mu: AtomicMeasure, n: int) -> TopRow:
    """Top row whose entries cluster at the atoms of ``mu`` with spacing ``1/n^2``.

    The atom at ``b`` receives the points ``b, b - 1/n^2, ...``; every other
    atom ``c`` receives ``c, c + 1/n^2, ...``.  Each ``n * weight`` must be an
    integer.
    """
    counts = mu.weights * n
    m = np.rint(counts).astype(int)
    if np.any(np.abs(counts - m) > 1e-9) or m.sum() != n:
        raise DomainError("n times each weight must be an integer")
    h = 1.0 / n ** 2
    pts = []
    for i, (c, mi) in enumerate(zip(mu.positions, m)):
        step = -h if i == mu.k - 1 else h
        pts.extend(c + step * np.arange(mi))
    vals = np.sort(np.array(pts))[::-1]
    return TopRow(vals)
