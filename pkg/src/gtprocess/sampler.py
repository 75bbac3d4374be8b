"""Monte Carlo samplers for Gelfand-Tsetlin patterns with a fixed top row.

Two independent routes produce the uniform law on the polytope of patterns:

* the eigenvalue minor process: conjugate ``diag(x)`` by a Haar unitary and
  take the spectra of the leading principal minors;
* rejection from a box, feasible for very small ``n`` only.

Randomness comes from ``numpy.random.Generator`` objects.  Parallel or
batched work draws each block from its own child of a ``SeedSequence``, so
results do not depend on how the blocks are scheduled.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, EigensolverError, RejectionBudgetError
from .measure import TopRow

__all__ = [
    "GTPattern", "PatternBatch", "RngSeed",
    "haar_unitary", "sample_minor_process", "sample_minor_batch",
    "sample_gt_uniform_rejection", "sample_rejection_batch",
    "empirical_count", "row_counts", "write_patterns", "read_patterns",
    "REJECTION_BUDGET",
]

REJECTION_BUDGET = 10 ** 7
INTERLACE_SLACK = 1e-9
_HEADER = struct.Struct("<8sqq")
_MAGIC = b"GTPATT01"


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit seed plus a stream index; equal pairs give equal streams."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2 ** 64 - 1), spawn_key=(int(self.stream),))
        return np.random.default_rng(ss)


@dataclass(frozen=True)
class GTPattern:
    """Rows ``y^(1), ..., y^(n)``; row ``r`` holds ``r`` non-increasing reals."""

    rows: tuple

    def __post_init__(self):
        for r, row in enumerate(self.rows, start=1):
            if len(row) != r:
                raise DomainError(f"row {r} has {len(row)} entries")

    @property
    def n(self) -> int:
        return len(self.rows)

    def row(self, r: int) -> np.ndarray:
        return np.asarray(self.rows[r - 1])

    def interlaces(self, slack: float = INTERLACE_SLACK) -> bool:
        for r in range(1, self.n):
            lo, hi = np.asarray(self.rows[r - 1]), np.asarray(self.rows[r])
            if np.any(hi[:-1] < lo - slack) or np.any(lo < hi[1:] - slack):
                return False
        return True

    def flat(self) -> np.ndarray:
        return np.concatenate([np.asarray(r, dtype=float) for r in self.rows])


class PatternBatch:
    """Many patterns of the same size stored as one ``(count, n(n+1)/2)`` array.

    Row ``r`` of every pattern occupies columns ``r(r-1)/2 .. r(r+1)/2``.
    """

    def __init__(self, data: np.ndarray, n: int):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != n * (n + 1) // 2:
            raise DomainError("pattern array has the wrong shape")
        self.data = data
        self.n = int(n)

    def __len__(self):
        return self.data.shape[0]

    def row(self, r: int) -> np.ndarray:
        if not 1 <= r <= self.n:
            raise DomainError(f"row {r} outside 1..{self.n}")
        lo = r * (r - 1) // 2
        return self.data[:, lo:lo + r]

    def pattern(self, i: int) -> GTPattern:
        return GTPattern(tuple(tuple(self.row(r)[i].tolist()) for r in range(1, self.n + 1)))

    def __iter__(self):
        for i in range(len(self)):
            yield self.pattern(i)

    def interlacing_ok(self, slack: float = INTERLACE_SLACK) -> np.ndarray:
        ok = np.ones(len(self), dtype=bool)
        for r in range(1, self.n):
            lo, hi = self.row(r), self.row(r + 1)
            ok &= np.all(hi[:, :-1] >= lo - slack, axis=1)
            ok &= np.all(lo >= hi[:, 1:] - slack, axis=1)
        return ok

    @classmethod
    def concat(cls, batches: Sequence["PatternBatch"]) -> "PatternBatch":
        return cls(np.concatenate([b.data for b in batches]), batches[0].n)


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return np.random.default_rng(rng)


def _haar(n: int, rng: np.random.Generator, count: Optional[int] = None) -> np.ndarray:
    shape = (n, n) if count is None else (count, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def haar_unitary(n: int, rng=None) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary matrix."""
    if n < 1:
        raise DomainError("n must be at least 1")
    return _haar(int(n), _rng(rng))


def _minor_spectra(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Patterns from a stack of unitaries ``u`` of shape ``(count, n, n)``."""
    count, n, _ = u.shape
    h = (u * x[None, None, :]) @ np.conj(np.swapaxes(u, 1, 2))
    out = np.empty((count, n * (n + 1) // 2))
    try:
        for r in range(1, n):
            ev = np.linalg.eigvalsh(h[:, :r, :r])
            lo = r * (r - 1) // 2
            out[:, lo:lo + r] = ev[:, ::-1]
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    out[:, n * (n - 1) // 2:] = x
    return out


def sample_minor_process(x: TopRow, rng=None) -> GTPattern:
    """One pattern from the eigenvalue minor process with top row ``x``."""
    return sample_minor_batch(x, 1, rng).pattern(0)


def _blocked(count, block, seed: np.random.SeedSequence, worker_fn, workers):
    nblocks = max(1, -(-count // block))
    children = seed.spawn(nblocks)
    sizes = [min(block, count - i * block) for i in range(nblocks)]
    jobs = list(zip(children, sizes))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: worker_fn(np.random.default_rng(job[0]), job[1]), jobs))
    else:
        parts = [worker_fn(np.random.default_rng(c), m) for c, m in jobs]
    return parts


def _seed_entropy(rng):
    if isinstance(rng, RngSeed):
        return np.random.SeedSequence(int(rng.seed) & (2 ** 64 - 1), spawn_key=(int(rng.stream),))
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(2 ** 63)))
    return np.random.SeedSequence(rng)


def sample_minor_batch(x: TopRow, count: int, rng=None, block: int = 4096,
                       workers: int = 1) -> PatternBatch:
    """``count`` independent minor-process patterns.

    Work is split into blocks of ``block`` samples, each with its own child
    seed, so the output is the same for every ``workers`` value.
    """
    xv = np.asarray(x.values, dtype=float)
    n = xv.size
    if count < 1:
        raise DomainError("count must be positive")

    def work(g, m):
        return _minor_spectra(xv, _haar(n, g, m))

    parts = _blocked(int(count), int(block), _seed_entropy(rng), work, workers)
    return PatternBatch(np.concatenate(parts), n)


def _rejection_block(xv, g, m, budget):
    n = xv.size
    lo, hi = xv[-1], xv[0]
    out = np.empty((m, n * (n + 1) // 2))
    out[:, n * (n - 1) // 2:] = xv
    filled = 0
    used = 0
    while filled < m:
        trial = max(64, 4 * (m - filled))
        if used + trial > budget:
            trial = budget - used
            if trial <= 0:
                raise RejectionBudgetError(f"rejection budget of {budget} proposals exhausted")
        used += trial
        rows = []
        ok = np.ones(trial, dtype=bool)
        upper = np.broadcast_to(xv, (trial, n))
        for r in range(n - 1, 0, -1):
            y = -np.sort(-g.uniform(lo, hi, size=(trial, r)), axis=1)
            ok &= np.all(upper[:, :-1] >= y, axis=1) & np.all(y >= upper[:, 1:], axis=1)
            rows.append(y)
            upper = y
        k = min(int(ok.sum()), m - filled)
        if k:
            idx = np.flatnonzero(ok)[:k]
            for r, y in zip(range(n - 1, 0, -1), rows):
                c = r * (r - 1) // 2
                out[filled:filled + k, c:c + r] = y[idx]
            filled += k
    return out


def sample_gt_uniform_rejection(x: TopRow, rng=None, budget: int = REJECTION_BUDGET) -> GTPattern:
    """One uniform pattern by rejection from the box ``[x_n, x_1]``.

    Each lower row is drawn i.i.d. uniform and sorted; the draw is accepted
    when every pair of consecutive rows interlaces.  Limited to ``n <= 5``.
    """
    return sample_rejection_batch(x, 1, rng, budget=budget).pattern(0)


def sample_rejection_batch(x: TopRow, count: int, rng=None, block: int = 4096,
                           workers: int = 1, budget: int = REJECTION_BUDGET) -> PatternBatch:
    """``count`` uniform patterns by rejection; ``budget`` caps proposals per block."""
    xv = np.asarray(x.values, dtype=float)
    if xv.size > 5:
        raise DomainError("rejection sampling is limited to n <= 5")
    if count < 1:
        raise DomainError("count must be positive")

    def work(g, m):
        return _rejection_block(xv, g, m, budget)

    parts = _blocked(int(count), int(block), _seed_entropy(rng), work, workers)
    return PatternBatch(np.concatenate(parts), xv.size)


def row_counts(patterns, r: int, interval) -> np.ndarray:
    """Number of row-``r`` entries in the closed interval, per pattern."""
    lo, hi = map(float, interval)
    if not lo <= hi:
        raise DomainError("interval must satisfy lo <= hi")
    if isinstance(patterns, PatternBatch):
        y = patterns.row(r)
    else:
        y = np.array([np.asarray(p.row(r)) for p in patterns])
    return np.sum((y >= lo) & (y <= hi), axis=1)


def empirical_count(patterns, r: int, interval) -> tuple:
    """Sample mean and standard error of the row-``r`` count in ``interval``."""
    c = row_counts(patterns, r, interval)
    if c.size < 2:
        raise DomainError("need at least two patterns")
    mean = float(c.mean())
    se = float(c.std(ddof=1) / np.sqrt(c.size))
    return mean, se


def write_patterns(path, batch: PatternBatch):
    """Binary dump: header (magic, n, count) then row-major little-endian float64."""
    with open(Path(path), "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, batch.n, len(batch)))
        fh.write(np.ascontiguousarray(batch.data, dtype="<f8").tobytes())


def read_patterns(path) -> PatternBatch:
    with open(Path(path), "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, n, count = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise DomainError("not a pattern dump")
        data = np.frombuffer(fh.read(), dtype="<f8")
    width = n * (n + 1) // 2
    if data.size != count * width:
        raise DomainError("truncated pattern dump")
    return PatternBatch(data.reshape(count, width).copy(), n)
