"""Expected particle counts from the kernel against a Monte Carlo estimate.

The kernel's diagonal integrates to the expected number of particles of a
row in an interval.  The eigenvalue minor process gives an independent
estimate of the same number.

    python3 demos/kernel_vs_sampler.py
"""

from gtprocess.kernel import expected_count
from gtprocess.measure import TopRow
from gtprocess.sampler import empirical_count, sample_minor_batch

x = TopRow([1, 1 - 1 / 36, -1 + 3 / 36, -1 + 2 / 36, -1 + 1 / 36, -1])
batch = sample_minor_batch(x, 100_000, rng=2024, workers=4)
print(f"{len(batch)} patterns, all interlacing: {bool(batch.interlacing_ok().all())}\n")

print("row  interval        kernel     sampled   stderr   z")
for r in (2, 3, 4):
    for iv in ((-1.0, -0.5), (-0.5, 0.5), (0.5, 1.0)):
        k = expected_count(x, r, iv)
        mean, se = empirical_count(batch, r, iv)
        print(f"{r:3d}  ({iv[0]:+.1f}, {iv[1]:+.1f})  {k:9.5f}  {mean:9.5f}  {se:.5f}  {(mean - k) / se:+.2f}")
