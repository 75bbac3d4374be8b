"""Phase diagram of the two-atom measure 1/4 delta_1 + 3/4 delta_-1.

Prints a coarse character map of the labels over [-1, 1] x (0, 1),
followed by a few points of the edge curve.

    python3 demos/region_map.py
"""

from collections import Counter

import numpy as np

from gtprocess.asymptotics import two_atom_measure
from gtprocess.region import classify, edge_curve

SYMBOL = {"Liquid": ".", "Outside": "#", "Other": " "}

mu = two_atom_measure()
nx, ny = 64, 24
xs = -1 + (np.arange(nx) + 0.5) * 2 / nx
ys = (np.arange(ny) + 0.5) / ny

counts = Counter()
lines = []
for eta in ys[::-1]:
    row = []
    for chi in xs:
        label = classify(mu, chi, eta).label.value
        counts[label] += 1
        row.append(SYMBOL.get(label, "+"))
    lines.append(f"{eta:5.2f} |" + "".join(row))
print("\n".join(lines))
print("       " + "-" * nx)
print("label counts:", dict(counts))

# the edge right of the support: (chi, eta) -> (moment 1, 0) as t grows
print("\n  t        chi        eta      branch")
for t in (1.05, 1.5, 2.0, 3.0, 10.0, -1.5, -3.0):
    chi, eta, branch = edge_curve(mu, t)
    print(f"{t:6.2f}  {chi:9.5f}  {eta:9.5f}   {branch}")
