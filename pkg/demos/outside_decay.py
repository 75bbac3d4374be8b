"""Exponential decay of the particle density outside the liquid region.

On the line eta = (1 - 1/l)/4 every chi in [1/2, 1) is an outside point of
the two-atom measure.  The diagonal kernel there shrinks like
exp(n * exponent), and the steepest-descent estimate tracks it.

    python3 demos/outside_decay.py
"""

import math

from gtprocess.asymptotics import decay_estimate, feasibility_check, paper_setup
from gtprocess.kernel import ParticleCoord, kernel
from gtprocess.region import exponent

l, chi = 4, 0.5
print(f"l = {l}, chi = {chi}\n")
print("   n     kernel       estimate     ratio   log(K)/n   limit")
for n in (32, 64, 96, 128, 192):
    st = paper_setup(l, n, chi)
    p = ParticleCoord(st.u_n, st.r_n)
    k = kernel(st.x, p, p)
    rep = decay_estimate(st)
    print(f"{n:4d}  {k:.4e}  {rep.kernel_estimate:.4e}  {rep.kernel_estimate / k:6.3f}"
          f"  {math.log(k) / n:+.5f}  {exponent(st.mu, st.chi, st.eta):+.5f}")

# the size conditions behind the estimate only hold for very large n
for n in (96, 8192):
    rep = feasibility_check(paper_setup(2, n, 0.55))
    print(f"\nl = 2, n = {n}: feasible = {rep.passed}")
    for name in rep.failures[:4]:
        print("   fails:", name)
