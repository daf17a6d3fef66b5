"""
Quadratic averages: local structure on cosets
=============================================

A quadratic average fixes one quadratic part and lets the linear part
vary per coset of a subspace W; its complexity is codim(W).  Functions
built this way need not correlate with any single quadratic phase, yet
the local pipeline (model-restricted membership, a subspace inside the
4-fold sumset, quadruple-sampled linear maps, per-coset character
search) recovers the whole object.
"""

import numpy as np

from f2quad.functions import (coherent_quadratic_average, correlation_exact,
                              random_quadratic_phase)
from f2quad.model import find_quadratic_average
from f2quad.bruteforce import best_quadratic_correlation

rng = np.random.default_rng(4)
n = 10

Qp = coherent_quadratic_average(n, 2, rng)
tt = Qp.truth_table()
print(f"planted average: complexity {Qp.complexity}, "
      f"{len(Qp.coset_terms)} coset terms")

# At codimension >= 3 the sign pattern has too high a degree on the
# coset quotient for any single phase to represent the average; at n=6
# this is checkable exhaustively.
q6 = coherent_quadratic_average(6, 3, np.random.default_rng(7))
_, best_phase = best_quadratic_correlation(q6.truth_table())
print(f"(n=6, codim 3) best single-phase correlation with an average: "
      f"{best_phase:.3f} < 1")

# 20% sign noise, then recover.
flips = rng.random(1 << n) < 0.2
tt.values[flips] *= -1.0
res = find_quadratic_average(tt.as_oracle(), 0.25, 0.05, rng,
                             tau_accept=0.12, complexity_cap=4)
corr = correlation_exact(res.average.truth_table(), tt)
print(f"recovered average: complexity {res.complexity}, exact <f, Q> = "
      f"{corr:.3f} (noise ceiling ~0.6), attempts = {res.attempts}")

# Only the correlation and the complexity are contractual: the recovered
# subspace is whatever coset structure the accepted samples exposed.
print(f"recovered W codim = {res.average.W.codim}, "
      f"planted codim = {Qp.W.codim}")
