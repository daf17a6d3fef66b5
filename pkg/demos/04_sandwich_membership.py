"""
Sandwich membership testing on the choice graph
===============================================

The structured subset promised by additive combinatorics (large, small
doubling) is exponential-sized, so it is never materialized.  Instead a
sampling test answers membership queries with a two-sided guarantee:
answers 1 land inside a small-doubling superset, answers 0 outside a
dense subset.  At n=10 the trimmed neighborhoods can be computed
exhaustively and the guarantee audited probe by probe.
"""

import numpy as np

from f2quad.gf2 import SubspaceF2
from f2quad.functions import random_quadratic_phase
from f2quad.bsg import PhiRecord, PhiSampler, bsg_test, choose_bsg_params
from f2quad.bruteforce import exhaustive_coefficients, exhaustive_t_set

rng = np.random.default_rng(3)
n = 10

# Plant partial linearity: the choice table equals the symmetric-matrix
# map on a codim-1 subspace and is uniformly random elsewhere.
q = random_quadratic_phase(n, rng)
B = q.symmetric_matrix()
H = SubspaceF2([int(rng.integers(1, 1 << n))], n)
xs = np.arange(1 << n, dtype=np.uint64)
phi = np.asarray(B.mul_vec_many(xs))
outside = ~H.contains_many(xs)
phi[outside] = rng.integers(0, 1 << n, size=int(outside.sum()),
                            dtype=np.uint64)

tt = q.truth_table()
sam = PhiSampler(tt.as_oracle(), 0.15, 0.1, rng,
                 t_bucket=1536, t_leaf=1024, repeats=1, live_cap=20)
for x in range(1 << n):
    sam.memo[x] = PhiRecord(int(phi[x]), 1.0, True)

rho = 0.2
params = choose_bsg_params(None, rng, rho=rho)
print(f"drawn thresholds: gamma = {params.gamma:.4f}, mu = {params.mu:.5f}, "
      f"rho1 = {params.rho1:.4f}, rho2 = {params.rho2:.4f}")

# Exhaustive ground truth: the nested pair of trimmed neighborhoods.
x_u = 0
while not H.contains(x_u):
    x_u = int(rng.integers(0, 1 << n))
u = (x_u, int(phi[x_u]))
coeff = exhaustive_coefficients(tt, phi)
g, mu = params.gamma, params.mu
inner = exhaustive_t_set(tt, phi, x_u, g + mu, g - mu, g + mu,
                         1.1 * rho ** 3, 0.9 * rho ** 2, coeff)
outer = exhaustive_t_set(tt, phi, x_u, g, g, g, rho ** 3, rho ** 2, coeff)
print(f"|inner| = {inner.size}, |outer| = {outer.size}, nested: "
      f"{bool(np.all(outer.flags[inner.flags]))}")

agree = accepts = 0
probes = 200
for _ in range(probes):
    y = int(rng.integers(0, 1 << n))
    out = bsg_test(sam, u, (y, int(phi[y])), params, rng)
    accepts += out
    agree += bool(outer.flags[y]) if out else not bool(inner.flags[y])
print(f"{accepts}/{probes} probes accepted; sandwich honored on "
      f"{agree}/{probes}")
