"""
Self-correction beyond the list-decoding radius
===============================================

Order-2 Reed-Muller codewords are the truth tables of quadratic phases.
At fractional distance 1/2 - eps from a codeword, exponentially many
codewords may sit at comparable distance, so list decoding is hopeless;
finding any one close codeword is still possible.  The pipeline:
sample a choice function from derivative spectra, test sandwich
membership to mine the somewhat-linear part, read a linear map off the
accepted span, symmetrize, and integrate back to a quadratic phase.
"""

import time

import numpy as np

from f2quad import find_quadratic, random_quadratic_phase
from f2quad.functions import correlation_exact, make_noisy_codeword
from f2quad.bruteforce import best_quadratic_correlation

rng = np.random.default_rng(2)

# Noiseless sanity: the planted phase comes back exactly.
n = 10
q = random_quadratic_phase(n, rng)
res = find_quadratic(q.truth_table().as_oracle(), 0.5, 0.05, rng)
print(f"noiseless n={n}: recovered == planted: {res.phase == q} "
      f"(attempt {res.attempts}, ~{res.queries:.2e} queries)")

# Distance ~ 1/4 from the codeword (correlation ~ 1/2).
nz = make_noisy_codeword(q, 0.25, rng)
t0 = time.time()
res = find_quadratic(nz.as_oracle(), 0.25, 0.05, rng, tau_accept=0.12)
corr = correlation_exact(res.phase.truth_table(), nz)
corr_planted = correlation_exact(res.phase.truth_table(), q.truth_table())
print(f"noisy n={n} (eps=0.25): returned corr = {corr:.3f}, "
      f"corr with planted = {corr_planted:.3f}, {time.time()-t0:.1f}s")

# At n=6 the exhaustive search over all quadratic phases is feasible,
# so the returned phase can be compared against the true optimum.
q6 = random_quadratic_phase(6, rng)
nz6 = make_noisy_codeword(q6, 0.25, rng)
_, opt = best_quadratic_correlation(nz6)
res6 = find_quadratic(nz6.as_oracle(), 0.25, 0.05, rng, tau_accept=0.12)
corr6 = correlation_exact(res6.phase.truth_table(), nz6)
print(f"noisy n=6: returned corr = {corr6:.3f}, exhaustive optimum = "
      f"{opt:.3f} (ratio {corr6/opt:.2f})")

# A random table has no quadratic structure: the norm gate rejects.
from f2quad.functions import random_boolean_table
flat = random_boolean_table(12, rng)
res = find_quadratic(flat.as_oracle(), 0.7, 0.05, rng)
print(f"random table at eps=0.7: {'bottom' if res is None else 'found?!'}")
