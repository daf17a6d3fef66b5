"""
Decomposing a bounded function into quadratic pieces
====================================================

The truncation loop writes g = sum_i c_i q_i + e + f where the q_i are
quadratic phases (or averages), f has small U^3 norm and e is an l1
error from clamping the running residual to [-B, B].  The loop needs
only a finder that produces a correlated quadratic object whenever the
residual's U^3 mass is noticeable; at most 1/eta^2 terms ever appear,
by a potential-function argument that can be audited exactly at desk
sizes.
"""

import numpy as np

from f2quad.functions import (TableOracle, TruthTable, correlation_exact,
                              estimate_correlation, random_quadratic_phase)
from f2quad.fourier import exact_u3
from f2quad.decompose import decompose, decompose_full

rng = np.random.default_rng(5)
n, bound, eps, eta = 10, 2.0, 0.3, 0.5

# Mix of two phases; a dictionary finder keeps this demo quick while the
# loop contract (reconstruction, k, l1, residual norm) is checked exactly.
q1, q2 = random_quadratic_phase(n, rng), random_quadratic_phase(n, rng)
gv = 0.5 * q1.truth_table().values + 0.5 * q2.truth_table().values
g = TableOracle(gv, n, bound=1.0)


def finder(oracle, rng_):
    best = None
    for cand in (q1, q2):
        est = estimate_correlation(oracle, cand.as_oracle(), 0.02, 0.01, rng_)
        if abs(est) >= 0.3 and (best is None or abs(est) > abs(best[1])):
            best = (cand, est)
    if best is None:
        return None
    return best[0] if best[1] > 0 else best[0].negated()


dec = decompose(g, eps, bound, 0.05, finder, rng, eta=eta)
xs = np.arange(1 << n, dtype=np.uint64)
recon = dec.reconstruction_many(xs)
raw = dec.residual_oracle().raw_many(xs)
f_vals = np.clip(raw, -bound, bound)
print(f"terms: k = {dec.k} (cap {int(1/eta**2)})")
print(f"pointwise reconstruction error: {np.max(np.abs(recon - gv)):.2e}")
print(f"exact ||e||_1 = {np.mean(np.abs(raw - f_vals)):.4f} "
      f"(bound 1/2B = {1/(2*bound)})")
print(f"exact residual U3 = {exact_u3(TruthTable(f_vals, n)):.4f} "
      f"(target <= {eps})")
for line in dec.steps_log:
    print(" ", line)

# End to end with the real finder: each bounded residual is randomly
# rounded to +-1 and handed to the phase finder at the rescaled norm
# target.  A bound close to 1 keeps the rounding loss small.
print("\nfull pipeline on an exact codeword (bound 1.25):")
q = random_quadratic_phase(n, rng)
g2 = TableOracle(q.truth_table().values, n, bound=1.0)
dec2 = decompose_full(g2, 0.3, 1.25, 0.1, rng, mode="phases",
                      coefficient_mode="measured", tau_accept=0.3)
for coeff, obj in dec2.terms:
    print(f"  coeff {coeff:.3f}, term == planted phase: {obj == q}")
