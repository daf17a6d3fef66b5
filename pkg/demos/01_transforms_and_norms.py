"""
Walsh-Hadamard transforms and uniformity norms
==============================================

The character basis of F_2^n consists of the linear phases
(-1)^<alpha, x>.  The transform expands a truth table over it, Parseval
ties the spectrum back to the function, and the U^2/U^3 norms measure
how far a function is from linear and quadratic structure.
"""

import numpy as np

from f2quad import (exact_u2, exact_u3, random_boolean_table,
                    random_quadratic_phase, wht)
from f2quad.functions import make_noisy_codeword

rng = np.random.default_rng(0)
n = 10

# A random Boolean function has a flat, noisy spectrum.
f = random_boolean_table(n, rng)
spec = wht(f)
print(f"random f:  max |f^(a)| = {np.max(np.abs(spec.coefficients)):.3f}, "
      f"Parseval sum = {spec.parseval_sum():.12f}")

# A quadratic phase is maximally structured at degree 2: its U^3 norm is
# exactly 1, while its ordinary spectrum is perfectly flat.
q = random_quadratic_phase(n, rng)
tq = q.truth_table()
print(f"quadratic phase: U2 = {exact_u2(tq):.4f}, U3 = {exact_u3(tq):.4f}, "
      f"max |f^| = {np.max(np.abs(wht(tq).coefficients)):.4f}")

# Uniformity norms are nested: U2 <= U3 always.
print(f"random f:  U2 = {exact_u2(f):.4f} <= U3 = {exact_u3(f):.4f}")

# Flipping each entry of the codeword with probability 1/2 - eps leaves
# correlation ~2 eps, and the U^3 norm keeps seeing the structure even
# though the function is far beyond the unique- and list-decoding radii.
for eps in (0.4, 0.25, 0.1):
    noisy = make_noisy_codeword(q, eps, rng)
    print(f"noisy codeword (eps={eps}):  distance = "
          f"{np.mean(noisy.values != tq.values):.3f},  U3 = "
          f"{exact_u3(noisy):.3f}")
