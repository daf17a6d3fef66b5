"""Oracle-access functions on F_2^n, truth tables, and quadratic objects.

Oracles are query-counted and support batched evaluation: every query
path ultimately goes through ``query_many`` on a uint64 point array, so
sampling estimators can run vectorized.  Truth-table-backed oracles are
immutable and replay-deterministic.  The oracle stack handles n up to
MAX_ORACLE_N (points are packed in single machine words); the gf2 core
alone goes higher.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .gf2 import (MAX_ENUM_N, MatF2, SubspaceF2, check_dim, dot, dot_many,
                  parity_many, sign_many, symmetric_split)

MAX_ORACLE_N = 63


def rand_points(rng, n: int, size: int) -> np.ndarray:
    """size uniform points of F_2^n as uint64."""
    return rng.integers(0, 1 << n, size=size, dtype=np.uint64)


def hoeffding_samples(gamma: float, delta: float) -> int:
    """Samples for additive accuracy gamma at confidence 1 - delta.

    Uses t = ceil(2 ln(2/delta) / gamma^2), the C = 2 convention: for
    means of [-1,1]-valued samples, P(|mean - mu| > gamma) is at most
    2 exp(-t gamma^2 / 2) <= delta at this t.
    """
    if not (0 < gamma < 1 and 0 < delta < 1):
        raise ValueError("gamma and delta must lie in (0, 1)")
    return math.ceil(2.0 * math.log(2.0 / delta) / (gamma * gamma))


# -- oracles -------------------------------------------------------------------

class FunctionOracle:
    """Query-counted oracle access to a map F_2^n -> [-B, B].

    Subclasses implement ``_evaluate``.  ``query_count`` increments once
    per queried point.  Instances are safe for concurrent readers as
    long as ``_evaluate`` is pure; counter updates ride on the GIL.
    """

    def __init__(self, n: int, bound: float = 1.0):
        check_dim(n, MAX_ORACLE_N)
        self.n = n
        self.bound = float(bound)
        self.query_count = 0

    def __call__(self, x: int) -> float:
        return float(self.query_many(np.asarray([x], dtype=np.uint64))[0])

    def query_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.uint64)
        self.query_count += int(xs.size)
        return self._evaluate(xs)

    def _evaluate(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class TableOracle(FunctionOracle):
    def __init__(self, values: np.ndarray, n: int, bound: float = 1.0):
        super().__init__(n, bound)
        self._values = values

    def _evaluate(self, xs):
        return self._values[xs]


class CallableOracle(FunctionOracle):
    """Oracle from a vectorized evaluator ``fn(uint64 array) -> float64``."""

    def __init__(self, fn, n: int, bound: float = 1.0):
        super().__init__(n, bound)
        self._fn = fn

    def _evaluate(self, xs):
        return np.asarray(self._fn(xs), dtype=np.float64)


class DerivativeOracle(FunctionOracle):
    """f_x(y) = f(y) f(x + y): the multiplicative derivative of f at x.

    Each evaluation makes two base queries (counted on the base oracle).
    """

    def __init__(self, base: FunctionOracle, shift: int):
        super().__init__(base.n, base.bound ** 2)
        self.base = base
        self.shift = int(shift)

    def _evaluate(self, xs):
        return self.base.query_many(xs) * self.base.query_many(xs ^ np.uint64(self.shift))


class ProductOracle(FunctionOracle):
    def __init__(self, f: FunctionOracle, g: FunctionOracle):
        if f.n != g.n:
            raise ValueError("dimension mismatch")
        super().__init__(f.n, f.bound * g.bound)
        self.f = f
        self.g = g

    def _evaluate(self, xs):
        return self.f.query_many(xs) * self.g.query_many(xs)


def derivative(f: FunctionOracle, x: int) -> DerivativeOracle:
    return DerivativeOracle(f, x)


# -- truth tables --------------------------------------------------------------

class TruthTable:
    """Dense table of 2^n values indexed by the integer encoding of x
    (first coordinate = least significant bit)."""

    __slots__ = ("n", "values")

    def __init__(self, values, n: int):
        check_dim(n, MAX_ENUM_N)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} entries, got {values.shape}")
        self.n = n
        self.values = values

    def is_boolean(self) -> bool:
        return bool(np.all(np.abs(np.abs(self.values) - 1.0) < 1e-12))

    def as_oracle(self) -> TableOracle:
        bound = float(np.max(np.abs(self.values))) if self.values.size else 1.0
        return TableOracle(self.values, self.n, bound=max(bound, 1.0))

    def copy(self) -> "TruthTable":
        return TruthTable(self.values.copy(), self.n)

    def __eq__(self, other):
        return (isinstance(other, TruthTable) and self.n == other.n
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"TruthTable(n={self.n})"


def correlation_exact(f: TruthTable, g: TruthTable) -> float:
    """<f, g> = E_x f(x) g(x), exactly."""
    if f.n != g.n:
        raise ValueError("dimension mismatch")
    return float(np.mean(f.values * g.values))


def estimate_correlation(f: FunctionOracle, g: FunctionOracle, gamma: float,
                         delta: float, rng) -> float:
    """Empirical <f, g> from t = hoeffding_samples(gamma, delta) draws.

    |estimate - <f,g>| <= gamma with probability >= 1 - delta for
    [-1,1]-bounded oracles; each oracle is queried exactly t times.
    """
    if f.n != g.n:
        raise ValueError("dimension mismatch")
    t = hoeffding_samples(gamma, delta)
    xs = rand_points(rng, f.n, t)
    return float(np.mean(f.query_many(xs) * g.query_many(xs)))


# -- quadratic phases ----------------------------------------------------------

@dataclass(frozen=True)
class QuadraticPhase:
    """(-1)^(<x, Mx> + <alpha, x> + c) with M strictly upper triangular.

    The representation is canonical: over GF(2) x_i^2 = x_i, so any
    diagonal folds into alpha, and only M_ij + M_ji matters off the
    diagonal.  Phase equality is field equality of the canonical form.
    """

    M: MatF2
    alpha: int
    c: int
    n: int

    def __post_init__(self):
        if self.M.n_rows != self.n or self.M.n_cols != self.n:
            raise ValueError("matrix shape must be n x n")
        for i, r in enumerate(self.M.rows):
            if r & ((1 << (i + 1)) - 1):
                raise ValueError("M must be strictly upper triangular; "
                                 "use QuadraticPhase.canonical")

    @classmethod
    def canonical(cls, M: MatF2, alpha: int = 0, c: int = 0) -> "QuadraticPhase":
        """Canonicalize an arbitrary square M: fold the diagonal into
        alpha and keep M_ij ^ M_ji strictly above the diagonal."""
        n = M.n_cols
        alpha ^= M.diag_vector()
        mt = M.transpose()
        rows = [(M.rows[i] ^ mt.rows[i]) & ~((1 << (i + 1)) - 1) for i in range(n)]
        return cls(MatF2(rows, n), alpha & ((1 << n) - 1), c & 1, n)

    @classmethod
    def zero(cls, n: int) -> "QuadraticPhase":
        return cls(MatF2.zeros(n, n), 0, 0, n)

    def symmetric_matrix(self) -> MatF2:
        """B = M + M^T, the symmetric zero-diagonal form of the phase."""
        return self.M + self.M.transpose()

    def form_bit(self, x: int) -> int:
        return dot(x, self.M.mul_vec(x)) ^ dot(self.alpha, x) ^ self.c

    def eval(self, x: int) -> float:
        return 1.0 - 2.0 * self.form_bit(x)

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        acc = dot_many(xs, self.alpha).astype(np.uint64)
        for i, row in enumerate(self.M.rows):
            acc ^= ((xs >> np.uint64(i)) & np.uint64(1)) & dot_many(xs, row)
        if self.c:
            acc ^= np.uint64(1)
        return sign_many(acc)

    def truth_table(self) -> TruthTable:
        xs = np.arange(1 << self.n, dtype=np.uint64)
        return TruthTable(self.eval_many(xs), self.n)

    def as_oracle(self) -> CallableOracle:
        return CallableOracle(self.eval_many, self.n, bound=1.0)

    def negated(self) -> "QuadraticPhase":
        return QuadraticPhase(self.M, self.alpha, self.c ^ 1, self.n)


def eval_quadratic_phase(q: QuadraticPhase, x: int) -> float:
    if x >> q.n:
        raise ValueError("point has bits beyond the phase dimension")
    return q.eval(x)


# -- quadratic averages --------------------------------------------------------

@dataclass(frozen=True)
class QuadraticAverage:
    """Sum over cosets y+W of 1_{y+W}(x) (-1)^(<x,Ax> + <l_y,x> + c_y).

    All cosets share the quadratic part A and differ in the linear
    part; the value depends only on the coset of x.  Cosets are keyed
    by their canonical representative; missing cosets evaluate to 0.
    The complexity of the average is codim(W).
    """

    W: SubspaceF2
    A: MatF2
    coset_terms: dict  # canonical rep -> (l, c)
    n: int

    def __post_init__(self):
        if self.W.n != self.n or self.A.n_cols != self.n:
            raise ValueError("dimension mismatch")
        if len(self.coset_terms) > (1 << self.W.codim):
            raise ValueError("more coset terms than cosets")
        canon = {self.W.canonical_rep(y): lc for y, lc in self.coset_terms.items()}
        object.__setattr__(self, "coset_terms", canon)

    @property
    def complexity(self) -> int:
        return self.W.codim

    def eval(self, x: int) -> float:
        y = self.W.canonical_rep(x)
        term = self.coset_terms.get(y)
        if term is None:
            return 0.0
        l, c = term
        bit = dot(x, self.A.mul_vec(x)) ^ dot(l, x) ^ c
        return 1.0 - 2.0 * bit

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        reps = self.W.canonical_rep_many(xs)
        quad = np.zeros(xs.shape, dtype=np.uint64)
        for i, row in enumerate(self.A.rows):
            quad ^= ((xs >> np.uint64(i)) & np.uint64(1)) & dot_many(xs, row)
        out = np.zeros(xs.shape, dtype=np.float64)
        for y, (l, c) in self.coset_terms.items():
            hit = reps == np.uint64(y)
            if not np.any(hit):
                continue
            bits = (quad[hit] ^ dot_many(xs[hit], l) ^ np.uint64(c & 1)) & np.uint64(1)
            out[hit] = sign_many(bits)
        return out

    def truth_table(self) -> TruthTable:
        xs = np.arange(1 << self.n, dtype=np.uint64)
        return TruthTable(self.eval_many(xs), self.n)

    def as_oracle(self) -> CallableOracle:
        return CallableOracle(self.eval_many, self.n, bound=1.0)

    def negated(self) -> "QuadraticAverage":
        flipped = {y: (l, c ^ 1) for y, (l, c) in self.coset_terms.items()}
        return QuadraticAverage(self.W, self.A, flipped, self.n)


def eval_quadratic_average(Q: QuadraticAverage, x: int) -> float:
    return Q.eval(x)


# -- synthetic instances -------------------------------------------------------

def random_quadratic_phase(n: int, rng, density: float = 0.5) -> QuadraticPhase:
    rows = []
    for i in range(n):
        r = 0
        for j in range(i + 1, n):
            if rng.random() < density:
                r |= 1 << j
        rows.append(r)
    alpha = int(rng.integers(0, 1 << n))
    c = int(rng.integers(0, 2))
    return QuadraticPhase(MatF2(rows, n), alpha, c, n)


def random_quadratic_average(n: int, codim: int, rng) -> QuadraticAverage:
    """Random average with a shared quadratic part and a full set of
    per-coset linear terms."""
    while True:
        ortho = [int(rng.integers(1, 1 << n)) for _ in range(codim)]
        W = SubspaceF2(ortho, n)
        if W.codim == codim:
            break
    A = symmetric_split(random_symmetric_zero_diag(n, rng))
    terms = {}
    for y in W.coset_reps():
        terms[int(y)] = (int(rng.integers(0, 1 << n)), int(rng.integers(0, 2)))
    return QuadraticAverage(W, A, terms, n)


def coherent_quadratic_average(n: int, codim: int, rng) -> QuadraticAverage:
    """Planted average whose per-coset linear parts form an affine
    pattern (l_y = l_0 + L y) while the sign bits do not.

    Every derivative of such an average keeps its Fourier mass on a
    single character, so the choice-function machinery can actually
    sample the structure.  This is the recoverable benchmark family:
    fully independent per-coset linear parts split every derivative's
    mass into 2^codim shards, which no sampling budget can chase at
    desk dimensions.  For codim >= 3 the non-affine sign pattern has
    degree codim on the coset quotient, so no single quadratic phase
    represents the function; at codim 2 a phase representation also
    exists (every function on a 2-dimensional quotient has degree at
    most 2), though the average presentation is what the recovery
    machinery sees and returns.
    """
    while True:
        ortho = [int(rng.integers(1, 1 << n)) for _ in range(codim)]
        W = SubspaceF2(ortho, n)
        if W.codim == codim:
            break
    A = symmetric_split(random_symmetric_zero_diag(n, rng))
    reps = [int(y) for y in W.coset_reps()]
    l0 = int(rng.integers(0, 1 << n))
    L = MatF2.random(n, n, rng)
    terms = {}
    for y in reps:
        terms[y] = (l0 ^ L.mul_vec(y), 0)
    if codim > 0:
        flip = reps[int(rng.integers(1, len(reps)))]
        terms[flip] = (terms[flip][0], 1)  # weight-1 sign pattern: non-affine
    return QuadraticAverage(W, A, terms, n)


def random_symmetric_zero_diag(n: int, rng) -> MatF2:
    rows = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if rng.integers(0, 2):
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return MatF2(rows, n)


def random_boolean_table(n: int, rng) -> TruthTable:
    vals = rng.integers(0, 2, size=1 << n).astype(np.float64) * 2.0 - 1.0
    return TruthTable(vals, n)


def make_noisy_codeword(q: QuadraticPhase, epsilon: float, rng) -> TruthTable:
    """Truth table of (-1)^q with each entry flipped independently with
    probability 1/2 - epsilon; expected correlation with q is 2 epsilon.
    """
    if not 0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    tt = q.truth_table()
    flips = rng.random(1 << q.n) < (0.5 - epsilon)
    tt.values[flips] *= -1.0
    return tt


def make_noisy_codeword_exact(q: QuadraticPhase, epsilon: float, rng) -> TruthTable:
    """Adversarial variant: flip a uniformly random subset of exact size
    round((1/2 - epsilon) 2^n), so the Hamming distance is fixed."""
    if not 0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    tt = q.truth_table()
    k = round((0.5 - epsilon) * (1 << q.n))
    idx = rng.permutation(1 << q.n)[:k]
    tt.values[idx] *= -1.0
    return tt


def planted_sign_mixture(n: int, terms: list[tuple[int, float]], rng=None) -> TruthTable:
    """Boolean table sign(sum_j w_j chi_{a_j}); zeros broken by a seeded
    coin so the result is always +-1.  Spectra are read off exactly with
    the transform, which is what tests compare against."""
    xs = np.arange(1 << n, dtype=np.uint64)
    acc = np.zeros(1 << n, dtype=np.float64)
    for a, w in terms:
        acc += w * sign_many(dot_many(xs, a))
    vals = np.sign(acc)
    zero = vals == 0.0
    if np.any(zero):
        if rng is None:
            rng = np.random.default_rng(0)
        vals[zero] = rng.integers(0, 2, size=int(zero.sum())) * 2.0 - 1.0
    return TruthTable(vals, n)
