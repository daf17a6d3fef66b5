"""Recovering a correlated quadratic phase from oracle access.

Pipeline: screen the U^3 mass; draw a choice function and sandwich-test
parameters; collect accepted pairs (x, phi(x)) until they span a stable
subspace of F_2^{2n}; read a linear map T off the completed basis;
restrict to the subspace where T acts as a symmetric zero-diagonal form
and extract a matching global matrix B; integrate: with M + M^T = B,
the product f(x) (-1)^(<x,Mx>) carries a large linear character whose
index and sign give the linear part.  The assembled phase is validated
by a correlation estimate before being returned; failures at any stage
surface as a retry of the whole attempt with fresh randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .gf2 import (MatF2, SpanBuilder, SubspaceF2,
                  complete_basis_full_rank_projection, dot, graph_linear_map,
                  row_reduce, solve_linear_system, symmetric_split)
from .functions import (FunctionOracle, ProductOracle, QuadraticPhase,
                        estimate_correlation, hoeffding_samples)
from .fourier import estimate_u3, goldreich_levin, u3_power_gate
from .bsg import BsgParams, DiagnosticsLog, PhiSampler, bsg_test, choose_bsg_params


@dataclass(frozen=True)
class LinearChoiceMap:
    """A linear map T whose graph covers the accepted sample span."""

    T: MatF2
    u: tuple[int, int]
    sampled: int
    accepted: int
    span_rank: int
    vectors: tuple[int, ...] = ()


@dataclass(frozen=True)
class FindQuadraticResult:
    phase: QuadraticPhase
    correlation_estimate: float
    attempts: int
    queries: int


def screen_anchor(sampler: PhiSampler, gamma: float, rng, *,
                  max_tries: int = 400, streak_abort: int = 48,
                  best_of: int = 8):
    """Draw an anchor vertex u = (x, phi(x)) whose character came from
    the decomposition list with coefficient estimate >= gamma, keeping
    the largest-coefficient candidate among the first few that qualify.

    Doomed anchors (junk phi draws) make every later edge test fail, so
    screening collapses retries the driver would burn anyway.  Returns
    None after a long streak of empty decomposition lists (junk input)
    or when the try budget runs out.
    """
    empty_streak = 0
    found: list[tuple[float, int, int]] = []
    for _ in range(max_tries):
        x = int(rng.integers(0, 1 << sampler.n))
        rec = sampler.record(x)
        if rec.from_list and abs(rec.coeff) >= gamma:
            found.append((abs(rec.coeff), x, rec.alpha))
            if len(found) >= best_of:
                break
        if rec.from_list:
            empty_streak = 0
        else:
            empty_streak += 1
            if empty_streak >= streak_abort and not found:
                return None
    if not found:
        return None
    _, x, alpha = max(found)
    return (x, alpha)


def find_linear_map(sampler: PhiSampler, params: BsgParams, delta: float, rng, *,
                    u: tuple[int, int] | None = None, t_min: int | None = None,
                    k_cap: int | None = None, stall: int = 8,
                    warmup: int = 2000, profile: str = "practical",
                    diag: DiagnosticsLog | None = None) -> LinearChoiceMap | None:
    """Sample points, keep those the sandwich test accepts against the
    anchor u, and read a linear map off the span of the accepted pairs.

    Paper-profile sizing: t = 4n^2 + log2(10/delta) accepted points out
    of K = 100 t / rho draws, aborting below t.  The practical profile
    samples adaptively: stop once the accepted span's rank has stalled
    past t_min acceptances, abort when a warm-up window accepts nothing,
    cap the total draws.  None signals a bad draw of phi, u or the
    thresholds; the driver retries.
    """
    n = sampler.n
    if profile == "paper":
        t_req = t_min if t_min is not None else \
            4 * n * n + math.ceil(math.log2(10.0 / delta))
        cap = k_cap if k_cap is not None else math.ceil(100.0 * t_req / params.rho)
        stall = t_req  # no early stop in the paper profile
        warmup = cap
    else:
        # a small accepted harvest is still useful to the pooling driver;
        # the floor only rejects draws that accept close to nothing
        t_req = t_min if t_min is not None else 6
        # beyond a few multiples of 2^n the memoized choice pool is
        # exhausted and further draws only repeat it
        cap = k_cap if k_cap is not None else min(12000, 4 << n)
        warmup = min(warmup, cap)
    if u is None:
        u = screen_anchor(sampler, params.gamma1, rng)
        if u is None:
            return None

    span = SpanBuilder()
    vectors: list[int] = []
    accepted = 0
    stalled = 0
    sampled = 0
    while sampled < cap:
        sampled += 1
        y = int(rng.integers(0, 1 << n))
        rec = sampler.record(y)
        v = (y, rec.alpha)
        if bsg_test(sampler, u, v, params, rng, diag=diag) == 1:
            accepted += 1
            vec = y | (rec.alpha << n)
            if span.add(vec):
                vectors.append(vec)
                stalled = 0
            else:
                stalled += 1
            if accepted >= t_req and stalled >= stall:
                break
        if sampled == warmup and accepted == 0:
            return None
    if accepted < t_req:
        return None
    ext = complete_basis_full_rank_projection(span.basis(), n)
    T = graph_linear_map(ext, n)
    return LinearChoiceMap(T=T, u=u, sampled=sampled, accepted=accepted,
                           span_rank=span.rank, vectors=tuple(vectors))


# -- symmetry argument ----------------------------------------------------------

def _symmetric_extension(T: MatF2, W: SubspaceF2) -> MatF2:
    """Symmetric zero-diagonal matrix agreeing with T on W.

    First solve B w = T w on a basis of W over the strictly-upper
    unknowns (exact agreement as a linear map).  If that system is
    inconsistent, fall back to the Gram construction B = D^T G D with
    G the restricted form and D a coordinate map (D w_i = e_i), which
    agrees with T as a quadratic form on W and is always symmetric
    with zero diagonal.
    """
    n = T.n_cols
    basis = W.basis()
    if not basis:
        return MatF2.zeros(n, n)
    pos = {}
    m = 0
    for i in range(n):
        for j in range(i + 1, n):
            pos[(i, j)] = m
            m += 1
    rows, rhs = [], []
    for w in basis:
        tw = T.mul_vec(w)
        for i in range(n):
            r = 0
            for j in range(n):
                if j != i and (w >> j) & 1:
                    r |= 1 << pos[(min(i, j), max(i, j))]
            rows.append(r)
            rhs.append((tw >> i) & 1)
    sol = solve_linear_system(rows, rhs, m)
    if sol is not None:
        out = [0] * n
        for (i, j), k in pos.items():
            if (sol >> k) & 1:
                out[i] |= 1 << j
                out[j] |= 1 << i
        return MatF2(out, n)
    d = len(basis)
    gram = [sum(dot(basis[i], T.mul_vec(basis[j])) << j for j in range(d))
            for i in range(d)]
    # a zero-diagonal symmetric matrix has an identically vanishing
    # quadratic form, so an odd diagonal of the restricted form can never
    # be matched; clear it (the per-coset character search downstream
    # works modulo exactly this freedom)
    gram = [r & ~(1 << i) for i, r in enumerate(gram)]
    sym = [0] * d
    for i in range(d):
        for j in range(i + 1, d):
            bit = ((gram[i] >> j) | (gram[j] >> i)) & 1
            if bit:
                sym[i] |= 1 << j
                sym[j] |= 1 << i
    d_rows = [solve_linear_system(list(basis),
                                  [1 if i == k else 0 for i in range(d)], n)
              for k in range(d)]
    D = MatF2(d_rows, n)       # d x n, D w_i = e_i
    G = MatF2(sym, d)          # symmetrized, zero diagonal
    return D.transpose() @ G @ D


def symmetrize(T: MatF2, context=None) -> tuple[SubspaceF2, MatF2]:
    """Subspace W on which T acts as a symmetric zero-diagonal form,
    plus a globally symmetric zero-diagonal B agreeing with T there.

    W starts from the kernel of T + T^T; the diagonal-fixing vector v
    is solved from <w, v> = <w, T w> on a kernel basis (so <x, Tx> =
    <x, v> there) and W is cut down to v's orthogonal hyperplane.  The
    postcondition (B symmetric, zero diagonal) holds unconditionally;
    W may be small, in which case downstream validation rejects.
    """
    n = T.n_cols
    S = T + T.transpose()
    kernel = SubspaceF2(list(S.rows), n)  # Sx = 0 iff x perp every row
    kb = kernel.basis()
    v = solve_linear_system(list(kb), [dot(w, T.mul_vec(w)) for w in kb], n) \
        if kb else 0
    if v is None:
        v = T.diag_vector()
    W = SubspaceF2(list(S.rows) + [v], n)
    return W, _symmetric_extension(T, W)


def integrate(f: FunctionOracle, B: MatF2, eta_sq_threshold: float, delta: float,
              rng, *, gl_kwargs: dict | None = None,
              diag: DiagnosticsLog | None = None) -> QuadraticPhase | None:
    """Assemble the phase: split B = M + M^T, decompose
    f(x) (-1)^(<x,Mx>) into linear characters at the given threshold,
    and take the largest-coefficient character as the linear part (ties
    to the smallest index); its sign fixes the constant bit.  None when
    the list comes back empty (driver retries)."""
    M = symmetric_split(B)
    h = QuadraticPhase(M, 0, 0, B.n_cols)
    fh = ProductOracle(f, h.as_oracle())
    terms = goldreich_levin(fh, eta_sq_threshold, delta, rng, diag=diag,
                            **(gl_kwargs or {}))
    if not terms:
        return None
    alpha, coeff = terms[0]
    return QuadraticPhase(M, alpha, 0 if coeff > 0 else 1, B.n_cols)


# -- driver ----------------------------------------------------------------------

PRACTICAL_DEFAULTS = dict(
    # None = scale with epsilon: the choice decomposition must see
    # derivative coefficients down to roughly the correlation scale the
    # driver is asked about, and the bucket counts follow the threshold
    phi_gamma=None, phi_delta=0.1,
    phi_t_bucket=None, phi_t_leaf=None, phi_repeats=1, phi_live_cap=20,
    int_gamma=0.1, int_t_bucket=8192, int_t_leaf=8192, int_repeats=1,
    int_live_cap=128,
    tau_accept=0.05, m_attempts=50,
    validate_gamma=0.02, validate_delta=0.01,
    gate_cap=1 << 26,
    # anchor/threshold redraws served by one memoized choice draw before
    # the next fresh sampler: redraws cost almost nothing once the memo
    # is warm, while a fresh sampler pays for the whole table again
    anchors_per_sampler=6,
)

_BSG_KNOBS = ("rho", "interval", "n_subintervals", "r", "s", "t_edge")


def practical_query_budget(n: int, attempts: int, **overrides) -> int:
    """Documented worst-case oracle-query budget of find_quadratic in the
    practical profile, for counter audits.

    Per attempt: the choice sampler answers at most min(2^(n+1), 2 k_cap
    + screen) distinct decompositions, each costing at most
    4 (n t_bucket + t_leaf) queries (derivative samples pay double);
    every draw additionally runs at most (2 + r + 2 r s) edge tests of
    3 coefficient estimates at 2 t_edge queries each; integration and
    validation add one decomposition at the integration counts plus the
    correlation samples.  The gate contributes at most 8 doubled stages
    of the cap.
    """
    k = dict(PRACTICAL_DEFAULTS)
    k.update(overrides)
    epsilon = k.get("epsilon", 0.1)
    phi_gamma = k["phi_gamma"] or min(0.15, max(0.08, epsilon))
    tb = k["phi_t_bucket"] or math.ceil(34.0 / phi_gamma ** 2)
    tl = k["phi_t_leaf"] or math.ceil(2 * tb / 3)
    r = k.get("r", 24)
    s = k.get("s", 24)
    t_edge = k.get("t_edge", 2048)
    k_cap = k.get("k_cap") or min(12000, 4 << n)
    gl_cost = 4 * (n * tb * k["phi_repeats"] + tl)
    gl_calls = min(1 << (n + 1), 2 * k_cap + 400)
    per_draw_tests = (2 + r + 2 * r * s) * 3 * 2 * t_edge
    int_cost = 4 * (n * k["int_t_bucket"] * k["int_repeats"] + k["int_t_leaf"])
    validate = hoeffding_samples(k["validate_gamma"], k["validate_delta"]) * 2
    per_attempt = gl_calls * gl_cost + (k_cap + 400) * per_draw_tests \
        + 2 * int_cost + 2 * validate
    gate = 16 * int(k["gate_cap"]) * 8
    return gate + attempts * per_attempt


def find_quadratic(f: FunctionOracle, epsilon: float, delta: float, rng, *,
                   profile: str = "practical", eta_exponent: float = 1.0,
                   diag: DiagnosticsLog | None = None,
                   **overrides) -> FindQuadraticResult | None:
    """Either a quadratic phase correlating with f, or bottom (None).

    Gate first: reject unless the estimated U^3 mass clears 3 eps/4
    (the practical gate compares eighth powers with a sequential
    decisive-margin test, the scale a sampling test can resolve).  Then
    up to M attempts, each with a fresh choice sampler and fresh test
    parameters: linear map -> symmetrization -> integration ->
    validation against tau_accept.  The first validated phase wins; a
    phase whose validation estimate falls below tau_accept is never
    returned.
    """
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    knobs = dict(PRACTICAL_DEFAULTS)
    knobs.update(overrides)
    start_queries = f.query_count

    if profile == "paper":
        eta = math.exp(-((1.0 / epsilon) ** eta_exponent))
        tau = knobs.get("tau_accept_paper", eta * eta / 2.0)
        rho = epsilon ** 16 / 4.0
        m_attempts = math.ceil((1.0 / rho) ** 4 * math.log(max(2.0, 1.0 / delta)))
        u_hat = estimate_u3(f, epsilon / 4.0, delta / 4.0, rng)
        if diag is not None:
            diag.record("u3-gate", 0, delta / 4.0)
        if u_hat < 3.0 * epsilon / 4.0:
            return None
        phi_gamma = phi_delta = epsilon ** 16 / 18.0
        gl_phi: dict = {}
        gl_int: dict = {}
        int_gamma = tau
    else:
        tau = knobs["tau_accept"]
        m_attempts = knobs["m_attempts"]
        if not u3_power_gate(f, 3.0 * epsilon / 4.0, rng,
                             t_cap=int(knobs["gate_cap"])):
            return None
        if diag is not None:
            diag.record("u3-gate", 0, delta)
        phi_gamma, phi_delta = knobs["phi_gamma"], knobs["phi_delta"]
        if phi_gamma is None:
            phi_gamma = min(0.15, max(0.08, epsilon))
        tb = knobs["phi_t_bucket"] or math.ceil(34.0 / phi_gamma ** 2)
        tl = knobs["phi_t_leaf"] or math.ceil(2 * tb / 3)
        gl_phi = dict(t_bucket=tb, t_leaf=tl,
                      repeats=knobs["phi_repeats"], live_cap=knobs["phi_live_cap"])
        gl_int = dict(t_bucket=knobs["int_t_bucket"], t_leaf=knobs["int_t_leaf"],
                      repeats=knobs["int_repeats"], live_cap=knobs["int_live_cap"])
        int_gamma = knobs["int_gamma"]

    bsg_over = {k: v for k, v in knobs.items() if k in _BSG_KNOBS}
    pool: list[int] = []  # accepted graph vectors across attempts: every
    # clean acceptance lies on the same graph {(y, By)}, so pooling them
    # lets a handful of good points per choice draw add up to full rank;
    # validation still gates what is returned
    pool_misses = 0
    anchors = 1 if profile == "paper" else max(1, int(knobs["anchors_per_sampler"]))
    sampler = None
    for attempt in range(1, m_attempts + 1):
        if sampler is None or (attempt - 1) % anchors == 0:
            sampler = PhiSampler(f, phi_gamma, phi_delta, rng, diag=diag, **gl_phi)
        params = choose_bsg_params(epsilon, rng, profile=profile, **bsg_over)
        lm = find_linear_map(sampler, params, delta, rng, profile=profile,
                             t_min=knobs.get("t_min"), k_cap=knobs.get("k_cap"),
                             diag=diag)
        if lm is None:
            continue
        pool.extend(lm.vectors)
        candidates = [graph_linear_map(
            complete_basis_full_rank_projection(row_reduce(pool)[0], f.n), f.n)]
        if candidates[0] != lm.T:
            candidates.append(lm.T)
        best = None
        for T in candidates:
            W, B = symmetrize(T)
            q = integrate(f, B, int_gamma, delta / 4.0, rng, gl_kwargs=gl_int,
                          diag=diag)
            if q is None:
                continue
            est = estimate_correlation(f, q.as_oracle(), knobs["validate_gamma"],
                                       knobs["validate_delta"], rng)
            if diag is not None:
                diag.record("validate", 0, knobs["validate_delta"])
            if est < 0:
                q, est = q.negated(), -est
            if best is None or est > best[1]:
                best = (q, est)
        if best is not None and best[1] >= tau:
            return FindQuadraticResult(phase=best[0], correlation_estimate=best[1],
                                       attempts=attempt,
                                       queries=f.query_count - start_queries)
        pool_misses += 1
        if pool_misses >= 4 and row_reduce(pool)[1] >= f.n:
            # the pool already determines a full map yet nothing validates:
            # that is a contamination signal, not slow accretion; shed it
            pool = list(lm.vectors)
            pool_misses = 0
    return None
