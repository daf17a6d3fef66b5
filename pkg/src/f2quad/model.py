"""Local refinement: quadratic averages on cosets of a subspace.

The global route pays an exponential correlation loss when it wraps the
accepted set in a spanning subspace.  The local route instead finds a
subspace inside the 4-fold sumset of the accepted set (Bogolyubov),
after restricting acceptance through a random linear model map Gamma so
that the choice function behaves like a Freiman 8-homomorphism there.
Sampled quadruples then define a linear map on a subspace V, a coset of
V carrying most of the structure is found by majority, the symmetry
argument runs relative to V, and per-coset linear parts are recovered
with the subspace Goldreich-Levin, assembling a quadratic average whose
complexity is the codimension of the final subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .gf2 import (MatF2, SpanBuilder, SubspaceF2,
                  complete_basis_full_rank_projection, dot, graph_linear_map,
                  reduce_mod_basis, row_reduce, solve_linear_system,
                  symmetric_split)
from .functions import (CallableOracle, FunctionOracle, QuadraticAverage,
                        QuadraticPhase, estimate_correlation)
from .fourier import goldreich_levin, goldreich_levin_subspace, u3_power_gate, estimate_u3
from .bsg import (BsgParams, DiagnosticsLog, PhiSampler, bsg_test,
                  choose_bsg_params, edge_test)
from .recovery import _symmetric_extension, screen_anchor


@dataclass(frozen=True)
class ModelParams:
    """Random linear restriction Gamma(phi(y)) = c cutting the accepted
    set down to a sheet on which the choice function is additively
    consistent.  Paper scales: theta' = eps^2448 / 2^487, theta =
    eps^4912 / (3 * 2^977), m = 2 ceil(log2(1/theta')); purely analytic
    at desk scale, kept for formula audits.  The practical profile uses
    small m and a nominal theta."""

    gamma_map: MatF2
    c: int
    m: int
    theta: float
    theta_prime: float
    profile: str = "practical"


def paper_model_log2_scales(epsilon: float) -> tuple[float, float, int]:
    """Log2 of the paper-profile model scales, exactly:
    log2(theta') = -(487 + 2448 log2(1/eps)),
    log2(theta)  = -(977 + log2 3 + 4912 log2(1/eps)),
    m = 2 ceil(log2(1/theta')).  These quantities underflow any float
    long before eps gets interesting, so audits run in log space."""
    log2_inv_tp = 487.0 + 2448.0 * math.log2(1.0 / epsilon)
    log2_inv_t = 977.0 + math.log2(3.0) + 4912.0 * math.log2(1.0 / epsilon)
    return -log2_inv_t, -log2_inv_tp, 2 * math.ceil(log2_inv_tp)


def paper_model_scales(epsilon: float) -> tuple[float, float, int]:
    """Best-effort float values of the paper model scales (0.0 on
    underflow); m is computed from the exact log form."""
    log2_t, log2_tp, m = paper_model_log2_scales(epsilon)
    theta = 2.0 ** log2_t if log2_t > -1020 else 0.0
    theta_prime = 2.0 ** log2_tp if log2_tp > -1020 else 0.0
    return theta, theta_prime, m


def choose_model_params(n: int, rng, profile: str = "practical", *,
                        epsilon: float | None = None,
                        theta: float | None = None, m: int | None = None,
                        c: int | None = None) -> ModelParams:
    if profile == "paper":
        if epsilon is None:
            raise ValueError("paper profile needs epsilon")
        th, thp, m_v = paper_model_scales(epsilon)
        if m is not None:
            m_v = m
    else:
        th = theta if theta is not None else 0.05
        thp = math.sqrt(th) if theta is not None else 0.05
        m_v = m if m is not None else 4
    gamma_map = MatF2.random(m_v, n, rng) if m_v > 0 else MatF2([], n)
    c_v = int(rng.integers(0, 1 << m_v)) if c is None and m_v > 0 else int(c or 0)
    return ModelParams(gamma_map=gamma_map, c=c_v, m=m_v, theta=th,
                       theta_prime=thp, profile=profile)


def model_test(sampler: PhiSampler, u: tuple[int, int], v: tuple[int, int],
               params: BsgParams, model: ModelParams, rng, *,
               diag: DiagnosticsLog | None = None) -> int:
    """1 iff the sandwich test accepts v AND Gamma(phi(y)) = c.

    The linear restriction is checked first (it is free once phi(y) is
    drawn); the conjunction's value does not depend on the order."""
    y, phiy = int(v[0]), int(v[1])
    if model.m > 0 and model.gamma_map.mul_vec(phiy) != model.c:
        return 0
    return bsg_test(sampler, u, v, params, rng, diag=diag)


class ModelMembership:
    """Dense memo of model_test verdicts: h(x) in {0, 1}.

    Memoization makes h a fixed function of x (first verdict wins), so
    the Bogolyubov run and the quadruple/coset sampling stages all see
    the same restriction; at desk dimensions the expensive verdicts are
    paid at most once per point.
    """

    def __init__(self, sampler: PhiSampler, u, bsg_params: BsgParams,
                 model: ModelParams, rng,
                 diag: DiagnosticsLog | None = None):
        self.sampler = sampler
        self.u = u
        self.params = bsg_params
        self.model = model
        self.rng = rng
        self.diag = diag
        self.n = sampler.n
        self._memo = np.full(1 << self.n, -1, dtype=np.int8)
        self.evaluations = 0

    def query(self, x: int) -> int:
        x = int(x)
        if self._memo[x] < 0:
            v = (x, self.sampler.sample(x))
            self._memo[x] = model_test(self.sampler, self.u, v, self.params,
                                       self.model, self.rng, diag=self.diag)
            self.evaluations += 1
        return int(self._memo[x])

    def query_many(self, xs: np.ndarray) -> np.ndarray:
        miss = np.unique(xs[self._memo[xs] < 0])
        for x in miss:
            self.query(int(x))
        return self._memo[xs].astype(np.float64)

    def as_oracle(self) -> FunctionOracle:
        orc = CallableOracle(self.query_many, self.n, bound=1.0)
        return orc

    def accepted(self) -> np.ndarray:
        return np.flatnonzero(self._memo == 1).astype(np.uint64)


def bogolyubov(h, rho: float, delta: float, rng, *, gamma: float | None = None,
               t_bucket=None, t_leaf=None, repeats=None, live_cap=None,
               noise_floor_z: float = 0.0,
               diag: DiagnosticsLog | None = None) -> SubspaceF2:
    """Subspace V inside the 4-fold sumset of the set h indicates.

    Runs the linear decomposition of h at gamma = rho^(3/2)/4 and
    returns the joint kernel of the characters found: on it the 4-fold
    convolution h*h*h*h exceeds rho^4/2 (with probability 1 - delta),
    because the kernel kills the found characters' oscillation and the
    remaining spectrum is uniformly below gamma.  Codimension is at
    most the list length, O(rho^-3).
    """
    if gamma is None:
        gamma = rho ** 1.5 / 4.0
    orc = h if isinstance(h, FunctionOracle) else h.as_oracle()
    terms = goldreich_levin(orc, gamma, delta, rng, t_bucket=t_bucket,
                            t_leaf=t_leaf, repeats=repeats, live_cap=live_cap,
                            noise_floor_z=noise_floor_z, diag=diag)
    alphas = [a for a, _ in terms if a != 0]
    return SubspaceF2(alphas, orc.n)


@dataclass(frozen=True)
class LocalChoiceResult:
    """Affine local choice: E_{x in c1+V} f_hat_x^2(Tx + Tc1 + c2) is
    large on good draws."""

    V: SubspaceF2
    T: MatF2
    c1: int
    c2: int
    quadruples: int
    coset_votes: int


def local_linear_choice(f: FunctionOracle, sampler: PhiSampler,
                        u: tuple[int, int], bsg_params: BsgParams,
                        model: ModelParams, delta: float, rng, *,
                        bog_gamma: float | None = None,
                        bog_rho: float | None = None,
                        bog_gl: dict | None = None,
                        t_store: int | None = None, stall: int = 4,
                        draw_cap: int | None = None,
                        coset_probes: int = 48,
                        diag: DiagnosticsLog | None = None,
                        membership: ModelMembership | None = None
                        ) -> LocalChoiceResult | None:
    """Subspace V, linear map T and coset anchor (c1, c2) from the
    model-restricted accepted set.

    Stages: (1) Bogolyubov on the membership function h gives V0 inside
    the 4-fold sumset of the accepted sheet.  (2) Accepted quadruples
    with sum in V0 are stored as (y, zeta(y)); additive consistency of
    the restricted choice function makes zeta linear, so the stored
    points span V and extend to a map T.  (3) The coset of
    Z = {(x, Tx)} holding the most accepted probes supplies (c1, c2).
    None on sample starvation at any stage (a bad draw; driver retries).
    """
    n = f.n
    mem = membership if membership is not None else \
        ModelMembership(sampler, u, bsg_params, model, rng, diag=diag)
    if bog_rho is None or bog_gamma is None:
        # measure the accepted density: the structured part of the
        # membership spectrum lives at that scale, and the verdicts are
        # memoized so the probes are reused by every later stage
        probes = rng.integers(0, 1 << n, size=min(512, 1 << n), dtype=np.uint64)
        dens = float(np.mean(mem.query_many(probes)))
        if bog_rho is None:
            bog_rho = max(dens, 4.0 / (1 << n))
        if bog_gamma is None:
            bog_gamma = max(0.55 * bog_rho, 1.5 / (1 << n))
    v0 = bogolyubov(mem.as_oracle(), bog_rho, delta / 20.0, rng,
                    gamma=bog_gamma, **(bog_gl or {}), diag=diag)
    if v0.dim == 0:
        return None

    cap = draw_cap if draw_cap is not None else 40 << n
    target = t_store if t_store is not None else 4
    stall = max(stall, 6) if t_store is None else stall
    pool: list[int] = []
    draws = 0

    def draw_accepted():
        nonlocal draws
        while draws < cap:
            draws += 1
            x = int(rng.integers(0, 1 << n))
            if mem.query(x):
                pool.append(x)
                return x
        return None

    span = SpanBuilder()
    stored: list[tuple[int, int]] = []
    stalled = 0
    quad_tries = 0
    while draws < cap:
        quad_tries += 1
        xs = []
        ok = True
        for _ in range(3):
            if len(pool) > 8 and rng.random() < 0.5:
                xs.append(int(pool[int(rng.integers(0, len(pool)))]))
            else:
                x = draw_accepted()
                if x is None:
                    ok = False
                    break
                xs.append(x)
        if not ok:
            break
        y = v0.random_element(rng)
        x4 = xs[0] ^ xs[1] ^ xs[2] ^ y
        if not mem.query(x4):
            continue
        zeta = 0
        for x in (*xs, x4):
            zeta ^= sampler.sample(x)
        stored.append((y, zeta))
        if span.add(y | (zeta << n)):
            stalled = 0
        else:
            stalled += 1
        if len(stored) >= target and stalled >= stall:
            break
    if len(stored) < target:
        return None

    V = SubspaceF2.from_span([y for y, _ in stored], n)
    ext = complete_basis_full_rank_projection(span.basis(), n)
    T = graph_linear_map(ext, n)

    # identify the heaviest coset of Z = {(x, Tx) : x in V} among
    # accepted probes, bucketing by canonical representative
    z_basis, _ = row_reduce([v | (T.mul_vec(v) << n) for v in V.basis()])
    votes: dict[int, tuple[int, int]] = {}
    counts: dict[int, int] = {}
    probes = list(dict.fromkeys(pool))
    while len(probes) < coset_probes:
        x = draw_accepted()
        if x is None:
            break
        probes = list(dict.fromkeys(pool))
    for x in probes:
        vec = x | (sampler.sample(x) << n)
        key = reduce_mod_basis(vec, z_basis)
        counts[key] = counts.get(key, 0) + 1
        votes.setdefault(key, (x, sampler.sample(x)))
    if not counts:
        return None
    best_key = max(counts, key=lambda k: (counts[k], -k))
    c1, c2 = votes[best_key]
    return LocalChoiceResult(V=V, T=T, c1=c1, c2=c2,
                             quadruples=len(stored),
                             coset_votes=counts[best_key])


def local_symmetrize(V: SubspaceF2, T: MatF2, c1: int, z_c: int,
                     n: int) -> tuple[SubspaceF2, MatF2, int]:
    """Symmetry argument relative to V.

    W' = {x in V : (T + T^T)x perp V}; on W' the map acts as a
    symmetric form, whose diagonal vector v solves <w, v> = <w, Tw> on
    a basis.  The support of x -> f_hat_{x+c1}^2(T(x+c1) + z_c)
    requires <x, v + Sc1 + z_c> = <c1, Tc1> + <c1, z_c>; W is cut by
    that hyperplane and, when the right-hand bit is 1, the coset anchor
    c1 is shifted into the affine solution set.  Returns (W, B, c1')
    with B globally symmetric, zero diagonal, agreeing with T on W.
    """
    S = T + T.transpose()
    constraints = list(V.ortho_basis) + [S.mul_vec(w) for w in V.basis()]
    W1 = SubspaceF2(constraints, n)
    kb = W1.basis()
    v = solve_linear_system(list(kb), [dot(w, T.mul_vec(w)) for w in kb], n) \
        if kb else 0
    if v is None:
        v = T.diag_vector()
    u_vec = v ^ S.mul_vec(c1) ^ z_c
    b = dot(c1, T.mul_vec(c1)) ^ dot(c1, z_c)
    W = SubspaceF2(constraints + [u_vec], n)
    c1_adj = c1
    if b == 1:
        x0 = next((w for w in kb if dot(w, u_vec) == 1), None)
        if x0 is not None:
            c1_adj = c1 ^ x0
        # else: the support condition is unsatisfiable on W1; the caller's
        # validation will reject this attempt
    B = _symmetric_extension(T, W)
    return W, B, c1_adj


def find_linear_parts(f: FunctionOracle, W: SubspaceF2, A: MatF2, B: MatF2,
                      sigma: float, delta: float, rng, *,
                      gl_kwargs: dict | None = None,
                      est_gamma: float = 0.02, max_codim: int = 16,
                      info: dict | None = None,
                      diag: DiagnosticsLog | None = None) -> QuadraticAverage:
    """Per-coset linear parts for the shared quadratic part A.

    For each coset representative y of W, the shifted product
    h_y^y(x) = f(x+y) (-1)^(<x+y, A(x+y)> + <x+y, By>) is decomposed
    over W at threshold sigma/2; the best character r gives
    l_y = By + r and the sign fixes c_y.  Cosets where the list comes
    back empty keep l_y = By and get a common constant, chosen by
    estimating the assembled average with both constants and keeping
    the larger (their contribution is then nonnegative).
    """
    if W.codim > max_codim:
        raise ValueError(f"refusing to enumerate 2^{W.codim} cosets")
    if B != A + A.transpose():
        raise ValueError("B must equal A + A^T")
    n = f.n
    terms: dict[int, tuple[int, int]] = {}
    undecided: list[int] = []
    for y in W.coset_reps():
        y = int(y)
        by = B.mul_vec(y)
        phase = QuadraticPhase.canonical(A, by, 0)

        def h_shift(xs, _y=np.uint64(y), _phase=phase):
            pts = xs ^ _y
            return f.query_many(pts) * _phase.eval_many(pts)

        orc = CallableOracle(h_shift, n, bound=f.bound)
        found = goldreich_levin_subspace(orc, W, sigma / 2.0, delta, rng,
                                         diag=diag, **(gl_kwargs or {}))
        if found:
            r, coeff = found[0]
            c_y = (0 if coeff > 0 else 1) ^ dot(r, y)
            terms[y] = (by ^ r, c_y)
        else:
            undecided.append(y)
    if undecided:
        trials = []
        for cbit in (0, 1):
            trial = dict(terms)
            for y in undecided:
                trial[y] = (B.mul_vec(y), cbit)
            Q = QuadraticAverage(W, A, trial, n)
            est = estimate_correlation(f, Q.as_oracle(), est_gamma, delta, rng)
            if diag is not None:
                diag.record("sign-trial", 0, delta)
            trials.append((est, Q))
        trials.sort(key=lambda t: -t[0])
        if info is not None:
            info["undecided"] = list(undecided)
            info["sign_trial_estimates"] = [t[0] for t in trials]
        return trials[0][1]
    if info is not None:
        info["undecided"] = []
    return QuadraticAverage(W, A, terms, n)


@dataclass(frozen=True)
class FindAverageResult:
    average: QuadraticAverage
    correlation_estimate: float
    attempts: int
    queries: int

    @property
    def complexity(self) -> int:
        return self.average.complexity


AVERAGE_DEFAULTS = dict(
    phi_gamma=None, phi_delta=0.1,  # None = scale with epsilon
    phi_t_bucket=None, phi_t_leaf=None, phi_repeats=1, phi_live_cap=20,
    # the model map narrows the accepted sheet by up to 2^-m; desk-sized
    # sheets only tolerate a thin cut, so the driver default is small
    # (ModelParams itself defaults to the documented m = 4)
    model_m=1, theta=0.05, presample=160,
    bog_t_bucket=1 << 17, bog_t_leaf=1 << 17, bog_live_cap=48, bog_repeats=1,
    bog_noise_z=3.0,
    sigma=0.25, parts_t_bucket=4096, parts_t_leaf=4096, parts_live_cap=64,
    parts_repeats=1,
    # accepted sheets here are far sparser than the choice graph of a
    # noisy codeword; a larger rho scale keeps the neighborhood trimming
    # from rejecting sheet members on spurious empty-sample events
    rho=0.45, anchor_gamma=0.2,
    tau_accept=0.1, m_attempts=24, anchors_per_sampler=4,
    validate_gamma=0.02, validate_delta=0.01,
    complexity_cap=None, gate_cap=1 << 26,
)

_BSG_KNOBS = ("rho", "interval", "n_subintervals", "r", "s", "t_edge")


def find_quadratic_average(f: FunctionOracle, epsilon: float, delta: float,
                           rng, *, profile: str = "practical",
                           diag: DiagnosticsLog | None = None,
                           **overrides) -> FindAverageResult | None:
    """Either a quadratic average correlating with f, or bottom (None).

    Retry loop over draws of (choice function, anchor, thresholds,
    model map Gamma, value c): local linear choice -> local symmetry
    argument -> per-coset linear parts -> validation of the estimated
    correlation against tau_accept.  The practical profile picks c as
    the majority model value over a presample of promising points (a
    uniformly random c works with probability ~theta and would be
    re-drawn anyway) and rejects attempts whose complexity exceeds the
    configured cap.
    """
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    knobs = dict(AVERAGE_DEFAULTS)
    knobs.update(overrides)
    start_queries = f.query_count

    if profile == "paper":
        u_hat = estimate_u3(f, epsilon / 4.0, delta / 4.0, rng)
        if u_hat < 3.0 * epsilon / 4.0:
            return None
        theta, _, m_model = paper_model_scales(epsilon)
        sigma = epsilon ** 2  # nominal poly(eps) scale; exponent is a knob
        tau = knobs.get("tau_accept_paper", sigma * sigma / 20.0)
        m_attempts = math.ceil((4.0 / epsilon ** 16) ** 4 / theta
                               * math.log(max(2.0, 1.0 / delta)))
        phi_gamma = phi_delta = epsilon ** 16 / 18.0
        gl_phi: dict = {}
        anchors = 1
    else:
        if not u3_power_gate(f, 3.0 * epsilon / 4.0, rng,
                             t_cap=int(knobs["gate_cap"])):
            return None
        theta = knobs["theta"]
        m_model = knobs["model_m"]
        sigma = knobs["sigma"]
        tau = knobs["tau_accept"]
        m_attempts = knobs["m_attempts"]
        phi_gamma, phi_delta = knobs["phi_gamma"], knobs["phi_delta"]
        if phi_gamma is None:
            phi_gamma = min(0.15, max(0.08, epsilon))
        tb = knobs["phi_t_bucket"] or math.ceil(34.0 / phi_gamma ** 2)
        tl = knobs["phi_t_leaf"] or math.ceil(2 * tb / 3)
        gl_phi = dict(t_bucket=tb, t_leaf=tl,
                      repeats=knobs["phi_repeats"], live_cap=knobs["phi_live_cap"])
        anchors = max(1, int(knobs["anchors_per_sampler"]))

    bog_gl = dict(t_bucket=knobs["bog_t_bucket"], t_leaf=knobs["bog_t_leaf"],
                  live_cap=knobs["bog_live_cap"], repeats=knobs["bog_repeats"],
                  noise_floor_z=knobs["bog_noise_z"])
    parts_gl = dict(t_bucket=knobs["parts_t_bucket"], t_leaf=knobs["parts_t_leaf"],
                    live_cap=knobs["parts_live_cap"], repeats=knobs["parts_repeats"])
    bsg_over = {k: v for k, v in knobs.items() if k in _BSG_KNOBS}

    sampler = None
    for attempt in range(1, m_attempts + 1):
        if sampler is None or (attempt - 1) % anchors == 0:
            sampler = PhiSampler(f, phi_gamma, phi_delta, rng, diag=diag,
                                 **gl_phi)
        params = choose_bsg_params(epsilon, rng, profile=profile, **bsg_over)
        anchor_bar = params.gamma1 if profile == "paper" \
            else max(params.gamma1, knobs["anchor_gamma"])
        u = screen_anchor(sampler, anchor_bar, rng)
        if u is None:
            continue
        # model draw; the practical profile votes c as the majority model
        # value over points whose edge test against the anchor passes
        # (those are the sheet the restriction should keep)
        model = choose_model_params(f.n, rng, profile=profile, epsilon=epsilon,
                                    theta=theta, m=m_model)
        if profile != "paper" and m_model > 0:
            votes: dict[int, int] = {}
            tries = 0
            hits = 0
            while hits < 12 and tries < knobs["presample"]:
                tries += 1
                y = int(rng.integers(0, 1 << f.n))
                rec = sampler.record(y)
                if not (rec.from_list and abs(rec.coeff) >= params.gamma1):
                    continue
                if edge_test(sampler, u, (y, rec.alpha), params.gamma1,
                             params.t_edge, rng, diag=diag):
                    key = model.gamma_map.mul_vec(rec.alpha)
                    votes[key] = votes.get(key, 0) + 1
                    hits += 1
            if votes:
                c_major = max(votes, key=lambda k: (votes[k], -k))
                model = ModelParams(model.gamma_map, c_major, model.m,
                                    model.theta, model.theta_prime, model.profile)
        lc = local_linear_choice(f, sampler, u, params, model, delta, rng,
                                 bog_gl=(None if profile == "paper" else bog_gl),
                                 diag=diag)
        if lc is None:
            continue
        z_c = lc.T.mul_vec(lc.c1) ^ lc.c2
        W, B, c1 = local_symmetrize(lc.V, lc.T, lc.c1, z_c, f.n)
        cap = knobs.get("complexity_cap")
        if cap is not None and W.codim > cap:
            continue
        if W.codim > 16:
            continue
        A = symmetric_split(B)
        Q = find_linear_parts(f, W, A, B, sigma, delta / 4.0, rng,
                              gl_kwargs=parts_gl, diag=diag)
        est = estimate_correlation(f, Q.as_oracle(), knobs["validate_gamma"],
                                   knobs["validate_delta"], rng)
        if diag is not None:
            diag.record("validate-average", 0, knobs["validate_delta"])
        if est < 0:
            Q, est = Q.negated(), -est
        if est >= tau:
            return FindAverageResult(average=Q, correlation_estimate=est,
                                     attempts=attempt,
                                     queries=f.query_count - start_queries)
    return None
