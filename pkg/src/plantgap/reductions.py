"""End-to-end average-case reductions between planted-structure models.

Pipelines: partition-leaked planted clique to mean-corrected dense subgraph,
the same source to a two-community imbalanced block model, dense subgraph to
Gaussian biclustering, biclustering to biased sparse PCA, and the
non-homogeneous lift. Each pipeline records a trace with per-stage seeds and
declared total-variation budgets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import ceil, exp, inf, log, sqrt

import numpy as np
from scipy.special import ndtr

from .designs import (CenteredPairDesign, KroneckerDesign, calibrate_c_hat,
                      mu_design_from_c_hat, sample_centered_matrix,
                      sample_regular_digraph, verify_operator_norm)
from .kernels import (RejectionKernelSpec, clone_density, densify_to_target,
                      graph_clone, kernel_mu_bound, rejection_kernel)
from .models import Graph, graph_from_triu_bits, triu_pairs


# ---------------------------------------------------------------------------
# parameter derivation

@dataclass(frozen=True)
class PdsStarReductionParams:
    """Derived constants of the clique-to-dense-subgraph pipeline.

    mu is the effective planted mean scale: the kernel mean mu_rk times the
    design scale mu_design. gamma drives the target densities P1 (on
    support) and P2 (off support).
    """

    N: int
    k0: int
    p: float
    q: float
    r: int
    n: int
    k: int
    Q: float
    mu_rk: float
    mu_design: float
    mu: float
    gamma: float
    P1: float
    P2: float
    R_rk: int
    c_hat: float
    target_P0: float | None = None

    def __post_init__(self):
        N, k0, p, r, n = self.N, self.k0, self.p, self.r, self.n
        Q = self.Q
        if abs(Q - clone_density(p, self.q, 2)) > 1e-12:
            raise ValueError("Q inconsistent with clone density")
        if p - Q <= 0:
            raise ValueError("planted density must exceed clone ambient density")
        lo = (1.0 + p / Q) * N
        if n % (k0 * r) != 0 or n + 1e-9 < lo or n - k0 * r >= lo - 1e-9:
            raise ValueError("n is not the smallest admissible multiple of k0*r")
        if self.k != n // r or (n // k0) % r != 0:
            raise ValueError("target sizes inconsistent")
        if abs(self.mu - self.mu_rk * self.mu_design) > 1e-12 * max(1.0, self.mu):
            raise ValueError("mu must equal mu_rk * mu_design")
        scale = (k0 * r / n) ** 1.5
        if abs(self.gamma - self.mu * scale) > 1e-12:
            raise ValueError("gamma inconsistent")
        if abs(self.P1 - float(ndtr((r * r - 1) * self.gamma / r ** 2))) > 1e-12:
            raise ValueError("P1 inconsistent")
        if abs(self.P2 - float(ndtr(-self.gamma / r ** 2))) > 1e-12:
            raise ValueError("P2 inconsistent")
        delta = log(p / Q)
        if p < 1.0:
            delta = min(delta, log((1.0 - Q) / (1.0 - p)))
        bound = delta / (12.0 * self.c_hat * sqrt(log(N) + log(1.0 / (p - Q))))
        if self.mu > bound * (1.0 + 1e-9):
            raise ValueError("mu exceeds the admissible reduction bound")


def derive_pds_star_params(N: int, k0: int, p: float, q: float, r: int,
                           alpha: float = 0.1, R_rk: int | None = None,
                           target_P0: float | None = None,
                           c_hat: float | None = None) -> PdsStarReductionParams:
    if N % k0 != 0:
        raise ValueError("k0 must divide N")
    if r > (N / k0) ** (1.0 - alpha) + 1e-9:
        raise ValueError("ratio r too large for the leaked partition")
    Q = clone_density(p, q, 2)
    if p - Q <= 0:
        raise ValueError("mean bound empty: parameters infeasible")
    n = int(ceil((1.0 + p / Q) * N / (k0 * r))) * k0 * r
    m = n // k0
    if R_rk is None:
        R_rk = n ** 3
    mu_rk = kernel_mu_bound(p, Q, R_rk)
    if c_hat is None:
        c_hat = calibrate_c_hat(m, r)
    mu_design = mu_design_from_c_hat(c_hat)
    mu = mu_rk * mu_design
    gamma = mu * (k0 * r / n) ** 1.5
    return PdsStarReductionParams(
        N=N, k0=k0, p=p, q=q, r=r, n=n, k=n // r, Q=Q,
        mu_rk=mu_rk, mu_design=mu_design, mu=mu, gamma=gamma,
        P1=float(ndtr((r * r - 1) * gamma / r ** 2)),
        P2=float(ndtr(-gamma / r ** 2)),
        R_rk=R_rk, c_hat=c_hat, target_P0=target_P0)


def isbm_signal_gamma(params: PdsStarReductionParams) -> float:
    """Rank-one signal scale of the block-model pipeline: the planted mean
    is (gamma/r^2)(r 1_A - 1)(r 1_A - 1)^T per block."""
    m = params.n // params.k0
    return params.mu_rk * (params.r / m) / params.c_hat ** 2


# ---------------------------------------------------------------------------
# trace plumbing

_STAGE_ORDER = ("embed", "design", "rotate", "threshold", "permute", "densify")


@dataclass(frozen=True)
class StageRecord:
    name: str
    seed: int | None
    eps: float
    ms: float = 0.0
    note: str = ""


@dataclass(frozen=True)
class ReductionTrace:
    stages: tuple[StageRecord, ...]
    block_indices: tuple[int, ...] | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        pos = -1
        for st in self.stages:
            if st.name not in _STAGE_ORDER:
                raise ValueError(f"unknown stage {st.name!r}")
            nxt = _STAGE_ORDER.index(st.name)
            if nxt <= pos:
                raise ValueError("stages out of pipeline order")
            pos = nxt

    @property
    def total_eps(self) -> float:
        return float(sum(st.eps for st in self.stages))


# ---------------------------------------------------------------------------
# embedding stage

@dataclass(frozen=True)
class KPartiteEmbedding:
    F: np.ndarray = field(repr=False)
    parts: tuple = ()
    targets: tuple = ()
    part_positions: tuple[int, ...] | None = None
    clip_events: int = 0


def to_k_partite_submatrix(G: Graph, partition, p: float, q: float, n: int,
                           rng: np.random.Generator) -> KPartiteEmbedding:
    """Embed a partition-leaked source into an n x n bit matrix.

    Two clones fill the two triangles of the embedded blocks; everything
    outside the embedding is ambient at the clone density; the diagonal is
    planted through per-part inclusion plus a Binomial top-up so its count
    matches the ambient law up to clipping.
    """
    k0 = len(partition)
    if n % k0 != 0:
        raise ValueError("n must be a multiple of the part count")
    m = n // k0
    src = partition[0].size
    if src > m:
        raise ValueError("embedding infeasible: target parts too small")
    Q = clone_density(p, q, 2)
    g1, g2 = graph_clone(G, p, q, 2, rng)
    F = rng.random((n, n)) < Q
    targets = []
    for i in range(k0):
        t = np.sort(rng.choice(m, size=src, replace=False)) + i * m
        targets.append(t)
    for i in range(k0):
        for j in range(k0):
            if i == j:
                continue
            if i > j:
                F[np.ix_(targets[i], targets[j])] = g1.adj[np.ix_(partition[i], partition[j])]
            else:
                F[np.ix_(targets[i], targets[j])] = g2.adj[np.ix_(partition[j], partition[i])].T
    clip = 0
    upper = np.triu(np.ones((src, src), dtype=bool), 1)
    for kk in range(k0):
        T, E = targets[kk], partition[kk]
        blk1 = g1.adj[np.ix_(E, E)]
        blk2 = g2.adj[np.ix_(E, E)]
        F[np.ix_(T, T)] = np.where(upper, blk1, blk2)
        x = rng.random(src) < p
        F[T, T] = x
        rest = np.setdiff1d(np.arange(kk * m, (kk + 1) * m), T)
        F[rest, rest] = False
        y = max(int(rng.binomial(m, Q)) - int(x.sum()), 0)
        if y > rest.size:
            clip += 1
            y = rest.size
        if y:
            pick = rest[rng.choice(rest.size, size=y, replace=False)]
            F[pick, pick] = True
    positions = None
    if G.planted is not None:
        positions = []
        for i in range(k0):
            inside = np.intersect1d(G.planted, partition[i])
            if inside.size != 1:
                raise ValueError("source must plant exactly one vertex per part")
            idx = int(np.searchsorted(partition[i], inside[0]))
            positions.append(int(targets[i][idx] - i * m))
        positions = tuple(positions)
    return KPartiteEmbedding(F=F, parts=tuple(np.arange(i * m, (i + 1) * m) for i in range(k0)),
                             targets=tuple(targets), part_positions=positions,
                             clip_events=clip)


# ---------------------------------------------------------------------------
# rotation stage

def bernoulli_rotate_block(bits, design, p_hi: float, p_lo: float, mu: float,
                           R_rk: int, rng: np.random.Generator,
                           skip_whitening: bool = False) -> np.ndarray:
    """Gaussianize a bit block entrywise, push it through the design, and
    add whitening noise so the output covariance is exactly the identity.

    skip_whitening exists only as a deliberate corruption for negative
    controls; it is never used by the pipelines.
    """
    flat = np.asarray(bits).reshape(-1)
    if flat.size != design.in_dim:
        raise ValueError("block length does not match design row count")
    spec = RejectionKernelSpec(p=p_hi, q=p_lo, mu=mu, R=R_rk)
    z = rejection_kernel(flat.astype(bool), spec, rng)
    out = design.rmatvec(z) / design.sigma_bound
    if not skip_whitening:
        out = out + design.whitening_stack(rng, 1)[0]
    return out


def _assemble_and_finish(embed: KPartiteEmbedding, design, params, rng,
                         block_root: int, skip_whitening: bool):
    n, k0 = params.n, params.k0
    m = n // k0
    M = np.empty((n, n))
    for i in range(k0):
        for j in range(i, k0):
            brng = np.random.default_rng([block_root, i, j])
            bits = embed.F[i * m:(i + 1) * m, j * m:(j + 1) * m]
            out = bernoulli_rotate_block(bits, design, params.p, params.Q,
                                         params.mu_rk, params.R_rk, brng,
                                         skip_whitening=skip_whitening)
            M[i * m:(i + 1) * m, j * m:(j + 1) * m] = out.reshape(m, m)
    iu = triu_pairs(n)
    return M[iu] >= 0.0


def _planted_from_embedding(embed: KPartiteEmbedding, neighborhoods, m: int):
    if embed.part_positions is None:
        return None
    spans = [i * m + neighborhoods[t] for i, t in enumerate(embed.part_positions)]
    return np.sort(np.concatenate(spans))


def _declared_eps_embed(params) -> float:
    N, k0, p, n, Q = params.N, params.k0, params.p, params.n, params.Q
    return min(1.0, 4.0 * k0 * exp(-(Q * Q * N * N) / (48.0 * p * k0 * n)))


def _declared_eps_rotate(params) -> float:
    return min(1.0, params.n ** 2 / params.R_rk ** 3)


def reduce_kpc_to_pds_star(G: Graph, params: PdsStarReductionParams,
                           rng: np.random.Generator, design=None,
                           partition=None, skip_whitening: bool = False):
    """Full pipeline to the mean-corrected dense-subgraph target.

    Returns (graph, trace). The rotation uses the recentered Kronecker
    design applied transposed, so the planted mean pattern is the design row
    indexed by the embedded positions.
    """
    t0 = time.perf_counter()
    if partition is None:
        partition = _contiguous_partition(params.N, params.k0)
    m = params.n // params.k0
    embed = to_k_partite_submatrix(G, partition, params.p, params.q, params.n, rng)
    t1 = time.perf_counter()
    if design is None:
        dg = sample_regular_digraph(m, m // params.r, rng)
        design = KroneckerDesign(dg, params.mu_design)
    t2 = time.perf_counter()
    block_root = int(rng.integers(0, 2 ** 62))
    bits = _assemble_and_finish(embed, design, params, rng, block_root, skip_whitening)
    planted = _planted_from_embedding(embed, design.dg.out_neighborhoods(), m)
    g = graph_from_triu_bits(params.n, bits, planted=planted)
    t3 = time.perf_counter()
    perm = rng.permutation(params.n)
    g = g.relabel(perm)
    t4 = time.perf_counter()
    stages = [
        StageRecord("embed", None, _declared_eps_embed(params), (t1 - t0) * 1e3,
                    note=f"clip_events={embed.clip_events}"),
        StageRecord("design", None, 0.0, (t2 - t1) * 1e3),
        StageRecord("rotate", block_root, _declared_eps_rotate(params), (t3 - t2) * 1e3),
        StageRecord("threshold", None, 0.0, 0.0),
        StageRecord("permute", None, 0.0, (t4 - t3) * 1e3),
    ]
    if params.target_P0 is not None:
        g = densify_to_target(g, params.target_P0, rng)
        stages.append(StageRecord("densify", None, 0.0, 0.0))
    trace = ReductionTrace(stages=tuple(stages),
                           block_indices=embed.part_positions,
                           extras={"pipeline": "pds_star", "gamma": params.gamma})
    return g, trace


def reduce_kpc_to_isbm(G: Graph, params: PdsStarReductionParams,
                       rng: np.random.Generator, design=None,
                       partition=None, skip_whitening: bool = False):
    """Same pipeline shape with the plain Kronecker-square design (no
    recentering), landing on the two-community block-model target."""
    t0 = time.perf_counter()
    if partition is None:
        partition = _contiguous_partition(params.N, params.k0)
    m = params.n // params.k0
    embed = to_k_partite_submatrix(G, partition, params.p, params.q, params.n, rng)
    t1 = time.perf_counter()
    if design is None:
        design = _sample_pair_design(m, params.r, params.c_hat, rng)
    t2 = time.perf_counter()
    block_root = int(rng.integers(0, 2 ** 62))
    bits = _assemble_and_finish(embed, design, params, rng, block_root, skip_whitening)
    planted = _planted_from_embedding(embed, design.base.digraph.out_neighborhoods(), m)
    g = graph_from_triu_bits(params.n, bits, planted=planted)
    t3 = time.perf_counter()
    perm = rng.permutation(params.n)
    g = g.relabel(perm)
    t4 = time.perf_counter()
    trace = ReductionTrace(stages=(
        StageRecord("embed", None, _declared_eps_embed(params), (t1 - t0) * 1e3,
                    note=f"clip_events={embed.clip_events}"),
        StageRecord("design", None, 0.0, (t2 - t1) * 1e3),
        StageRecord("rotate", block_root, _declared_eps_rotate(params), (t3 - t2) * 1e3),
        StageRecord("threshold", None, 0.0, 0.0),
        StageRecord("permute", None, 0.0, (t4 - t3) * 1e3),
    ), block_indices=embed.part_positions,
        extras={"pipeline": "isbm", "gamma": isbm_signal_gamma(params)})
    return g, trace


def _contiguous_partition(N: int, k0: int):
    if N % k0 != 0:
        raise ValueError("k0 must divide N")
    step = N // k0
    return tuple(np.arange(i * step, (i + 1) * step) for i in range(k0))


def _sample_pair_design(m: int, r: int, c_hat: float, rng: np.random.Generator,
                        max_tries: int = 25) -> CenteredPairDesign:
    last = None
    for _ in range(max_tries):
        try:
            cand = CenteredPairDesign(sample_centered_matrix(m, r, rng), c_hat)
        except ValueError as exc:
            last = exc
            continue
        if verify_operator_norm(cand).passed:
            return cand
    raise ValueError(f"no admissible pair design after {max_tries} tries: {last}")


# ---------------------------------------------------------------------------
# dense subgraph -> Gaussian biclustering

@dataclass(frozen=True)
class BcImage:
    matrix: np.ndarray = field(repr=False)
    row_support: np.ndarray | None = None
    col_support: np.ndarray | None = None


def bc_recovery_map(pds_graph: Graph, rho: float, rng: np.random.Generator) -> BcImage:
    """Map a dense-subgraph instance (ambient 1/2, planted 1/2 + rho) to an
    asymmetric Gaussian biclustering matrix with mean mu on the planted
    rectangle. Columns are re-randomized so the column support is an
    independent uniform subset."""
    n = pds_graph.n
    if rho == 0.0:
        return BcImage(matrix=rng.standard_normal((n, n)))
    if not 1.0 / n <= rho <= 0.5:
        raise ValueError("rho out of range")
    mu = log(1.0 + 2.0 * rho) / (2.0 * sqrt(6.0 * log(n) + 2.0 * log(2.0)))
    R = max(2, int(n * (2.0 * rho) ** (1.0 / 3.0)))
    spec = RejectionKernelSpec(p=0.5 + rho, q=0.5, mu=mu, R=R)
    sigma = rng.permutation(n)
    bits = pds_graph.adj[:, sigma].copy()
    # the n collision cells read the empty diagonal; give them fresh coins
    bits[sigma, np.arange(n)] = rng.random(n) < 0.5
    matrix = rejection_kernel(bits, spec, rng)
    rows = pds_graph.planted
    cols = None
    if rows is not None:
        cols = np.flatnonzero(np.isin(sigma, rows))
    return BcImage(matrix=matrix, row_support=rows, col_support=cols)


# ---------------------------------------------------------------------------
# biclustering -> biased sparse PCA

def random_rotation_to_bspca(M: np.ndarray, tau: int,
                             rng: np.random.Generator) -> np.ndarray:
    """Rotate an m x n mean-signal matrix into n spiked-covariance samples.

    Appends (tau-1)n fresh noise columns and right-multiplies by the first n
    columns of a Haar orthogonal factor; pure noise maps exactly to pure
    noise, a mean spike of scale mu becomes a covariance spike of strength
    mu^2 (support sizes) / (tau n). Rows of the result are the samples.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("need a matrix")
    m, n = M.shape
    if int(tau) != tau or tau < 2:
        raise ValueError("tau must be an integer >= 2")
    tau = int(tau)
    if tau * n > 10 ** 7:
        raise ValueError("tau n exceeds the size budget")
    wide = np.concatenate([M, rng.standard_normal((m, (tau - 1) * n))], axis=1)
    g = rng.standard_normal((tau * n, n))
    qmat, rmat = np.linalg.qr(g)
    qmat = qmat * np.where(np.diag(rmat) < 0.0, -1.0, 1.0)
    return (wide @ qmat).T


# ---------------------------------------------------------------------------
# non-homogeneous lift

def lift_pc_nonhomogeneous(G: Graph, k: int, t: int, rng: np.random.Generator) -> Graph:
    """Add (t-1)k planted vertices at intra density t/(2(t-1)) and cross
    density 1/2, then relabel uniformly. Planted size becomes t k."""
    if t < 2:
        raise ValueError("t must be at least 2")
    n0 = G.n
    add = (t - 1) * k
    n1 = n0 + add
    adj = np.zeros((n1, n1), dtype=bool)
    adj[:n0, :n0] = G.adj
    p_new = t / (2.0 * (t - 1))
    cross = rng.random((add, n0)) < 0.5
    adj[n0:, :n0] = cross
    adj[:n0, n0:] = cross.T
    intra = np.triu(rng.random((add, add)) < p_new, 1)
    adj[n0:, n0:] = intra | intra.T
    if G.planted is not None:
        if G.planted.size != k:
            raise ValueError("planted size must equal k")
        planted = np.concatenate([G.planted, np.arange(n0, n1)])
    else:
        planted = None
    g = Graph(n=n1, adj=adj, planted=None if planted is None else np.sort(planted))
    return g.relabel(rng.permutation(n1))
