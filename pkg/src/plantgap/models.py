"""Instance generators and parameter records for planted-subgraph models.

Every generator consumes an explicit ``numpy.random.Generator``; nothing here
touches global RNG state, so calls are safe to run concurrently with
independent streams. Planted supports are fixed-size; binomial-sized variants
are obtained through :func:`subsample_binomial`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from scipy.stats import norm

# Densities are clamped away from {0, 1} before sampling so that
# log-likelihood terms downstream never degenerate.
PROB_FLOOR = 1e-12


def clamp_prob(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"probability {x} outside [0, 1]")
    return float(min(max(x, PROB_FLOOR), 1.0 - PROB_FLOOR))


@lru_cache(maxsize=16)
def triu_pairs(n: int):
    """Cached upper-triangle index pair arrays for an n-vertex graph."""
    return np.triu_indices(n, 1)


@dataclass
class Graph:
    """Simple undirected graph with an optional latent planted support.

    adj is a symmetric boolean matrix with an empty diagonal; planted, when
    present, is a sorted integer array of vertex indices.
    """

    n: int
    adj: np.ndarray
    planted: np.ndarray | None = None

    def validate(self) -> None:
        if self.adj.shape != (self.n, self.n):
            raise ValueError("adjacency shape mismatch")
        if self.adj.dtype != np.bool_:
            raise ValueError("adjacency must be boolean")
        if np.any(np.diag(self.adj)):
            raise ValueError("self-loops present")
        if not np.array_equal(self.adj, self.adj.T):
            raise ValueError("adjacency not symmetric")
        if self.planted is not None:
            s = np.asarray(self.planted)
            if s.size and (s.min() < 0 or s.max() >= self.n):
                raise ValueError("planted support outside vertex range")
            if np.unique(s).size != s.size:
                raise ValueError("planted support has duplicates")

    def edge_count(self) -> int:
        return int(self.adj.sum()) // 2

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1).astype(np.int64)

    def density_within(self, subset) -> float:
        s = np.asarray(subset, dtype=np.intp)
        if s.size < 2:
            return 0.0
        e = int(self.adj[np.ix_(s, s)].sum()) // 2
        return e / comb(s.size, 2)

    def relabel(self, perm: np.ndarray) -> "Graph":
        """Return the graph with vertex i renamed perm[i]."""
        inv = np.argsort(perm)
        adj = self.adj[np.ix_(inv, inv)]
        planted = None if self.planted is None else np.sort(perm[self.planted])
        return Graph(self.n, adj, planted)


def graph_from_triu_bits(n: int, bits: np.ndarray, planted=None) -> Graph:
    iu = triu_pairs(n)
    adj = np.zeros((n, n), dtype=bool)
    adj[iu] = bits
    adj |= adj.T
    if planted is not None:
        planted = np.sort(np.asarray(planted, dtype=np.int64))
    return Graph(n, adj, planted)


@dataclass
class PdsParams:
    """Planted dense subgraph: ambient density q, a uniform k-subset at p."""

    n: int
    k: int
    p: float
    q: float

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        # q == p is tolerated for degenerate null constructions
        if not 0.0 < self.q <= self.p <= 1.0:
            raise ValueError("need 0 < q <= p <= 1")


@dataclass
class KpcParams:
    """Partitioned planted clique: one planted vertex per part.

    partition defaults to k0 contiguous blocks of size N / k0.
    """

    N: int
    k0: int
    p: float
    q: float
    partition: list = field(default=None)

    def __post_init__(self):
        if self.N % self.k0 != 0:
            raise ValueError("k0 must divide N")
        size = self.N // self.k0
        if self.partition is None:
            self.partition = [np.arange(i * size, (i + 1) * size) for i in range(self.k0)]
        else:
            self.partition = [np.asarray(part, dtype=np.int64) for part in self.partition]
            seen = np.concatenate(self.partition) if self.partition else np.array([], dtype=np.int64)
            if len(self.partition) != self.k0 or any(p.size != size for p in self.partition):
                raise ValueError("partition must have k0 parts of size N/k0")
            if np.unique(seen).size != self.N or seen.size != self.N:
                raise ValueError("partition must cover [N] disjointly")
        if not 0.0 < self.q < self.p <= 1.0:
            raise ValueError("need 0 < q < p <= 1")


@dataclass
class PdsStarParams:
    """Detection pair with a mean-corrected null G(n, p0), p0 = q + gamma."""

    base: PdsParams
    gamma: float
    p0: float

    def __post_init__(self):
        n, k, p, q = self.base.n, self.base.k, self.base.p, self.base.q
        if abs(self.p0 - (q + self.gamma)) > 1e-12:
            raise ValueError("p0 != q + gamma")
        if abs(self.p0 - (p - (n * n / (k * k) - 1.0) * self.gamma)) > 1e-12:
            raise ValueError("p0 violates the mean-match identity")
        if not 0.0 < self.p0 < 1.0:
            raise ValueError("p0 outside (0, 1)")


@dataclass
class IsbmParams:
    """Two-community imbalanced SBM with a density-matched null G(n, P0).

    The matching constraint is checked at density level: both weighted row
    sums (k P11 + (n-k) P12)/n and (k P12 + (n-k) P22)/n must agree with P0
    within tol.
    """

    n: int
    k: int
    r: int
    P11: float
    P12: float
    P22: float
    P0: float
    tol: float = 1e-6
    residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.n != self.k * self.r:
            raise ValueError("need n = k * r")
        for name in ("P11", "P12", "P22", "P0"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} outside (0, 1)")
        row1 = (self.k * self.P11 + (self.n - self.k) * self.P12) / self.n
        row2 = (self.k * self.P12 + (self.n - self.k) * self.P22) / self.n
        self.residual = max(abs(self.P0 - row1), abs(self.P0 - row2))
        if self.residual > self.tol:
            raise ValueError(
                f"degree-matching residual {self.residual:.3g} exceeds tolerance {self.tol:.3g}"
            )


@dataclass
class BcParams:
    """Gaussian biclustering: mu added on a k x k support rectangle."""

    n: int
    k: int
    mu: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")


@dataclass
class BspcaParams:
    """Biased sparse PCA: spiked covariance I + theta v v^T with a k-sparse,
    sign-biased unit spike (entries +-1/sqrt(k), positive count c with
    |c - k/2| > delta k)."""

    n: int
    d: int
    k: int
    theta: float
    delta: float

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")
        if not 1 <= self.k <= self.d:
            raise ValueError("need 1 <= k <= d")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        feasible = [c for c in range(self.k + 1) if abs(c - self.k / 2.0) > self.delta * self.k]
        if not feasible:
            raise ValueError("sign-bias margin unsatisfiable")


def sample_erdos_renyi(n: int, q: float, rng: np.random.Generator) -> Graph:
    """G(n, q): each unordered pair included independently with probability q."""
    if n < 1:
        raise ValueError("need n >= 1")
    q = clamp_prob(q)
    iu = triu_pairs(n)
    bits = rng.random(iu[0].size) < q
    return graph_from_triu_bits(n, bits)


def sample_pds(params: PdsParams, rng: np.random.Generator) -> Graph:
    """Planted dense subgraph on a uniform k-subset."""
    n, k = params.n, params.k
    p = clamp_prob(params.p)
    q = clamp_prob(params.q)
    support = np.sort(rng.choice(n, size=k, replace=False))
    in_support = np.zeros(n, dtype=bool)
    in_support[support] = True
    iu = triu_pairs(n)
    pair_planted = in_support[iu[0]] & in_support[iu[1]]
    probs = np.where(pair_planted, p, q)
    bits = rng.random(iu[0].size) < probs
    return graph_from_triu_bits(n, bits, planted=support)


def sample_kpc(params: KpcParams, rng: np.random.Generator) -> Graph:
    """Partitioned planted clique: support drawn one vertex per part."""
    p = clamp_prob(params.p)
    q = clamp_prob(params.q)
    support = np.sort([part[rng.integers(part.size)] for part in params.partition])
    for part in params.partition:
        assert np.intersect1d(support, part).size == 1
    in_support = np.zeros(params.N, dtype=bool)
    in_support[support] = True
    iu = triu_pairs(params.N)
    probs = np.where(in_support[iu[0]] & in_support[iu[1]], p, q)
    bits = rng.random(iu[0].size) < probs
    return graph_from_triu_bits(params.N, bits, planted=support)


def sample_isbm(params: IsbmParams, rng: np.random.Generator) -> Graph:
    """Imbalanced two-block SBM; planted community is a uniform k-subset."""
    n, k = params.n, params.k
    support = np.sort(rng.choice(n, size=k, replace=False))
    inside = np.zeros(n, dtype=bool)
    inside[support] = True
    iu = triu_pairs(n)
    both = inside[iu[0]] & inside[iu[1]]
    neither = ~inside[iu[0]] & ~inside[iu[1]]
    probs = np.where(both, clamp_prob(params.P11),
                     np.where(neither, clamp_prob(params.P22), clamp_prob(params.P12)))
    bits = rng.random(iu[0].size) < probs
    return graph_from_triu_bits(n, bits, planted=support)


def isbm_params_from_gamma(n: int, r: int, gamma: float) -> IsbmParams:
    """Normal-CDF parametrization of the matched ISBM at signal gamma.

    P0 is the average of the two weighted row sums, which satisfies the
    degree-matching constraint up to a cubic-in-gamma residual; the declared
    tolerance scales accordingly.
    """
    if n % r != 0:
        raise ValueError("r must divide n")
    k = n // r
    P11 = float(norm.cdf((r - 1) ** 2 * gamma / r ** 2))
    P12 = float(norm.cdf(-(r - 1) * gamma / r ** 2))
    P22 = float(norm.cdf(gamma / r ** 2))
    row1 = (k * P11 + (n - k) * P12) / n
    row2 = (k * P12 + (n - k) * P22) / n
    P0 = 0.5 * (row1 + row2)
    tol = max(1e-6, 4.0 * abs(gamma) ** 3 / r ** 2)
    return IsbmParams(n=n, k=k, r=r, P11=P11, P12=P12, P22=P22, P0=P0, tol=tol)


def pds_star_null(params: PdsParams, gamma: float) -> PdsStarParams:
    """Mean-corrected null for a PDS alternative.

    The first-moment identity is taken in the ordered-pair convention, where
    k^2 (p - q) + n^2 q = n^2 p0 holds exactly.
    """
    n, k, p, q = params.n, params.k, params.p, params.q
    p0 = q + gamma
    lhs = k * k * (p - q) + n * n * q
    if abs(lhs - n * n * p0) > n * n * 1e-12:
        raise ValueError("gamma incompatible with the mean-match identity")
    return PdsStarParams(base=params, gamma=gamma, p0=p0)


def pds_star_gamma(params: PdsParams) -> float:
    """The unique gamma making the null mean-matched: (p - q) k^2 / n^2."""
    return (params.p - params.q) * params.k ** 2 / params.n ** 2


def sample_biclustering(params: BcParams, rng: np.random.Generator):
    """Gaussian matrix with mu added on a uniform k x k rectangle.

    Returns (matrix, row_support, col_support).
    """
    n, k = params.n, params.k
    rows = np.sort(rng.choice(n, size=k, replace=False))
    cols = np.sort(rng.choice(n, size=k, replace=False))
    M = rng.standard_normal((n, n))
    M[np.ix_(rows, cols)] += params.mu
    return M, rows, cols


def sample_bspca(params: BspcaParams, rng: np.random.Generator):
    """Spiked-covariance sample: n rows in dimension d, covariance I + theta vv^T.

    The construction x = z + (sqrt(1 + theta) - 1)(v^T z) v is exact for unit
    v. Returns (samples, v).
    """
    d, k = params.d, params.k
    support = rng.choice(d, size=k, replace=False)
    while True:
        signs = np.where(rng.random(k) < 0.5, 1.0, -1.0)
        c_pos = int((signs > 0).sum())
        if abs(c_pos - k / 2.0) > params.delta * k:
            break
    v = np.zeros(d)
    v[support] = signs / np.sqrt(k)
    z = rng.standard_normal((params.n, d))
    scale = np.sqrt(1.0 + params.theta) - 1.0
    x = z + scale * np.outer(z @ v, v)
    return x, v


def subsample_binomial(graph: Graph, keep_fraction: float, rng: np.random.Generator) -> Graph:
    """Induced subgraph on an iid Bernoulli(keep_fraction) vertex subset.

    Conditioned on its size m the kept set is uniform, so a fixed-size-k
    planted support intersects it in a Hypergeometric(n, k, m) number of
    vertices; unconditionally the intersection is Binomial(k, keep_fraction).
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError("keep_fraction must lie in (0, 1]")
    keep = np.flatnonzero(rng.random(graph.n) < keep_fraction)
    if keep.size == 0:
        raise ValueError("subsample kept no vertices")
    adj = graph.adj[np.ix_(keep, keep)]
    planted = None
    if graph.planted is not None:
        lookup = -np.ones(graph.n, dtype=np.int64)
        lookup[keep] = np.arange(keep.size)
        hit = lookup[graph.planted]
        planted = np.sort(hit[hit >= 0])
    return Graph(keep.size, adj.copy(), planted)
