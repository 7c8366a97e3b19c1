"""Entry-level distribution transforms.

Gaussian rejection kernels push Bernoulli bits to near-Gaussian reals, graph
cloning produces conditionally independent copies at a reduced ambient
density, thresholding maps Gaussian matrices back to graphs, and a density
post-correction retargets an edge marginal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, exp, inf, log, sqrt

import numpy as np

from .models import Graph, graph_from_triu_bits, triu_pairs

_NORM = 1.0 / sqrt(2.0 * np.pi)


def _phi(z):
    return _NORM * np.exp(-0.5 * np.square(z))


def kernel_mu_bound(p: float, q: float, R: float) -> float:
    """Largest admissible kernel mean for source pair (p, q) at precision R.

    delta / (2 sqrt(6 log R + 2 log (p-q)^-1)) with
    delta = min(log(p/q), log((1-q)/(1-p))); the second term is +inf at p=1.
    """
    delta = log(p / q)
    if p < 1.0:
        delta = min(delta, log((1.0 - q) / (1.0 - p)))
    return delta / (2.0 * sqrt(6.0 * log(R) + 2.0 * log(1.0 / (p - q))))


@dataclass(frozen=True)
class RejectionKernelSpec:
    """Parameters of one Bernoulli-to-Gaussian rejection kernel.

    Bits drawn Bern(p) map within TV O(R^-3) of N(mu, 1), bits drawn Bern(q)
    within O(R^-3) of N(0, 1). Validation happens here so sampling never has
    to re-check.
    """

    p: float
    q: float
    mu: float
    R: int
    floor: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.q < self.p <= 1.0:
            raise ValueError("need 0 < q < p <= 1")
        if min(self.q, 1.0 - self.q, self.p - self.q) < self.floor:
            raise ValueError("source densities too close to degenerate")
        if self.R < 2:
            raise ValueError("R must be at least 2")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        bound = kernel_mu_bound(self.p, self.q, self.R)
        if self.mu > bound * (1.0 + 1e-9) + 1e-15:
            raise ValueError(f"mu={self.mu} exceeds admissible bound {bound}")

    def mean_given_rate(self, s: float) -> float:
        """Exact pushforward mean when the input bit is Bern(s)."""
        return self.mu * (s - self.q) / (self.p - self.q)

    def signed_densities(self, z):
        """The two target densities (bit-1 law A, bit-0 law B) at points z."""
        z = np.asarray(z, dtype=float)
        f_mu = _phi(z - self.mu)
        f_0 = _phi(z)
        a = ((1.0 - self.q) * f_mu - (1.0 - self.p) * f_0) / (self.p - self.q)
        b = (self.p * f_0 - self.q * f_mu) / (self.p - self.q)
        return a, b


def _accept_reject(count, shift, accept_prob, R, rng):
    """Sample `count` values from proposal N(shift, 1), accepting with
    accept_prob(z); after R rounds the proposal itself is used (the fallback
    contributes O((1 - 1/M)^R) total variation)."""
    res = np.empty(count)
    active = np.arange(count)
    rounds = 0
    while active.size and rounds < R:
        z = rng.standard_normal(active.size) + shift
        acc = rng.random(active.size) < accept_prob(z)
        res[active[acc]] = z[acc]
        active = active[~acc]
        rounds += 1
    if active.size:
        res[active] = rng.standard_normal(active.size) + shift
    return res


def rejection_kernel(bits, spec: RejectionKernelSpec, rng: np.random.Generator):
    """Map an array of 0/1 bits through the rejection kernel.

    Returns an array of the same shape. Scalar input returns a float.
    """
    arr = np.asarray(bits)
    scalar = arr.ndim == 0
    flat = arr.reshape(-1).astype(bool)
    out = np.empty(flat.size)
    p, q, mu = spec.p, spec.q, spec.mu
    ones = np.flatnonzero(flat)
    zeros = np.flatnonzero(~flat)
    if ones.size:
        if p == 1.0:
            # bit-1 target collapses to an exact Gaussian
            out[ones] = rng.standard_normal(ones.size) + mu
        else:
            ratio1 = (1.0 - p) / (1.0 - q)
            out[ones] = _accept_reject(
                ones.size, mu,
                lambda z: np.maximum(0.0, 1.0 - ratio1 * np.exp(mu * mu / 2.0 - mu * z)),
                spec.R, rng)
    if zeros.size:
        ratio0 = q / p
        out[zeros] = _accept_reject(
            zeros.size, 0.0,
            lambda z: np.maximum(0.0, 1.0 - ratio0 * np.exp(mu * z - mu * mu / 2.0)),
            spec.R, rng)
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


def clone_density(p: float, q: float, t: int = 2) -> float:
    """Ambient density of each of t conditionally independent clones.

    t=2 closed form: 1 - sqrt((1-p)(1-q)), with the p=1 case collapsing to
    sqrt(q). Iterating the pairwise form agrees with the general expression
    1 - ((1-p)^(t-1) (1-q))^(1/t).
    """
    if t < 1:
        raise ValueError("t must be positive")
    if not 0.0 < q <= p <= 1.0:
        raise ValueError("need 0 < q <= p <= 1")
    if p == 1.0:
        return q ** (1.0 / t)
    return 1.0 - ((1.0 - p) ** (t - 1) * (1.0 - q)) ** (1.0 / t)


@dataclass(frozen=True)
class CloneSpec:
    """Joint per-pair sampling tables for t-fold graph cloning.

    pattern_probs_one[s] / pattern_probs_zero[s] are the probabilities of any
    FIXED output pattern with s ones given input bit 1 / 0; class_probs_* are
    the C(t,s)-weighted versions actually sampled from.
    """

    p: float
    q: float
    t: int
    Q: float = field(init=False, default=0.0)
    class_probs_one: np.ndarray = field(init=False, default=None, repr=False, compare=False)
    class_probs_zero: np.ndarray = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.t < 2:
            raise ValueError("cloning needs t >= 2")
        if not 0.0 < self.q < self.p <= 1.0:
            raise ValueError("need 0 < q < p <= 1")
        p, q, t = self.p, self.q, self.t
        Q = clone_density(p, q, t)
        object.__setattr__(self, "Q", Q)
        s = np.arange(t + 1)
        pat_p = p ** s * (1.0 - p) ** (t - s)
        pat_Q = Q ** s * (1.0 - Q) ** (t - s)
        a = ((1.0 - q) * pat_p - (1.0 - p) * pat_Q) / (p - q)
        b = (p * pat_Q - q * pat_p) / (p - q)
        if a.min() < -1e-12 or b.min() < -1e-12:
            raise ValueError("clone pattern probabilities are not a law")
        binom = np.array([comb(t, int(i)) for i in s], dtype=float)
        ca = np.clip(a, 0.0, None) * binom
        cb = np.clip(b, 0.0, None) * binom
        object.__setattr__(self, "class_probs_one", ca / ca.sum())
        object.__setattr__(self, "class_probs_zero", cb / cb.sum())


def _sample_counts(class_probs, m, rng):
    cdf = np.cumsum(class_probs)
    return np.searchsorted(cdf, rng.random(m), side="right")


def graph_clone(graph: Graph, p: float, q: float, t: int, rng: np.random.Generator):
    """Produce t graphs, conditionally independent given the planted support,
    each with planted density p and ambient density clone_density(p, q, t)."""
    spec = CloneSpec(p=p, q=q, t=t)
    iu = triu_pairs(graph.n)
    x = graph.adj[iu]
    m = x.size
    counts = np.empty(m, dtype=np.int64)
    ones = np.flatnonzero(x)
    zeros = np.flatnonzero(~x)
    counts[ones] = _sample_counts(spec.class_probs_one, ones.size, rng)
    counts[zeros] = _sample_counts(spec.class_probs_zero, zeros.size, rng)
    # uniform placement of the chosen number of ones across the t clones
    ranks = np.argsort(rng.random((m, t)), axis=1)
    patterns = ranks < counts[:, None]
    return [graph_from_triu_bits(graph.n, patterns[:, j], planted=graph.planted)
            for j in range(t)]


def threshold_gaussian_matrix(M: np.ndarray, planted=None) -> Graph:
    """Graph with edge (i, j), i<j, present iff M[i, j] >= 0."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("need a square matrix")
    n = M.shape[0]
    iu = triu_pairs(n)
    return graph_from_triu_bits(n, M[iu] >= 0.0, planted=planted)


def densify_to_target(graph: Graph, P0: float, rng: np.random.Generator) -> Graph:
    """Retarget the edge marginal: Bern(s) entries become Bern(2 P0 s) when
    P0 <= 1/2, Bern(1 - 2(1-P0)(1-s)) when P0 > 1/2."""
    if not 0.0 < P0 < 1.0:
        raise ValueError("P0 must lie in (0, 1)")
    iu = triu_pairs(graph.n)
    bits = graph.adj[iu].copy()
    u = rng.random(bits.size)
    if P0 > 0.5:
        bits |= (~bits) & (u < 2.0 * P0 - 1.0)
    else:
        bits &= u < 2.0 * P0
    return graph_from_triu_bits(graph.n, bits, planted=graph.planted)
