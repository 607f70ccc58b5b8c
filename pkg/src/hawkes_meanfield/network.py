"""Random interaction networks: signed directed Erdos-Renyi graphs.

The graph is encoded by an adjacency matrix with rows indexed by the source
vertex and columns by the target: ``adjacency[j, i]`` is 1 when spikes of
vertex j feed the intensity of vertex i.  Every ordered pair is sampled
independently with probability q, self-loops included.  Each vertex also
carries a spin ``signs[j]`` in {+1, -1} (P(+1) = p) that makes it excitatory
or inhibitory towards all of its targets at once.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, ParameterError
from .rng import NETWORK, stream

__all__ = [
    "NetworkConfiguration",
    "WeightStatistics",
    "sample_network",
    "build_complementary_network",
    "compute_weight_statistics",
    "network_to_dict",
    "network_from_dict",
]


def _check_probability(name, value):
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


@dataclass(frozen=True)
class NetworkConfiguration:
    """A sampled network, immutable once constructed.

    Attributes
    ----------
    n : int
        Number of vertices.
    p : float
        Probability of an excitatory spin (+1).
    q : float
        Directed edge probability.
    adjacency : ndarray of uint8, shape (n, n)
        adjacency[j, i] == 1 iff j -> i is present.
    signs : ndarray of int8, shape (n,)
        Vertex spins, each +1 or -1.
    seed : int or None
        Seed the matrices were drawn from, None for explicit matrices.
    kind : str
        "erdos_renyi", "complementary", or "explicit".
    """

    n: int
    p: float
    q: float
    adjacency: np.ndarray
    signs: np.ndarray
    seed: int | None = None
    kind: str = "erdos_renyi"

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"need at least one vertex, got n={self.n}")
        _check_probability("p", self.p)
        _check_probability("q", self.q)
        adj = np.asarray(self.adjacency, dtype=np.uint8)
        if adj.shape != (self.n, self.n):
            raise ContractError(
                f"adjacency must have shape ({self.n}, {self.n}), got {adj.shape}"
            )
        if adj.max(initial=0) > 1:
            raise ContractError("adjacency entries must be 0 or 1")
        signs = np.asarray(self.signs, dtype=np.int8)
        if signs.shape != (self.n,):
            raise ContractError(f"signs must have shape ({self.n},), got {signs.shape}")
        if not np.all(np.abs(signs) == 1):
            raise ContractError("signs must all be +1 or -1")
        adj.flags.writeable = False
        signs.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "signs", signs)

    @property
    def sign_sum(self) -> int:
        return int(self.signs.sum(dtype=np.int64))

    def signed_rows(self, theta: float) -> np.ndarray:
        """Dense float matrix theta * U_j * V_{ji}, rows ready for the event loop."""
        return (theta * self.signs.astype(np.float64))[:, None] * self.adjacency


@dataclass(frozen=True)
class WeightStatistics:
    """Empirical weight functionals of one sampled network.

    w_n is the centered sign sum N^{-1/2} sum_j (U_j - (2p-1)); w_n_i its
    per-target analogue with edge weights, w_tilde the part with centered
    edges only.  The exact decomposition w_n_i = q * w_n + w_tilde holds
    entrywise up to float regrouping.
    """

    n: int
    w_n: float
    w_n_i: np.ndarray
    w_tilde: np.ndarray
    mean_square_w: float
    in_degree_mean: np.ndarray
    sign_mean: float


def sample_network(n: int, p: float, q: float, seed: int) -> NetworkConfiguration:
    """Draw a signed Erdos-Renyi network.

    All n^2 ordered pairs (self-loops included) get independent Bernoulli(q)
    edges; spins are independent with P(+1) = p.  Identical seeds reproduce
    identical matrices regardless of what any simulation did before or after.
    """
    if n < 1:
        raise ParameterError(f"need at least one vertex, got n={n}")
    _check_probability("p", p)
    _check_probability("q", q)
    g = stream(seed, NETWORK)
    adjacency = (g.random((n, n)) < q).astype(np.uint8)
    signs = np.where(g.random(n) < p, 1, -1).astype(np.int8)
    return NetworkConfiguration(
        n=n, p=float(p), q=float(q), adjacency=adjacency, signs=signs,
        seed=int(seed), kind="erdos_renyi",
    )


def build_complementary_network(n: int, seed: int) -> NetworkConfiguration:
    """Build the deterministic-degree network with complementary targets 0 and 1.

    Vertex 0 receives from a uniformly random half of the vertices and vertex 1
    from the other half, so the two in-neighbourhoods are disjoint and both
    have size exactly n/2.  The two halves carry identical sign multisets,
    which forces the per-target weights of vertices 0 and 1 to coincide while
    their martingale inputs stay disjoint.  Remaining columns are iid
    Bernoulli(1/2) as in the plain graph.  p = q = 1/2 by construction.

    The total spin sum is 0 when n/2 is even; when n/2 is odd the equal-sum
    constraint forces |sum_j U_j| = 2, which is recorded via ``sign_sum``.
    """
    if n < 2 or n % 2 != 0:
        raise ParameterError(f"complementary construction needs even n >= 2, got {n}")
    m = n // 2
    g = stream(seed, NETWORK)
    perm = g.permutation(n)
    half0, half1 = perm[:m], perm[m:]

    ones = (m + 1) // 2        # majority count; == m//2 when m is even
    pattern = np.concatenate([np.ones(ones, dtype=np.int8),
                              -np.ones(m - ones, dtype=np.int8)])
    signs = np.empty(n, dtype=np.int8)
    signs[half0] = g.permutation(pattern)
    signs[half1] = g.permutation(pattern)

    adjacency = np.empty((n, n), dtype=np.uint8)
    adjacency[:, 0] = 0
    adjacency[:, 1] = 0
    adjacency[half0, 0] = 1
    adjacency[half1, 1] = 1
    if n > 2:
        adjacency[:, 2:] = (g.random((n, n - 2)) < 0.5).astype(np.uint8)
    return NetworkConfiguration(
        n=n, p=0.5, q=0.5, adjacency=adjacency, signs=signs,
        seed=int(seed), kind="complementary",
    )


def compute_weight_statistics(net: NetworkConfiguration) -> WeightStatistics:
    """Evaluate the weight functionals of one network exactly.

    Returns centered sums scaled by N^{-1/2}; every entry satisfies the
    algebraic identity w_n_i = q * w_n + w_tilde because
    U_j V_{ji} - (2p-1) q = U_j (V_{ji} - q) + q (U_j - (2p-1)) termwise.
    """
    n = net.n
    u = net.signs.astype(np.float64)
    v = net.adjacency.astype(np.float64)
    root_n = np.sqrt(n)
    uv_col = u @ v                        # sum_j U_j V_{ji} per target i
    u_sum = u.sum()
    w_n = (u_sum - n * (2 * net.p - 1)) / root_n
    w_n_i = (uv_col - n * (2 * net.p - 1) * net.q) / root_n
    w_tilde = (uv_col - net.q * u_sum) / root_n
    return WeightStatistics(
        n=n,
        w_n=float(w_n),
        w_n_i=w_n_i,
        w_tilde=w_tilde,
        mean_square_w=float(np.mean(w_n_i**2)),
        in_degree_mean=v.mean(axis=0),
        sign_mean=float(u.mean()),
    )


def network_to_dict(net: NetworkConfiguration, include_matrices: bool = False) -> dict:
    """Serialize a network to a JSON-compatible dict.

    Without matrices the dict carries (kind, n, p, q, seed) and the network is
    reconstructible by resampling; with matrices it is self-contained.
    """
    out = {"kind": net.kind, "n": net.n, "p": net.p, "q": net.q, "seed": net.seed}
    if include_matrices or net.seed is None:
        out["adjacency"] = net.adjacency.tolist()
        out["signs"] = net.signs.tolist()
    return out


def network_from_dict(data: dict) -> NetworkConfiguration:
    """Rebuild a network from its serialized form (inverse of network_to_dict)."""
    kind = data.get("kind", "erdos_renyi")
    if "adjacency" in data:
        return NetworkConfiguration(
            n=int(data["n"]), p=float(data["p"]), q=float(data["q"]),
            adjacency=np.asarray(data["adjacency"], dtype=np.uint8),
            signs=np.asarray(data["signs"], dtype=np.int8),
            seed=data.get("seed"), kind="explicit" if data.get("seed") is None else kind,
        )
    if data.get("seed") is None:
        raise ContractError("serialized network needs either matrices or a seed")
    if kind == "complementary":
        return build_complementary_network(int(data["n"]), int(data["seed"]))
    net = sample_network(int(data["n"]), float(data["p"]), float(data["q"]),
                         int(data["seed"]))
    return net
