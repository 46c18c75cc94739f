"""Covariance estimation errors, sparse spectral bounds, and RE checks.

Estimation error is measured in the elementwise maximum norm over the
upper triangle (the matrices are symmetric).  The deviation threshold
for that error has the usual two-regime form: a sqrt((t + 2 log p)/n)
Gaussian term plus a polynomial-in-t correction whose weight carries the
sample's tail order alpha.

Sparse spectral error RIP_n(k), the maximum over k-sparse unit vectors
theta of |theta' D theta|, is computed two ways: exact support
enumeration (combinatorial, capped) and a deterministic 1/4-net of each
k-sparse sphere, which certifies RIP_n(k) <= 2 * net maximum.

Restricted eigenvalue verification follows the xi route: a computable
deviation level xi yields the lower bound

    theta' Sigma_hat theta >= (lambda_min - 27 xi) ||theta||_2^2
                              - (54 xi / k) ||theta||_1^2,

and when lambda_min(Sigma) >= 1782 xi the restricted eigenvalue
condition holds with gamma_n = lambda_min / 2.  A randomized cone
search is included to falsify (never certify) those verdicts.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .orlicz import BoundConstants
from .samplers import DataMatrix, RngStream

__all__ = [
    "GramPair",
    "RipMethod",
    "RipResult",
    "QuarterNet",
    "ReReport",
    "RsConvexityParams",
    "gram",
    "centered_cov",
    "max_elementwise_error",
    "delta_bound",
    "hard_threshold",
    "rip_exact",
    "quarter_net",
    "rip_net",
    "upsilon_estimate",
    "upsilon_iid",
    "xi_bound",
    "re_check",
    "rsc_lower",
    "cone_min_oracle",
    "save_matrix_csv",
    "load_matrix_csv",
]

# Exact RIP enumerates binomial(p, k) supports; past this cap only the
# net route is offered.
_SUPPORT_CAP = 200_000

# Batched eigenvalue chunk for rip_exact submatrices.
_EIG_CHUNK = 20_000

# Mesh schedule for the per-sphere 1/4-nets: points on the circle, then
# band half-widths for each recursion level.  Radii compose as
# E_k = sqrt(a_k^2 + (a_k + E_{k-1})^2); with E_2 = 2 sin(pi/50) = 0.1256
# the schedule gives E_3 = 0.2142 and E_4 = 0.2483, both under 1/4.
_CIRCLE_POINTS = 25
_BAND_HALF_WIDTH = {3: 0.075, 4: 0.032}
_NET_MAX_K = 4


def _require_symmetric(matrix: np.ndarray, name: str = "matrix") -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be square")
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
    if float(np.max(np.abs(matrix - matrix.T))) > 1e-12 * scale:
        raise ValueError(f"{name} must be symmetric")
    return matrix


@dataclass(frozen=True, eq=False)
class GramPair:
    """Estimated second-moment matrix paired with its population target."""

    sigma_hat: np.ndarray
    sigma: np.ndarray
    centered: bool = False

    def __post_init__(self) -> None:
        sigma_hat = _require_symmetric(self.sigma_hat, "sigma_hat")
        sigma = _require_symmetric(self.sigma, "sigma")
        if sigma_hat.shape != sigma.shape:
            raise ValueError("sigma_hat and sigma must have equal shapes")
        scale = max(1.0, float(np.max(np.abs(sigma_hat))))
        if float(np.min(np.linalg.eigvalsh(sigma_hat))) < -1e-10 * scale:
            raise ValueError("sigma_hat must be positive semidefinite")
        object.__setattr__(self, "sigma_hat", sigma_hat)
        object.__setattr__(self, "sigma", sigma)


class RipMethod(enum.Enum):
    EXACT = "exact"
    QUARTER_NET = "quarter_net"


@dataclass(frozen=True)
class RipResult:
    """Sparse spectral error value with its provenance.

    An EXACT value is the true RIP_n(k).  A QUARTER_NET value v computed
    on an exhaustive-support net certifies RIP_n(k) <= 2 v.
    """

    value: float
    k: int
    method: RipMethod
    supports_evaluated: int
    net_size: int = 0

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ValueError("value must be nonnegative")


@dataclass(frozen=True, eq=False)
class QuarterNet:
    """1/4-net of the k-sparse unit sphere, one mesh per covered support."""

    vectors: np.ndarray
    k: int
    exhaustive: bool
    supports_evaluated: int

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class ReReport:
    """Outcome of the restricted eigenvalue check at deviation level xi."""

    lambda_min: float
    xi: float
    satisfied: bool
    gamma_n: float
    k: int


@dataclass(frozen=True)
class RsConvexityParams:
    """Inputs of the restricted strong convexity deviation level.

    ``upsilon`` is the sparse projection variance proxy, ``k_np`` the
    max marginal two-regime norm, and ``c_alpha`` the configured
    constant multiplying the polynomial term.
    """

    upsilon: float
    k_np: float
    n: int
    p: int
    k: int
    alpha: float
    c_alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.upsilon < 0.0 or self.k_np < 0.0:
            raise ValueError("upsilon and k_np must be nonnegative")
        if self.n < 1 or self.p < 1 or self.k < 1:
            raise ValueError("n, p, k must be positive")
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must lie in (0, 2]")
        if not self.c_alpha > 0.0:
            raise ValueError("c_alpha must be positive")


# ---------------------------------------------------------------------------
# moment matrices and elementwise error


def gram(x: DataMatrix) -> np.ndarray:
    """Uncentered second moment (1/n) sum x_i x_i', exactly symmetrized."""
    values = x.values
    out = values.T @ values / x.n
    return (out + out.T) / 2.0


def centered_cov(x: DataMatrix) -> np.ndarray:
    """Covariance (1/n) sum (x_i - xbar)(x_i - xbar)' with divisor n."""
    if x.n < 2:
        raise ValueError("centered covariance needs at least 2 rows")
    centered = x.values - x.values.mean(axis=0)
    out = centered.T @ centered / x.n
    return (out + out.T) / 2.0


def max_elementwise_error(a: np.ndarray, b: np.ndarray) -> float:
    """max_{j <= k} |a_jk - b_jk| over the upper triangle with diagonal."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("inputs must be square")
    if a.shape != b.shape:
        raise ValueError("inputs must have equal shapes")
    rows, cols = np.triu_indices(a.shape[0])
    return float(np.max(np.abs(a[rows, cols] - b[rows, cols])))


def delta_bound(a_np, k_np, n, p, alpha, t, constants=None, centered=False):
    """Deviation threshold for the elementwise covariance error.

    Returns (threshold, probability_bound) where the error exceeds the
    threshold with probability at most the bound: 3 e^-t for the gram
    estimator, 6 e^-t for the centered one.  Tail orders above 2 are
    outside the supported range.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (0, 2] for the covariance bound")
    if a_np < 0.0 or k_np < 0.0:
        raise ValueError("a_np and k_np must be nonnegative")
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    constants = constants or BoundConstants()
    u = t + 2.0 * math.log(p)
    threshold = 7.0 * a_np * math.sqrt(u / n)
    if u > 0.0:
        threshold += (
            constants.c_alpha_thm34
            * k_np**2
            * math.log(2.0 * n) ** (2.0 / alpha)
            * u ** (2.0 / alpha)
            / n
        )
    prob = (6.0 if centered else 3.0) * math.exp(-t)
    return threshold, min(1.0, prob)


def hard_threshold(matrix: np.ndarray, lam: float) -> np.ndarray:
    """Zero all entries with |value| < lam (universal hard thresholding)."""
    matrix = _require_symmetric(matrix)
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    return np.where(np.abs(matrix) < lam, 0.0, matrix)


# ---------------------------------------------------------------------------
# sparse spectral error


def rip_exact(d: np.ndarray, k: int) -> RipResult:
    """Exact k-sparse spectral error by support enumeration.

    The sup over ||theta||_0 <= k is attained on a support of size
    exactly k (spectral norms of nested principal submatrices are
    monotone), so only size-k supports are enumerated.
    """
    d = _require_symmetric(d)
    p = d.shape[0]
    if not 1 <= k <= p:
        raise ValueError("k must lie in [1, p]")
    total = math.comb(p, k)
    if total > _SUPPORT_CAP:
        raise ValueError(
            f"binomial(p, k) = {total} exceeds the enumeration cap "
            f"{_SUPPORT_CAP}; use quarter_net + rip_net instead"
        )
    best = 0.0
    supports = itertools.combinations(range(p), k)
    while True:
        chunk = list(itertools.islice(supports, _EIG_CHUNK))
        if not chunk:
            break
        idx = np.asarray(chunk)
        blocks = d[idx[:, :, None], idx[:, None, :]]
        eigs = np.linalg.eigvalsh(blocks)
        best = max(best, float(np.max(np.abs(eigs))))
    return RipResult(best, k, RipMethod.EXACT, supports_evaluated=total)


def _sphere_net(k: int) -> np.ndarray:
    """Deterministic 1/4-net of the unit sphere in R^k (k <= 4).

    k = 1 is {+1, -1}; k = 2 a uniform circle mesh; higher k are built
    recursively as (sin(phi) u, cos(phi)) over latitude bands, with the
    schedule at the top of the module keeping the covering radius under
    1/4 at every level.
    """
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if k == 2:
        angles = 2.0 * math.pi * np.arange(_CIRCLE_POINTS) / _CIRCLE_POINTS
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if k > _NET_MAX_K:
        raise ValueError(
            f"mesh construction supports k <= {_NET_MAX_K}; "
            "cardinality explodes combinatorially beyond that"
        )
    inner = _sphere_net(k - 1)
    half_width = _BAND_HALF_WIDTH[k]
    count = math.ceil(math.pi / (2.0 * half_width))
    centers = half_width * (2.0 * np.arange(count) + 1.0)
    sin_c = np.sin(centers)[:, None, None]
    cos_c = np.cos(centers)[:, None, None]
    tiled = np.broadcast_to(inner, (count,) + inner.shape)
    upper = sin_c * tiled
    lower = np.broadcast_to(cos_c, (count, inner.shape[0], 1))
    return np.concatenate([upper, lower], axis=2).reshape(-1, k)


def quarter_net(k: int, p: int, cap: int, rng: RngStream) -> QuarterNet:
    """1/4-net of the k-sparse unit sphere in R^p.

    Covers every size-k support when binomial(p, k) <= cap, otherwise a
    random sample of cap supports (then not exhaustive).  Per support the
    net is the deterministic sphere mesh, so cardinality and memory are
    (supports) x (mesh size) x p; keep cap sane for large p.
    """
    if not 1 <= k <= p:
        raise ValueError("k must lie in [1, p]")
    if cap < 1:
        raise ValueError("cap must be positive")
    total = math.comb(p, k)
    if total <= cap:
        supports = np.asarray(list(itertools.combinations(range(p), k)))
        exhaustive = True
    else:
        gen = rng.generator()
        draws = np.stack([gen.choice(p, size=k, replace=False) for _ in range(cap)])
        supports = np.unique(np.sort(draws, axis=1), axis=0)
        exhaustive = False
    mesh = _sphere_net(k)
    n_support, n_mesh = supports.shape[0], mesh.shape[0]
    vectors = np.zeros((n_support * n_mesh, p))
    rows = np.repeat(np.arange(n_support * n_mesh)[:, None], k, axis=1)
    cols = np.repeat(supports, n_mesh, axis=0)
    vectors[rows, cols] = np.tile(mesh, (n_support, 1))
    return QuarterNet(vectors, k, exhaustive, supports_evaluated=n_support)


def rip_net(d: np.ndarray, k: int, net: QuarterNet) -> RipResult:
    """Net maximum of |theta' D theta|; with exhaustive support coverage
    the true RIP_n(k) is at most twice the returned value."""
    d = _require_symmetric(d)
    vectors = net.vectors
    if vectors.shape[1] != d.shape[0]:
        raise ValueError("net dimension does not match the matrix")
    norms = np.linalg.norm(vectors, axis=1)
    if float(np.max(np.abs(norms - 1.0))) > 1e-9:
        raise ValueError("net vectors must be unit")
    if int(np.max(np.count_nonzero(vectors, axis=1))) > net.k:
        raise ValueError("net vectors must be k-sparse")
    value = float(np.max(np.abs(np.einsum("ij,jk,ik->i", vectors, d, vectors))))
    return RipResult(
        value, k, RipMethod.QUARTER_NET,
        supports_evaluated=net.supports_evaluated, net_size=len(net),
    )


def upsilon_estimate(x: DataMatrix, k: int, net: QuarterNet) -> float:
    """Net lower approximation of the sparse projection variance proxy:
    max over net theta of the empirical variance of (x_i' theta)^2."""
    if len(net) == 0:
        raise ValueError("net must be nonempty")
    if net.k != k:
        raise ValueError("net was built for a different k")
    projections = x.values @ net.vectors.T
    return float(np.max(np.var(projections**2, axis=0)))


def upsilon_iid(m2: float, m4: float, k: int) -> float:
    """Exact max of Var((theta' X)^2) over k-sparse unit theta when the
    coordinates are iid mean-zero with the given second/fourth moments.

    Var = (m4 - 3 m2^2) sum theta_j^4 + 2 m2^2; the quartic sum ranges
    over [1/k, 1] on the k-sparse unit sphere, so the max sits at a
    coordinate vector when m4 >= 3 m2^2 and at the balanced vector
    otherwise.
    """
    if k < 1:
        raise ValueError("k must be positive")
    excess = m4 - 3.0 * m2**2
    quartic = 1.0 if excess >= 0.0 else 1.0 / k
    return excess * quartic + 2.0 * m2**2


# ---------------------------------------------------------------------------
# restricted eigenvalue verification


def xi_bound(params: RsConvexityParams, joint: bool = False) -> float:
    """Deviation level xi of the restricted strong convexity bound.

    The marginal form carries an extra factor k on the polynomial term;
    the joint form (``joint=True``) drops it.
    """
    n, p, k = params.n, params.p, params.k
    ratio = 36.0 * n * p / k
    if ratio <= 1.0:
        raise ValueError("36 n p / k must exceed 1")
    if k > p:
        raise ValueError("k must not exceed p")
    log_ratio = math.log(ratio)
    first = 14.0 * math.sqrt(2.0) * math.sqrt(params.upsilon * k * log_ratio / n)
    weight = 1.0 if joint else float(k)
    second = (
        params.c_alpha
        * params.k_np**2
        * weight
        * math.log(2.0 * n) ** (2.0 / params.alpha)
        * (k * log_ratio) ** (2.0 / params.alpha)
        / n
    )
    return first + second


def re_check(sigma: np.ndarray, xi: float, k: int) -> ReReport:
    """Restricted eigenvalue verdict: satisfied iff lambda_min >= 1782 xi,
    in which case the restricted eigenvalue is at least lambda_min / 2."""
    sigma = _require_symmetric(sigma, "sigma")
    if xi < 0.0:
        raise ValueError("xi must be nonnegative")
    if k < 1:
        raise ValueError("k must be positive")
    lambda_min = float(np.min(np.linalg.eigvalsh(sigma)))
    satisfied = lambda_min >= 1782.0 * xi
    gamma_n = lambda_min / 2.0 if satisfied else 0.0
    return ReReport(lambda_min, float(xi), satisfied, gamma_n, int(k))


def rsc_lower(theta: np.ndarray, lambda_min: float, xi: float, k: int) -> float:
    """Certified lower bound on theta' Sigma_hat theta at deviation xi."""
    if k < 1:
        raise ValueError("k must be positive")
    if xi < 0.0:
        raise ValueError("xi must be nonnegative")
    theta = np.asarray(theta, dtype=float)
    l2sq = float(theta @ theta)
    l1 = float(np.sum(np.abs(theta)))
    return (lambda_min - 27.0 * xi) * l2sq - (54.0 * xi / k) * l1**2


def cone_min_oracle(sigma_hat, s, delta, trials, rng: RngStream) -> float:
    """Randomized upper bound on the cone-restricted Rayleigh minimum.

    Draws directions in the cone ||theta(S^c)||_1 <= delta ||theta(S)||_1
    (sphere on the support, signed Dirichlet mass off it, scaled by a
    uniform) and returns the smallest theta' Sigma theta / theta' theta.
    Used to falsify restricted eigenvalue verdicts, never to certify.
    """
    sigma_hat = _require_symmetric(sigma_hat, "sigma_hat")
    p = sigma_hat.shape[0]
    support = np.asarray(sorted(set(int(i) for i in s)))
    if support.size == 0:
        raise ValueError("S must be nonempty")
    if support[0] < 0 or support[-1] >= p:
        raise ValueError("S indices out of range")
    if delta < 1.0:
        raise ValueError("delta must be at least 1")
    if trials < 1:
        raise ValueError("trials must be positive")
    off = np.setdiff1d(np.arange(p), support)
    gen = rng.generator()
    best = math.inf
    for _ in range(int(trials)):
        theta = np.zeros(p)
        head = gen.standard_normal(support.size)
        head /= np.linalg.norm(head)
        theta[support] = head
        if off.size:
            mass = delta * float(np.sum(np.abs(head))) * gen.random()
            weights = gen.dirichlet(np.ones(off.size))
            signs = gen.integers(0, 2, size=off.size) * 2.0 - 1.0
            theta[off] = mass * weights * signs
        ratio = float(theta @ sigma_hat @ theta) / float(theta @ theta)
        best = min(best, ratio)
    return best


# ---------------------------------------------------------------------------
# CSV interchange


def save_matrix_csv(matrix: np.ndarray, path) -> None:
    """Row-major CSV at full float64 precision."""
    np.savetxt(Path(path), np.atleast_2d(np.asarray(matrix, dtype=float)),
               fmt="%.17g", delimiter=",")


def load_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(Path(path), delimiter=",", dtype=float))
