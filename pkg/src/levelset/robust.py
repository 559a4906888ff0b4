"""Robust mean estimation and the robust inverse-propensity estimator.

The estimator draws tau iid arm indices from a design, queries the oracle
once per draw, and for every target direction v forms scalar samples

    z_j = <v, (A(w) + gamma I)^{-1} phi(x_j)> * y_j

whose mean is close to the true value <theta, v>.  A soft-truncating
M-estimator (influence psi(x) = sign(x) log(1 + |x| + x^2/2)) turns those
heavy-tailed samples into a sub-Gaussian estimate per direction.  One shared
batch of tau draws serves every target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, InvalidInputError
from .kernels import ArmSet, combo_matrix, make_info_operator

_BISECT_TOL = 1e-10
_CHUNK = 1 << 16

try:  # fused influence sums; the numpy path below is the reference fallback
    import numba

    @numba.njit(parallel=True, cache=True)
    def _psi_sums_jit(z, alpha, mids):  # pragma: no cover - numerics identical
        m, n = z.shape
        n_chunks = (n + _CHUNK - 1) // _CHUNK
        partial = np.zeros((m, n_chunks))
        for task in numba.prange(m * n_chunks):
            r = task // n_chunks
            c = task % n_chunks
            a = alpha[r]
            mid = mids[r]
            acc = 0.0
            stop = min((c + 1) * _CHUNK, n)
            for j in range(c * _CHUNK, stop):
                x = a * (z[r, j] - mid)
                ax = abs(x)
                v = math.log1p(ax + 0.5 * ax * ax)
                acc += v if x >= 0.0 else -v
            partial[r, c] = acc
        out = np.zeros(m)
        for r in range(m):
            total = 0.0
            for c in range(n_chunks):
                total += partial[r, c]
            out[r] = total
        return out

except ImportError:  # pragma: no cover - exercised only without numba
    _psi_sums_jit = None


@dataclass(frozen=True)
class RobustMeanParams:
    """Per-call confidence (delta divided across targets) and variance proxy."""

    delta_prime: float
    variance_bound: float

    def __post_init__(self):
        if not 0 < self.delta_prime < 1:
            raise InvalidInputError("delta_prime must be in (0, 1)")
        if not self.variance_bound > 0:
            raise InvalidInputError("variance_bound must be positive")


def _psi(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.log1p(np.abs(x) + 0.5 * x * x)


def catoni_mean(samples, params: RobustMeanParams) -> float:
    """Root of sum_i psi(alpha (z_i - mu)) = 0, found by bisection.

    The sum is strictly decreasing in mu, the root lies inside the sample
    range, and bisection runs on [min - 1, max + 1] to 1e-10.
    """
    z = np.asarray(samples, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise InvalidInputError("samples must be a nonempty vector")
    out = catoni_mean_batch(z[None, :], params.delta_prime, np.array([params.variance_bound]))
    return float(out[0])


def catoni_mean_batch(z: np.ndarray, delta_prime: float, variance_bounds: np.ndarray) -> np.ndarray:
    """Row-wise Catoni means for a (m, n) sample matrix with shared n."""
    z = np.asarray(z, dtype=float)
    m, n = z.shape
    vb = np.asarray(variance_bounds, dtype=float)
    if vb.shape != (m,):
        raise InvalidInputError("one variance bound per sample row required")
    if np.any(vb <= 0):
        raise InvalidInputError("variance_bound must be positive")
    if not 0 < delta_prime < 1:
        raise InvalidInputError("delta_prime must be in (0, 1)")
    log_term = 2.0 * math.log(2.0 / delta_prime)
    if n <= log_term:
        raise InsufficientSamplesError(
            f"need more than 2 ln(2/delta') = {log_term:.2f} samples, got {n}"
        )
    alpha = np.sqrt(log_term / (n * vb * (1.0 + log_term / (n - log_term))))

    z_min = z.min(axis=1)
    z_max = z.max(axis=1)
    lo = z_min - 1.0
    hi = z_max + 1.0
    # Bracket width is max-min+2, so ~45 iterations reach 1e-10.
    steps = int(np.ceil(np.log2((hi - lo).max() / _BISECT_TOL))) + 1
    z = np.ascontiguousarray(z)
    a = alpha[:, None]
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if _psi_sums_jit is not None:
            score = _psi_sums_jit(z, alpha, mid)
        else:
            score = _psi(a * (z - mid[:, None])).sum(axis=1)
        above = score > 0.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    root = 0.5 * (lo + hi)
    return np.clip(root, z_min, z_max)


@dataclass
class EstimateTable:
    """Per-target robust estimates plus the design and draw count that made them."""

    values: dict[int, float]
    design: np.ndarray
    tau: int


def rips(
    arms: ArmSet,
    targets,
    lam,
    gamma: float,
    tau: int,
    delta: float,
    oracle,
    rng: np.random.Generator,
    signal_bound: float | None = None,
    noise_std: float | None = None,
) -> EstimateTable:
    """Robust inverse-propensity estimates W_v for every target direction.

    Consumes exactly tau oracle observations regardless of the number of
    targets.  Per-target confidence is delta / len(targets), and the variance
    proxy handed to the robust mean is (B^2 + sigma^2) * |v|^2_{inv}.
    """
    from .design import design_weights

    targets = list(targets)
    m = len(targets)
    if m == 0:
        raise InvalidInputError("rips needs at least one target")
    if not 0 < delta < 1:
        raise InvalidInputError("delta must be in (0, 1)")
    tau = int(tau)
    if tau < 2.0 * math.log(m / delta):
        raise InsufficientSamplesError(
            f"tau = {tau} below 2 ln(|targets|/delta) = {2.0 * math.log(m / delta):.2f}"
        )
    b = float(signal_bound if signal_bound is not None else oracle.signal_bound)
    sig = float(noise_std if noise_std is not None else oracle.noise_std)

    w = design_weights(lam)
    if w.shape[0] != arms.n_arms:
        raise InvalidInputError("design length does not match arm set")
    op = make_info_operator(arms, w, gamma)
    coeffs = combo_matrix(targets, arms.n_arms)
    quads = np.maximum(op.diag_quadforms(coeffs), 0.0)
    variance_bounds = (b * b + sig * sig) * np.maximum(quads, 1e-300)

    probs = w / w.sum()
    idx = rng.choice(arms.n_arms, size=tau, p=probs)
    if hasattr(oracle, "observe_many"):
        ys = np.asarray(oracle.observe_many(idx), dtype=float)
    else:
        ys = np.array([oracle.observe(int(i)) for i in idx], dtype=float)

    delta_prime = delta / m
    values: dict[int, float] = {}
    block = max(1, int(2e7 / max(tau, 1)))
    cross = op.cross_with_arms(coeffs)  # (m, n)
    for start in range(0, m, block):
        stop = min(start + block, m)
        z = cross[start:stop, :][:, idx] * ys[None, :]
        roots = catoni_mean_batch(z, delta_prime, variance_bounds[start:stop])
        for offset, root in enumerate(roots):
            values[start + offset] = float(root)
    return EstimateTable(values=values, design=w, tau=tau)
