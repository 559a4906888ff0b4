"""Kernels, finite arm sets, and regularized inverse quadratic forms.

The central computation everywhere in this library is the bilinear form

    <u, (sum_i w_i phi(x_i) phi(x_i)^T + gamma I)^{-1} v>

for feature-map combinations u, v of the arms.  For gamma > 0 it is computed
without materializing feature maps, entirely from the Gram matrix restricted
to the support of w:

    (1/gamma) * ( k(u, v) - k_w(u)^T (K_w + gamma I_s)^{-1} k_w(v) )

with [k_w(x)]_i = sqrt(w_i) k(x_i, x) and [K_w]_ij = sqrt(w_i w_j) k(x_i, x_j).
For the linear kernel the same form is also available as an explicit d x d
solve, which additionally supports gamma = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError, RankDeficiencyError

LINEAR = "linear"
SQUARED_EXPONENTIAL = "squared_exponential"


@dataclass(frozen=True)
class KernelSpec:
    """A positive-definite kernel: linear or squared exponential."""

    kind: str
    lengthscale: float | None = None

    def __post_init__(self):
        if self.kind not in (LINEAR, SQUARED_EXPONENTIAL):
            raise InvalidInputError(f"unknown kernel kind {self.kind!r}")
        if self.kind == SQUARED_EXPONENTIAL:
            if self.lengthscale is None or not self.lengthscale > 0:
                raise InvalidInputError("squared exponential kernel needs lengthscale > 0")
        elif self.lengthscale is not None:
            raise InvalidInputError("linear kernel takes no lengthscale")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(LINEAR)

    @classmethod
    def squared_exponential(cls, lengthscale: float) -> "KernelSpec":
        return cls(SQUARED_EXPONENTIAL, float(lengthscale))

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.lengthscale is not None:
            out["lengthscale"] = self.lengthscale
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        return cls(data["kind"], data.get("lengthscale"))


def _as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1)
    return pts


def kernel_eval(kernel: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for single points (scalars are treated as 1-d)."""
    xv = _as_points(x)[0]
    yv = _as_points(y)[0]
    if xv.shape != yv.shape:
        raise InvalidInputError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    if kernel.kind == LINEAR:
        return float(xv @ yv)
    sq = float(np.sum((xv - yv) ** 2))
    return float(np.exp(-sq / (2.0 * kernel.lengthscale**2)))


def cross_gram(kernel: KernelSpec, xs, ys) -> np.ndarray:
    """Kernel matrix k(xs_i, ys_j) between two point sets."""
    a = _as_points(xs)
    b = _as_points(ys)
    if a.shape[1] != b.shape[1]:
        raise InvalidInputError("dimension mismatch between point sets")
    if kernel.kind == LINEAR:
        return a @ b.T
    sq = (
        np.sum(a**2, axis=1)[:, None]
        + np.sum(b**2, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * kernel.lengthscale**2))


def gram_matrix(kernel: KernelSpec, points) -> np.ndarray:
    g = cross_gram(kernel, points, points)
    return 0.5 * (g + g.T)


class ArmSet:
    """An indexed finite design space with its kernel and cached Gram matrix.

    Immutable after construction; arms are addressed by index 0..n-1.
    """

    def __init__(self, points, kernel: KernelSpec):
        pts = _as_points(points).copy()
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidInputError("arm set needs at least one point of dimension >= 1")
        self.points = pts
        self.kernel = kernel
        self.gram = gram_matrix(kernel, pts)
        self.points.setflags(write=False)
        self.gram.setflags(write=False)

    @property
    def n_arms(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n_arms


class FeatureCombo:
    """A sparse combination sum_i c_i phi(x_i) of arm feature maps.

    Used both for plain arms (a singleton coefficient of 1) and for the
    scaled differences phi(x) - (1 - eps) phi(x') that drive the implicit
    level set machinery.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: dict[int, float]):
        coeffs = {int(i): float(c) for i, c in coefficients.items() if c != 0.0}
        if not coeffs:
            raise InvalidInputError("combo needs at least one nonzero coefficient")
        if any(i < 0 for i in coeffs):
            raise InvalidInputError("negative arm index in combo")
        self.coefficients = coeffs

    @classmethod
    def arm(cls, index: int) -> "FeatureCombo":
        return cls({index: 1.0})

    @classmethod
    def difference(cls, first: int, second: int, scale: float) -> "FeatureCombo":
        """phi(first) - scale * phi(second), with coefficients merged if equal."""
        if first == second:
            return cls({first: 1.0 - scale})
        return cls({first: 1.0, second: -scale})

    def dense(self, n_arms: int) -> np.ndarray:
        if max(self.coefficients) >= n_arms:
            raise InvalidInputError("combo refers to an arm index outside the arm set")
        vec = np.zeros(n_arms)
        for i, c in self.coefficients.items():
            vec[i] = c
        return vec

    def __eq__(self, other):
        return isinstance(other, FeatureCombo) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(tuple(sorted(self.coefficients.items())))

    def __repr__(self):
        inner = ", ".join(f"{i}: {c:g}" for i, c in sorted(self.coefficients.items()))
        return f"FeatureCombo({{{inner}}})"


def combo_matrix(combos, n_arms: int) -> np.ndarray:
    """Stack combos as columns of an (n_arms, m) coefficient matrix."""
    mat = np.zeros((n_arms, len(combos)))
    for j, combo in enumerate(combos):
        for i, c in combo.coefficients.items():
            if i >= n_arms:
                raise InvalidInputError("combo refers to an arm index outside the arm set")
            mat[i, j] = c
    return mat


def cholesky_with_jitter(mat: np.ndarray, first=1e-10, factor=10.0, last=1e-6):
    """Cholesky factor of a PSD matrix, escalating diagonal jitter on failure."""
    jitters = [0.0]
    j = first
    while j <= last * (1 + 1e-12):
        jitters.append(j)
        j *= factor
    eye = np.eye(mat.shape[0])
    for jit in jitters:
        try:
            return np.linalg.cholesky(mat + jit * eye)
        except np.linalg.LinAlgError:
            continue
    diag = np.diag(mat)
    raise NumericalError(
        "Cholesky failed after jitter escalation "
        f"(size={mat.shape[0]}, diag range [{diag.min():.3e}, {diag.max():.3e}])"
    )


def _cho_solve(chol_l: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_triangular

    half = solve_triangular(chol_l, rhs, lower=True)
    return solve_triangular(chol_l.T, half, lower=False)


class KernelInfoOperator:
    """Inverse bilinear forms of A(w) + gamma I computed in the support span.

    Requires gamma > 0.  Weights of exactly zero are dropped from the
    support, consistent with the s-sparse formulation.
    """

    def __init__(self, arms: ArmSet, weights, gamma: float):
        if not gamma > 0:
            raise InvalidInputError("kernel-trick path requires gamma > 0")
        w = np.asarray(weights, dtype=float)
        if w.shape != (arms.n_arms,):
            raise InvalidInputError("design length does not match arm set")
        support = np.flatnonzero(w > 0)
        if support.size == 0:
            raise InvalidInputError("design must put mass on at least one arm")
        self.arms = arms
        self.gamma = float(gamma)
        self._support = support
        self._sqrt_w = np.sqrt(w[support])
        self._k_sup = arms.gram[support, :]  # (s, n)
        k_w = self._sqrt_w[:, None] * self._k_sup[:, support] * self._sqrt_w[None, :]
        self._chol = cholesky_with_jitter(k_w + self.gamma * np.eye(support.size))

    def _kvec(self, coeffs: np.ndarray) -> np.ndarray:
        # k_w(v) for each combo column: (s, m)
        return self._sqrt_w[:, None] * (self._k_sup @ coeffs)

    def quadform_matrix(self, coeffs_u: np.ndarray, coeffs_v: np.ndarray | None = None) -> np.ndarray:
        """Matrix of <u_a, (A + gamma I)^{-1} v_b> over combo columns."""
        if coeffs_v is None:
            coeffs_v = coeffs_u
        gram_part = coeffs_u.T @ (self.arms.gram @ coeffs_v)
        t_u = self._kvec(coeffs_u)
        t_v = t_u if coeffs_v is coeffs_u else self._kvec(coeffs_v)
        correction = t_u.T @ _cho_solve(self._chol, t_v)
        return (gram_part - correction) / self.gamma

    def diag_quadforms(self, coeffs: np.ndarray) -> np.ndarray:
        gram_part = np.einsum("ij,ij->j", coeffs, self.arms.gram @ coeffs)
        t = self._kvec(coeffs)
        correction = np.einsum("ij,ij->j", t, _cho_solve(self._chol, t))
        return (gram_part - correction) / self.gamma

    def cross_with_arms(self, coeffs: np.ndarray) -> np.ndarray:
        """(m, n) matrix of <v_j, (A + gamma I)^{-1} phi(x_i)> for every arm i."""
        gram_part = coeffs.T @ self.arms.gram  # (m, n)
        t = self._kvec(coeffs)  # (s, m)
        sol = _cho_solve(self._chol, t)  # (s, m)
        correction = sol.T @ (self._sqrt_w[:, None] * self._k_sup)  # (m, n)
        return (gram_part - correction) / self.gamma


class DenseInfoOperator:
    """Explicit d x d information matrix path for the linear kernel.

    Supports gamma = 0; a rank-deficient matrix is handled through its
    eigendecomposition, and queries outside the range raise
    RankDeficiencyError.
    """

    def __init__(self, arms: ArmSet, weights, gamma: float):
        if arms.kernel.kind != LINEAR:
            raise InvalidInputError("dense path is only defined for the linear kernel")
        if gamma < 0:
            raise InvalidInputError("gamma must be nonnegative")
        w = np.asarray(weights, dtype=float)
        if w.shape != (arms.n_arms,):
            raise InvalidInputError("design length does not match arm set")
        self.arms = arms
        self.gamma = float(gamma)
        pts = arms.points
        a_mat = pts.T @ (w[:, None] * pts) + self.gamma * np.eye(arms.dim)
        vals, vecs = np.linalg.eigh(a_mat)
        scale = max(vals.max(), 0.0)
        tol = scale * 1e-12 + 1e-300
        self._vals = vals
        self._vecs = vecs
        self._keep = vals > tol
        self._singular = not bool(self._keep.all())

    def _combo_vectors(self, coeffs: np.ndarray) -> np.ndarray:
        # (d, m) actual vectors sum_i c_i x_i
        return self.arms.points.T @ coeffs

    def apply_inv(self, vecs_dm: np.ndarray) -> np.ndarray:
        proj = self._vecs.T @ vecs_dm  # (d, m) coordinates in the eigenbasis
        if self._singular:
            resid = proj[~self._keep, :]
            norms = np.linalg.norm(vecs_dm, axis=0)
            bad = np.linalg.norm(resid, axis=0) > 1e-8 * (norms + 1e-30)
            if bad.any():
                raise RankDeficiencyError(
                    "target outside the range of a singular information matrix"
                )
        out = np.zeros_like(proj)
        keep = self._keep
        out[keep, :] = proj[keep, :] / self._vals[keep, None]
        return self._vecs @ out

    def quadform_matrix(self, coeffs_u: np.ndarray, coeffs_v: np.ndarray | None = None) -> np.ndarray:
        if coeffs_v is None:
            coeffs_v = coeffs_u
        u = self._combo_vectors(coeffs_u)
        v = u if coeffs_v is coeffs_u else self._combo_vectors(coeffs_v)
        return u.T @ self.apply_inv(v)

    def diag_quadforms(self, coeffs: np.ndarray) -> np.ndarray:
        v = self._combo_vectors(coeffs)
        return np.einsum("ij,ij->j", v, self.apply_inv(v))

    def cross_with_arms(self, coeffs: np.ndarray) -> np.ndarray:
        v = self._combo_vectors(coeffs)
        return (self.apply_inv(v)).T @ self.arms.points.T


def make_info_operator(arms: ArmSet, weights, gamma: float):
    """Pick the numerically preferable operator for internal computations.

    The linear kernel always goes through the explicit d x d path (exact at
    any gamma >= 0, no 1/gamma cancellation); other kernels require gamma > 0
    and use the Gram-space path.
    """
    if arms.kernel.kind == LINEAR:
        return DenseInfoOperator(arms, weights, gamma)
    return KernelInfoOperator(arms, weights, gamma)


def reg_inv_quadform(
    arms: ArmSet, u: FeatureCombo, v: FeatureCombo, weights, gamma: float
) -> float:
    """<u, (A(w) + gamma I)^{-1} v> via the Gram-space (kernel trick) formula.

    gamma must be strictly positive; the gamma = 0 linear case goes through
    dense_inv_quadform instead.
    """
    if not gamma > 0:
        raise InvalidInputError("reg_inv_quadform requires gamma > 0")
    op = KernelInfoOperator(arms, weights, gamma)
    n = arms.n_arms
    cu = u.dense(n)[:, None]
    cv = v.dense(n)[:, None]
    return float(op.quadform_matrix(cu, cv)[0, 0])


def dense_inv_quadform(
    arms: ArmSet, u: FeatureCombo, v: FeatureCombo, weights, gamma: float
) -> float:
    """<u, (A(w) + gamma I)^{-1} v> through the explicit linear-kernel matrix."""
    op = DenseInfoOperator(arms, weights, gamma)
    n = arms.n_arms
    cu = u.dense(n)[:, None]
    cv = v.dense(n)[:, None]
    return float(op.quadform_matrix(cu, cv)[0, 0])
