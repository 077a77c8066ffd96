"""Small dense 3x3 primitives with deterministic, closed-form kernels.

Everything here is plain numpy on 3x3 arrays and 3-vectors. The routines are
written for exactness contracts (cofactor identity, polar round-trip) rather
than generality; none of them allocate beyond a few temporaries.
"""

import dataclasses

import numpy as np

EYE3 = np.eye(3)


@dataclasses.dataclass(frozen=True)
class Tolerances:
    """Shared numeric thresholds.

    rank_tol is a relative singular-value ratio, mid_eig_tol bounds the
    deviation of the middle stretch eigenvalue from one on the exact path,
    mid_eig_band is the wider bound accepted on the approximate path,
    residual_tol bounds matrix-norm residuals and rigidity_tol is the
    determinant / triple-product threshold for rigidity certificates.
    """

    rank_tol: float = 1e-9
    mid_eig_tol: float = 1e-7
    mid_eig_band: float = 1e-3
    residual_tol: float = 1e-10
    rigidity_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rank_tol", "mid_eig_tol", "mid_eig_band",
                     "residual_tol", "rigidity_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError("tolerance %s must be strictly positive" % name)


DEFAULT_TOLERANCES = Tolerances()


def cofactor(M):
    """Cofactor matrix of a 3x3 array, so that M @ cofactor(M).T = det(M) I.

    Row i of the cofactor is the cross product of the other two rows taken in
    cyclic order, which keeps the identity exact to round-off. Vanishes
    exactly when rank(M) <= 1.
    """
    M = np.asarray(M, dtype=float)
    return np.cross(np.roll(M, -1, axis=-2), np.roll(M, -2, axis=-2))


def _char_poly_newton(S, lam):
    # One Newton step on det(S - lam I); the derivative is -trace(cofactor).
    A = S - lam * EYE3
    slope = np.trace(cofactor(A))
    if abs(slope) < 1e-300:
        return lam
    return lam + np.linalg.det(A) / slope


def _kernel_direction(A):
    """Best unit kernel vector of a (near) rank-2 matrix, or None."""
    cands = (np.cross(A[0], A[1]), np.cross(A[0], A[2]), np.cross(A[1], A[2]))
    norms = [np.linalg.norm(c) for c in cands]
    k = int(np.argmax(norms))
    if norms[k] == 0.0:
        return None
    return cands[k] / norms[k]


def _canonical_sign(v):
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def sym_eigen(S, tol=DEFAULT_TOLERANCES):
    """Eigen-decomposition of a symmetric 3x3 matrix.

    Returns (w, V) with eigenvalues w ascending and unit eigenvectors in the
    columns of V. Uses the trigonometric closed form followed by one Newton
    polish per eigenvalue; eigenvectors come from cross products of rows of
    S - w I. For (near) degenerate eigenvalues any orthonormal basis of the
    eigenspace may be returned.
    """
    S = np.asarray(S, dtype=float)
    scale = np.linalg.norm(S)
    if np.linalg.norm(S - S.T) > tol.residual_tol * max(scale, 1.0):
        raise ValueError("sym_eigen requires a symmetric matrix")
    S = 0.5 * (S + S.T)

    q = np.trace(S) / 3.0
    B = S - q * EYE3
    p = np.sqrt(np.sum(B * B) / 6.0)
    if p <= 1e-14 * max(scale, 1.0):
        return np.array([q, q, q]), EYE3.copy()

    r = np.clip(np.linalg.det(B / p) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    raw = q + 2.0 * p * np.cos(phi + 2.0 * np.pi * np.arange(3) / 3.0)
    w = np.sort([_char_poly_newton(S, lam) for lam in raw])

    gap_tol = 1e-10 * max(scale, 1.0)
    lo_pair = (w[1] - w[0]) <= gap_tol
    hi_pair = (w[2] - w[1]) <= gap_tol

    if lo_pair and hi_pair:
        return w, EYE3.copy()

    if lo_pair or hi_pair:
        # one simple eigenvalue, one double; build the double eigenspace as
        # the orthogonal complement of the simple eigenvector
        simple = 2 if lo_pair else 0
        v = _kernel_direction(S - w[simple] * EYE3)
        if v is None:
            return w, EYE3.copy()
        helper = EYE3[int(np.argmin(np.abs(v)))]
        u1 = np.cross(v, helper)
        u1 /= np.linalg.norm(u1)
        u2 = np.cross(v, u1)
        cols = [None, None, None]
        cols[simple] = v
        pair = [i for i in range(3) if i != simple]
        cols[pair[0]], cols[pair[1]] = u1, u2
        V = np.column_stack([_canonical_sign(c) for c in cols])
        return w, V

    cols = []
    for lam in w:
        v = _kernel_direction(S - lam * EYE3)
        if v is None:
            v = EYE3[len(cols)]
        cols.append(v)
    # Gram-Schmidt touch-up keeps the frame orthonormal to round-off
    cols[1] = cols[1] - (cols[1] @ cols[0]) * cols[0]
    cols[1] /= np.linalg.norm(cols[1])
    third = np.cross(cols[0], cols[1])
    cols[2] = third if third @ cols[2] >= 0 else -third
    V = np.column_stack([_canonical_sign(c) for c in cols])
    return w, V


def polar(F, tol=DEFAULT_TOLERANCES):
    """Right polar decomposition F = R V with R a rotation, V symmetric
    positive definite. Raises for singular or orientation-reversing input."""
    F = np.asarray(F, dtype=float)
    det = np.linalg.det(F)
    if not np.isfinite(det) or det <= 0.0:
        raise ValueError("polar decomposition requires det F > 0")
    w, V = sym_eigen(F.T @ F, tol)
    if w[0] <= 0.0:
        raise ValueError("polar decomposition requires det F > 0")
    R = F @ (V * (1.0 / np.sqrt(w))) @ V.T
    for _ in range(2):
        R = 0.5 * R @ (3.0 * EYE3 - R.T @ R)
    stretch = R.T @ F
    return R, 0.5 * (stretch + stretch.T)


def orthogonal_polish(R, steps=2):
    """Project a near-rotation back onto the orthogonal group."""
    R = np.asarray(R, dtype=float)
    for _ in range(steps):
        R = 0.5 * R @ (3.0 * EYE3 - R.T @ R)
    return R


def rank_le_one(M, tol=DEFAULT_TOLERANCES):
    """True when the second singular value is negligible against the first."""
    sv = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if sv[0] == 0.0:
        return True
    return bool(sv[1] <= tol.rank_tol * sv[0])


def rotation_axis_angle(axis, theta):
    """Rodrigues rotation about a unit axis."""
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
        raise ValueError("rotation axis must be a unit vector")
    K = np.array([[0.0, -axis[2], axis[1]],
                  [axis[2], 0.0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    return EYE3 + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


def rotation_angle_deg(R):
    """Rotation angle of a proper rotation, in degrees, robust near 0 and pi."""
    R = np.asarray(R, dtype=float)
    axial = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return np.degrees(np.arctan2(0.5 * np.linalg.norm(axial),
                                 0.5 * (np.trace(R) - 1.0)))


def unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n
