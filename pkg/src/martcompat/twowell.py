"""Two-well problem: hull membership and corner boundary-condition feasibility.

The predicate answers whether two gradients picked from the quasiconvex hull
of SO(3)U1 + SO(3)U2 can meet along a corner with traction-free sides, which
reduces to a rank-one condition along one admissible jump direction.
"""

import dataclasses

import numpy as np

from .compat import find_twin_axis, twin_solutions
from .crystal import cubic_point_group
from .errors import HypothesisFailed, NoTwinAxis
from .linalg import DEFAULT_TOLERANCES, EYE3, rank_le_one, unit


@dataclasses.dataclass
class TwinParams:
    """Twin solution of branch I plus the adapted orthonormal frame.

    u1 is along U1^-1 m, u3 along b, u2 completes the frame; delta is the
    shear magnitude, L maps the reference so that U1 L = I - delta u3 x u1,
    and u_star spans the admissible boundary-jump directions.
    """

    axis: np.ndarray
    b: np.ndarray
    m: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    delta: float
    L: np.ndarray
    u_star: np.ndarray


@dataclasses.dataclass
class KqcCoordinates:
    alpha: float
    beta: float
    gamma: float


@dataclasses.dataclass
class TwoWellFeasibility:
    feasible: bool
    d: np.ndarray
    hypothesis_ok: bool
    overlap_ok: bool = None


def twin_params(U1, U2, point_group=None, tol=DEFAULT_TOLERANCES):
    """Frame data for the two-well pair, built on the branch-I twin."""
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    if point_group is None:
        point_group = cubic_point_group()
    axis = find_twin_axis(U1, U2, point_group, tol)
    if axis is None:
        raise NoTwinAxis("no two-fold axis relates the two stretch tensors")
    sol = twin_solutions(U1, U2, axis, tol=tol)[0]
    b, m = sol.b, sol.m
    norm_b = np.linalg.norm(b)
    if norm_b <= tol.residual_tol:
        raise ValueError("degenerate twin: the shear vector vanishes")
    w = np.linalg.inv(U1) @ m
    u1 = unit(w)
    u3 = b / norm_b
    u2 = np.cross(u3, u1)
    delta = 0.5 * np.linalg.norm(w) * norm_b
    L = np.linalg.inv(U1) @ (EYE3 - delta * np.outer(u3, u1))
    u_star = np.cross(axis, U1 @ (U1 @ axis))
    return TwinParams(axis, b, m, u1, u2, u3, delta, L, u_star)


def kqc_membership(F, tp, tol=DEFAULT_TOLERANCES):
    """Hull membership of a gradient, with its (alpha, beta, gamma) chart.

    In the twin frame, members of the hull have F L with Gram matrix
    alpha u1 x u1 + u2 x u2 + gamma u3 x u3 + beta (u1 x u3 + u3 x u1),
    subject to 0 < alpha <= 1 + delta^2, 0 < gamma <= 1 and
    alpha gamma - beta^2 = 1.
    """
    F = np.asarray(F, dtype=float)
    G = F @ tp.L
    M = G.T @ G
    alpha = tp.u1 @ M @ tp.u1
    gamma = tp.u3 @ M @ tp.u3
    beta = tp.u1 @ M @ tp.u3
    coords = KqcCoordinates(alpha, beta, gamma)
    slack = tol.residual_tol * max(np.linalg.norm(M), 1.0)
    pattern_ok = (abs(tp.u2 @ M @ tp.u2 - 1.0) <= slack
                  and abs(tp.u1 @ M @ tp.u2) <= slack
                  and abs(tp.u2 @ M @ tp.u3) <= slack)
    top = 1.0 + tp.delta ** 2
    bounds_ok = (alpha > 0.0 and alpha <= top + slack
                 and gamma > 0.0 and gamma <= 1.0 + slack)
    surface_ok = abs(alpha * gamma - beta ** 2 - 1.0) <= \
        tol.residual_tol * max(1.0, abs(alpha * gamma))
    return pattern_ok and bounds_ok and surface_ok, coords


def _jump_feasibility(tp, n1, n2, F1, F2, tol):
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    nx = np.cross(n1, n2)
    if np.linalg.norm(nx) <= tol.rank_tol * max(
            np.linalg.norm(n1) * np.linalg.norm(n2), 1.0):
        raise ValueError("boundary normals must not be parallel")
    w0 = np.cross(tp.u_star, unit(nx))
    hypothesis_ok = np.linalg.norm(w0) > tol.rank_tol * max(
        np.linalg.norm(tp.u_star), 1.0)
    if not hypothesis_ok:
        raise HypothesisFailed(
            "admissible jump direction degenerates (u* parallel to n1 x n2)")
    wdir = unit(w0)
    helper = EYE3[int(np.argmin(np.abs(wdir)))]
    wa = unit(np.cross(wdir, helper))
    wb = np.cross(wdir, wa)
    D = np.asarray(F1, dtype=float) - np.asarray(F2, dtype=float)
    slack = tol.residual_tol * max(np.linalg.norm(D), 1.0)
    feasible = bool(rank_le_one(D, tol)
                    and np.linalg.norm(D @ wa) <= slack
                    and np.linalg.norm(D @ wb) <= slack)
    d = (D @ wdir) / np.linalg.norm(w0) if feasible else None
    return feasible, d


def two_well_bc_feasible(U1, U2, n1, n2, F1, F2, tol=DEFAULT_TOLERANCES):
    """Can F1 and F2 meet a traction-free corner with sides normal to n1, n2?

    Feasible exactly when F1 - F2 = d x (u* x n_perp) for some vector d,
    where n_perp is the unit corner-edge direction n1 x n2. Raises
    HypothesisFailed when u* is parallel to n_perp, in which case the
    criterion does not apply.
    """
    tp = twin_params(U1, U2, tol=tol)
    feasible, d = _jump_feasibility(tp, n1, n2, F1, F2, tol)
    return TwoWellFeasibility(feasible, d, True)


def two_well_bc_feasible_complement(U1, U2, n1, n2, F1, F2,
                                    tol=DEFAULT_TOLERANCES):
    """Feasibility for the complementary corner domain.

    Adds the no-overlap requirement (u* . n1)(u* . n2) >= 0 whenever the
    witnessing d is nonzero.
    """
    tp = twin_params(U1, U2, tol=tol)
    feasible, d = _jump_feasibility(tp, n1, n2, F1, F2, tol)
    overlap_ok = True
    if feasible and d is not None and np.linalg.norm(d) > tol.residual_tol:
        prod = (tp.u_star @ np.asarray(n1, dtype=float)) * \
               (tp.u_star @ np.asarray(n2, dtype=float))
        overlap_ok = bool(
            prod >= -tol.rank_tol * max(np.linalg.norm(tp.u_star) ** 2, 1.0))
    return TwoWellFeasibility(feasible and overlap_ok, d, True, overlap_ok)


def twodim_hull_check(eta1, eta2, B, eta3=1.0, tol=DEFAULT_TOLERANCES):
    """Plane-strain hull test for the diagonal two-well normal form.

    True when det B matches eta1 eta2 eta3 and both diagonal directions
    e1 +- e2 are stretched no further than the well circle radius.
    """
    if not (eta1 > 0.0 and eta2 > 0.0):
        raise ValueError("twodim_hull_check requires positive stretches")
    B = np.asarray(B, dtype=float)
    det_target = eta1 * eta2 * eta3
    det_ok = abs(np.linalg.det(B) - det_target) <= \
        tol.residual_tol * max(1.0, abs(det_target))
    limit = eta1 ** 2 + eta2 ** 2
    slack = tol.residual_tol * max(1.0, limit)
    plus = B @ np.array([1.0, 1.0, 0.0])
    minus = B @ np.array([1.0, -1.0, 0.0])
    return det_ok and plus @ plus <= limit + slack and minus @ minus <= limit + slack
