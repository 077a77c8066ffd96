"""Rank-one compatibility between deformation gradients.

Covers the two-rotation connection problem F1 = R (I + c x mp) F2, twin
solutions between stretch tensors related by a two-fold axis, and the
incompatibility angle used to rank plate pairs.
"""

import dataclasses

import numpy as np

from .errors import MiddleEigenvalueError
from .linalg import (DEFAULT_TOLERANCES, EYE3, orthogonal_polish,
                     rotation_angle_deg, sym_eigen, unit)


@dataclasses.dataclass
class RankOneSolution:
    R: np.ndarray
    b: np.ndarray
    m: np.ndarray
    angle_deg: float


@dataclasses.dataclass
class TwinSolution:
    pair: tuple
    axis: np.ndarray
    R: np.ndarray
    b: np.ndarray
    m: np.ndarray
    branch: str


@dataclasses.dataclass
class IncompatibilityAngle:
    degrees: float
    lambda_mid: float
    rescaled: bool

    def __float__(self):
        return float(self.degrees)


def _first_nonzero_positive(v, b):
    for c in v:
        if abs(c) > 1e-14:
            return (v, b) if c > 0 else (-v, -b)
    return v, b


def _pair_solutions(F1, F2, w, V, tol, verify):
    """Two-solution construction from the eigen data of F2^-T F1^T F1 F2^-1."""
    l1, l3 = w[0], w[2]
    e1v, e3v = V[:, 0], V[:, 2]
    span = l3 - l1
    G = F1 @ np.linalg.inv(F2)
    sols = []
    for kappa in (1.0, -1.0):
        c = (np.sqrt(max(l3 * (1.0 - l1), 0.0) / span) * e1v
             + kappa * np.sqrt(max(l1 * (l3 - 1.0), 0.0) / span) * e3v)
        mp = ((np.sqrt(l3) - np.sqrt(l1)) / np.sqrt(span)) * (
            -np.sqrt(max(1.0 - l1, 0.0)) * e1v
            + kappa * np.sqrt(max(l3 - 1.0, 0.0)) * e3v)
        R = orthogonal_polish(G @ np.linalg.inv(EYE3 + np.outer(c, mp)), steps=3)
        m_raw = F2.T @ mp
        scale = np.linalg.norm(m_raw)
        m = m_raw / scale
        b = (R @ c) * scale
        m, b = _first_nonzero_positive(m, b)
        if verify:
            resid = np.linalg.norm(F1 - R @ F2 - np.outer(b, m))
            if resid > tol.residual_tol * max(np.linalg.norm(F1), 1.0):
                raise ArithmeticError(
                    "rank-one reconstruction residual %.3e exceeds tolerance" % resid)
        sols.append(RankOneSolution(R, b, m, rotation_angle_deg(R)))
    sols.sort(key=lambda s: s.angle_deg)
    return sols


def rank_one_connections(F1, F2, tol=DEFAULT_TOLERANCES):
    """All rotations R with F1 - R F2 of rank at most one.

    Returns two solutions ordered by ascending rotation angle, or a single
    solution when F1 is itself a rotation of F2. Raises
    MiddleEigenvalueError when the middle eigenvalue of the relative stretch
    is not one, which is exactly the obstruction to compatibility.
    """
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    if np.linalg.det(F1) <= 0.0 or np.linalg.det(F2) <= 0.0:
        raise ValueError("rank_one_connections requires det F > 0 on both sides")
    F2inv = np.linalg.inv(F2)
    C = F2inv.T @ F1.T @ F1 @ F2inv
    w, V = sym_eigen(C, tol)
    if abs(w[1] - 1.0) > tol.mid_eig_tol:
        raise MiddleEigenvalueError(w[1], tol.mid_eig_tol)
    if abs(w[0] - 1.0) <= tol.mid_eig_tol and abs(w[2] - 1.0) <= tol.mid_eig_tol:
        R = orthogonal_polish(F1 @ F2inv, steps=3)
        return [RankOneSolution(R, np.zeros(3), np.array([1.0, 0.0, 0.0]),
                                rotation_angle_deg(R))]
    return _pair_solutions(F1, F2, w, V, tol, verify=True)


def incompatibility_angle(F1, F2, tol=DEFAULT_TOLERANCES):
    """Smallest rotation angle closing the rank-one gap between F1 and F2.

    The exact path requires the middle relative-stretch eigenvalue to be one
    within mid_eig_tol. Inside the wider mid_eig_band the gradients are
    accepted as approximately compatible: F1 is rescaled by the middle
    eigenvalue and the result is flagged. The returned object carries the
    angle in degrees, the middle eigenvalue and the rescale flag, and
    converts to float as the angle.
    """
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    sv = np.linalg.svd(F1 - F2, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= tol.rank_tol * sv[0]:
        raise ValueError("incompatibility angle requires rank(F1 - F2) = 2")
    F2inv = np.linalg.inv(F2)
    C = F2inv.T @ F1.T @ F1 @ F2inv
    w, V = sym_eigen(C, tol)
    lambda_mid = w[1]
    deviation = abs(lambda_mid - 1.0)
    rescaled = False
    F1r = F1
    if deviation > tol.mid_eig_tol:
        if deviation > tol.mid_eig_band:
            raise MiddleEigenvalueError(lambda_mid, tol.mid_eig_band)
        rescaled = True
        F1r = F1 / np.sqrt(lambda_mid)
        C = F2inv.T @ F1r.T @ F1r @ F2inv
        w, V = sym_eigen(C, tol)
    if abs(w[0] - 1.0) <= tol.mid_eig_tol and abs(w[2] - 1.0) <= tol.mid_eig_tol:
        # same-well gradients: the gap closes with zero shear and the angle
        # is that of the relative rotation itself
        R = orthogonal_polish(F1r @ F2inv)
        return IncompatibilityAngle(rotation_angle_deg(R), lambda_mid, rescaled)
    sols = _pair_solutions(F1r, F2, w, V, tol, verify=False)
    return IncompatibilityAngle(sols[0].angle_deg, lambda_mid, rescaled)


def two_fold_axes(point_group):
    """Unit axes of the 180-degree members of a point group, deduplicated,
    sign-normalized and sorted descending lexicographically."""
    seen = {}
    for Q in point_group:
        if abs(np.trace(Q) + 1.0) > 1e-9:
            continue
        M = Q + EYE3
        col = int(np.argmax(np.linalg.norm(M, axis=0)))
        v = unit(M[:, col])
        for c in v:
            if abs(c) > 1e-12:
                if c < 0:
                    v = -v
                break
        seen[tuple(np.round(v, 12))] = v
    return [seen[k] for k in sorted(seen, reverse=True)]


def find_twin_axis(U1, U2, point_group, tol=DEFAULT_TOLERANCES):
    """First two-fold axis e with U1 = (2 e x e - I) U2 (2 e x e - I), or None."""
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    bound = tol.residual_tol * max(np.linalg.norm(U1), 1.0)
    for e in two_fold_axes(point_group):
        Q = 2.0 * np.outer(e, e) - EYE3
        if np.linalg.norm(U1 - Q @ U2 @ Q) <= bound:
            return e
    return None


def twin_solutions(U1, U2, axis, pair=(1, 2), tol=DEFAULT_TOLERANCES):
    """Both twin branches for stretch tensors related by the given axis.

    Branch I takes the axis itself as interface normal; branch II is the
    reciprocal solution. Each result satisfies R U2 = U1 + b x m.
    """
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    e = np.asarray(axis, dtype=float)
    U1inv = np.linalg.inv(U1)
    U2inv = np.linalg.inv(U2)
    out = []
    for branch in ("I", "II"):
        if branch == "I":
            m = e.copy()
            w = U1inv @ e
            b = 2.0 * (w / (w @ w) - U1 @ e)
        else:
            b = U1 @ e
            b2 = U1 @ b
            m = 2.0 * (e - b2 / (b @ b))
        R = orthogonal_polish((U1 + np.outer(b, m)) @ U2inv, steps=3)
        resid = np.linalg.norm(R @ U2 - U1 - np.outer(b, m))
        if resid > tol.residual_tol * max(np.linalg.norm(U1), 1.0):
            raise ValueError(
                "axis does not generate a twin for this pair (residual %.3e)" % resid)
        out.append(TwinSolution(tuple(pair), e.copy(), R, b, m, branch))
    return out
