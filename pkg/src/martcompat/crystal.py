"""Cubic-to-orthorhombic variant set, habit plates, point group, slip catalog."""

import dataclasses
import itertools

import numpy as np

from .linalg import EYE3, orthogonal_polish

PLUS = "+"
MINUS = "-"
SIGNS = (PLUS, MINUS)


@dataclasses.dataclass
class Variant:
    """One of the six orthorhombic stretch tensors, eigenvalues {d, 1, lam}."""

    index: int
    U: np.ndarray
    lam: float
    d: float


@dataclasses.dataclass
class HabitPlate:
    """Martensite plate rank-one connected to the austenite identity.

    The deformation gradient is I + a x n = R U. Both a and n are kept in
    the unnormalized convention of the closed-form catalog; unit versions
    are derived views.
    """

    variant: int
    sign: str
    a: np.ndarray
    n: np.ndarray
    R: np.ndarray

    @property
    def gradient(self):
        return EYE3 + np.outer(self.a, self.n)

    @property
    def key(self):
        return (self.variant, self.sign)


@dataclasses.dataclass
class SlipSystem:
    """Integer Miller pair: slip direction and slip-plane normal."""

    direction: np.ndarray
    plane_normal: np.ndarray
    family: int

    @property
    def key(self):
        return (tuple(int(x) for x in self.direction),
                tuple(int(x) for x in self.plane_normal))


def variants(lam, d):
    """The six stretch tensors of the cubic-to-orthorhombic transformation."""
    if not (lam > 0.0 and d > 0.0):
        raise ValueError("variants require lam > 0 and d > 0")
    p = (lam + 1.0) / 2.0
    q = (lam - 1.0) / 2.0
    mats = (
        [[d, 0, 0], [0, p, q], [0, q, p]],
        [[d, 0, 0], [0, p, -q], [0, -q, p]],
        [[p, 0, q], [0, d, 0], [q, 0, p]],
        [[p, 0, -q], [0, d, 0], [-q, 0, p]],
        [[p, q, 0], [q, p, 0], [0, 0, d]],
        [[p, -q, 0], [-q, p, 0], [0, 0, d]],
    )
    return [Variant(i, np.array(M, dtype=float), lam, d)
            for i, M in enumerate(mats, start=1)]


def habit_plates(lam, d):
    """All twelve austenite-compatible plates (a, n) for the variant set.

    Requires the transformation regime 0 < d < 1 < lam, where the square
    roots in the plate coefficients are real.
    """
    if not (0.0 < d < 1.0 < lam):
        raise ValueError("habit plates require 0 < d < 1 < lam")
    al = d * (lam ** 2 - 1.0) / (2.0 * (d + lam))
    be = -np.sqrt(2.0 * (1.0 - d ** 2)) / np.sqrt(lam ** 2 - 1.0)
    ga = -(lam / d) * np.sqrt(2.0 * (1.0 - d ** 2)) / np.sqrt(lam ** 2 - 1.0)
    catalog = {
        (1, PLUS): ((-ga, 1.0, 1.0), (be, 1.0, 1.0)),
        (1, MINUS): ((ga, 1.0, 1.0), (-be, 1.0, 1.0)),
        (2, PLUS): ((-ga, -1.0, 1.0), (be, -1.0, 1.0)),
        (2, MINUS): ((ga, -1.0, 1.0), (-be, -1.0, 1.0)),
        (3, PLUS): ((1.0, -ga, 1.0), (1.0, be, 1.0)),
        (3, MINUS): ((1.0, ga, 1.0), (1.0, -be, 1.0)),
        (4, PLUS): ((-1.0, -ga, 1.0), (-1.0, be, 1.0)),
        (4, MINUS): ((-1.0, ga, 1.0), (-1.0, -be, 1.0)),
        (5, PLUS): ((1.0, 1.0, -ga), (1.0, 1.0, be)),
        (5, MINUS): ((1.0, 1.0, ga), (1.0, 1.0, -be)),
        (6, PLUS): ((-1.0, 1.0, -ga), (-1.0, 1.0, be)),
        (6, MINUS): ((-1.0, 1.0, ga), (-1.0, 1.0, -be)),
    }
    us = variants(lam, d)
    plates = []
    for i in range(1, 7):
        for sign in SIGNS:
            a_pat, n_pat = catalog[(i, sign)]
            a = al * np.array(a_pat)
            n = np.array(n_pat)
            R = orthogonal_polish((EYE3 + np.outer(a, n))
                                  @ np.linalg.inv(us[i - 1].U))
            plates.append(HabitPlate(i, sign, a, n, R))
    return plates


def habit_plate_map(lam, d):
    """Same plates keyed by (variant index, sign)."""
    return {p.key: p for p in habit_plates(lam, d)}


def _sign_normalized(v):
    for c in v:
        if c != 0:
            return v if c > 0 else tuple(-x for x in v)
    return v


def bcc_slip_systems():
    """The 48 BCC systems: <111> directions on {110}, {112}, {123} planes.

    Both Miller vectors are normalized so their first nonzero component is
    positive; ordering is family, then plane, then direction, all ascending.
    """
    directions = sorted({_sign_normalized(p)
                         for p in itertools.product((-1, 1), repeat=3)})
    systems = []
    for family, base in ((110, (0, 1, 1)), (112, (1, 1, 2)), (123, (1, 2, 3))):
        planes = sorted({_sign_normalized(tuple(s * x for s, x in zip(sg, perm)))
                         for perm in itertools.permutations(base)
                         for sg in itertools.product((-1, 1), repeat=3)})
        for plane in planes:
            for direction in directions:
                if sum(a * b for a, b in zip(plane, direction)) == 0:
                    systems.append(SlipSystem(np.array(direction, dtype=float),
                                              np.array(plane, dtype=float),
                                              family))
    return systems


def cubic_point_group():
    """The 24 proper rotations of the cube, as signed permutation matrices."""
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            M = np.zeros((3, 3))
            for row, (col, s) in enumerate(zip(perm, signs)):
                M[row, col] = s
            if np.linalg.det(M) > 0.0:
                mats.append(M)
    mats.sort(key=lambda M: tuple(M.flatten()))
    return mats
