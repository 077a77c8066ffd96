import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from martcompat.linalg import (DEFAULT_TOLERANCES, Tolerances, cofactor,
                               orthogonal_polish, polar, rank_le_one,
                               rotation_angle_deg, rotation_axis_angle,
                               sym_eigen, unit)

RNG = np.random.default_rng(20240817)
EIG_TOL = 1e-12
ORTHO_TOL = 1e-12

entry = st.floats(min_value=-2.0, max_value=2.0,
                  allow_nan=False, allow_infinity=False)
matrix33 = arrays(np.float64, (3, 3), elements=entry)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)]])


def test_sym_eigen_reconstructs():
    for _ in range(200):
        A = RNG.normal(size=(3, 3))
        S = A + A.T
        w, V = sym_eigen(S)
        assert w[0] <= w[1] <= w[2]
        assert np.linalg.norm(V.T @ V - np.eye(3)) < ORTHO_TOL
        assert np.linalg.norm(S @ V - V @ np.diag(w)) < 1e-10 * max(
            np.linalg.norm(S), 1.0)


def test_sym_eigen_matches_lapack_eigenvalues():
    for _ in range(200):
        A = RNG.normal(size=(3, 3))
        S = A + A.T
        w, _ = sym_eigen(S)
        ref = np.linalg.eigvalsh(S)
        assert np.max(np.abs(w - ref)) < 1e-10 * max(np.linalg.norm(S), 1.0)


def test_sym_eigen_repeated_eigenvalues():
    # pairs and triples must still give an orthonormal frame
    for vals in ([2.0, 2.0, 5.0], [3.0, 3.0, 3.0], [-1.0, 4.0, 4.0]):
        Q = random_rotation(RNG)
        S = Q @ np.diag(vals) @ Q.T
        w, V = sym_eigen(S)
        assert np.allclose(sorted(vals), w, atol=1e-12)
        assert np.linalg.norm(V.T @ V - np.eye(3)) < 1e-10
        assert np.linalg.norm(S @ V - V @ np.diag(w)) < 1e-9


def test_sym_eigen_rejects_nonsymmetric():
    M = np.eye(3)
    M[0, 1] = 0.5
    with pytest.raises(ValueError):
        sym_eigen(M)


def test_polar_round_trip():
    for _ in range(200):
        F = RNG.normal(size=(3, 3))
        if np.linalg.det(F) < 0.1:
            continue
        R, V = polar(F)
        assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12
        assert abs(np.linalg.det(R) - 1.0) < 1e-12
        assert np.linalg.norm(V - V.T) < 1e-12 * max(np.linalg.norm(V), 1.0)
        assert np.linalg.norm(R @ V - F) < 1e-11 * max(np.linalg.norm(F), 1.0)


def test_polar_rejects_singular():
    F = np.diag([1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        polar(F)


def test_cofactor_identity():
    for _ in range(100):
        M = RNG.normal(size=(3, 3))
        det = np.linalg.det(M)
        if abs(det) < 1e-3:
            continue
        assert np.allclose(cofactor(M), det * np.linalg.inv(M).T,
                           atol=1e-10 * max(abs(det), 1.0))


def test_cofactor_vanishes_on_rank_one():
    a, n = RNG.normal(size=3), RNG.normal(size=3)
    assert np.linalg.norm(cofactor(np.outer(a, n))) < 1e-14 * (
        np.linalg.norm(a) * np.linalg.norm(n)) ** 2


def test_cofactor_batched():
    Ms = RNG.normal(size=(5, 3, 3))
    batch = cofactor(Ms)
    for k in range(5):
        assert np.allclose(batch[k], cofactor(Ms[k]))


def test_rank_le_one():
    a, n = RNG.normal(size=3), RNG.normal(size=3)
    assert rank_le_one(np.outer(a, n))
    assert rank_le_one(np.zeros((3, 3)))
    assert not rank_le_one(np.outer(a, n) + np.outer(n, a) + np.eye(3))


def test_rotation_axis_angle():
    R = rotation_axis_angle(np.array([0.0, 0.0, 1.0]), np.pi / 2)
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)
    assert abs(rotation_angle_deg(R) - 90.0) < 1e-12
    with pytest.raises(ValueError):
        rotation_axis_angle(np.array([0.0, 0.0, 2.0]), 0.3)


def test_orthogonal_polish_restores_rotation():
    Q = random_rotation(RNG)
    dirty = Q + RNG.normal(size=(3, 3)) * 1e-8
    clean = orthogonal_polish(dirty)
    assert np.linalg.norm(clean.T @ clean - np.eye(3)) < 1e-14


def test_unit_rejects_zero():
    with pytest.raises(ValueError):
        unit(np.zeros(3))


def test_tolerances_validate():
    with pytest.raises(ValueError):
        Tolerances(rank_tol=-1e-9)
    assert DEFAULT_TOLERANCES.rank_tol == 1e-9


@seed(11)
@settings(max_examples=300, deadline=None)
@given(matrix33)
def test_polar_property(F):
    det = np.linalg.det(F)
    if det < 1e-2:
        return
    R, V = polar(F)
    assert np.linalg.norm(R @ V - F) < 1e-10 * max(np.linalg.norm(F), 1.0)
    assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12


@seed(12)
@settings(max_examples=300, deadline=None)
@given(matrix33)
def test_cofactor_product_property(F):
    # cof(AB) = cof(A) cof(B)
    G = np.array([[1.0, 0.5, 0.0], [0.0, 1.0, -0.3], [0.2, 0.0, 1.0]])
    lhs = cofactor(F @ G)
    rhs = cofactor(F) @ cofactor(G)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(np.linalg.norm(lhs), 1.0)
