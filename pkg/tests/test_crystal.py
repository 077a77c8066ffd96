import numpy as np
import pytest

from martcompat.crystal import (bcc_slip_systems, cubic_point_group,
                                habit_plate_map, habit_plates, variants)

LAM = 1.2
D = 1.0 / LAM


def test_variants_eigenvalues():
    for var in variants(LAM, D):
        w = np.linalg.eigvalsh(var.U)
        assert np.allclose(sorted(w), sorted([D, 1.0, LAM]), atol=1e-14)
        assert np.linalg.norm(var.U - var.U.T) == 0.0
    assert [v.index for v in variants(LAM, D)] == [1, 2, 3, 4, 5, 6]


def test_variants_reject_nonpositive():
    with pytest.raises(ValueError):
        variants(-1.0, 0.5)


def test_habit_plates_are_valid_rank_one_connections():
    """Each plate gradient I + a x n equals R U for a proper rotation R."""
    plates = habit_plates(LAM, D)
    assert len(plates) == 12
    us = {v.index: v.U for v in variants(LAM, D)}
    for plate in plates:
        F = plate.gradient
        R = F @ np.linalg.inv(us[plate.variant])
        assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-13
        assert abs(np.linalg.det(R) - 1.0) < 1e-13
        assert np.linalg.norm(plate.R - R) < 1e-10


def test_habit_plate_ordering_and_keys():
    keys = [p.key for p in habit_plates(LAM, D)]
    assert keys == [(i, s) for i in range(1, 7) for s in ("+", "-")]
    assert set(habit_plate_map(LAM, D)) == set(keys)


def test_habit_plate_component_conventions():
    # the unnormalized vectors carry entries of magnitude 1, beta or gamma
    plates = habit_plate_map(LAM, D)
    alpha = D * (LAM ** 2 - 1.0) / (2.0 * (D + LAM))
    beta = -np.sqrt(2.0 * (1.0 - D ** 2)) / np.sqrt(LAM ** 2 - 1.0)
    gamma = (LAM / D) * beta
    p = plates[(1, "+")]
    assert np.allclose(p.a, alpha * np.array([-gamma, 1.0, 1.0]), atol=1e-15)
    assert np.allclose(p.n, np.array([beta, 1.0, 1.0]), atol=1e-15)
    q = plates[(3, "-")]
    assert np.allclose(q.a, alpha * np.array([1.0, gamma, 1.0]), atol=1e-15)
    assert np.allclose(q.n, np.array([1.0, -beta, 1.0]), atol=1e-15)


def test_habit_plates_regime_validation():
    with pytest.raises(ValueError):
        habit_plates(1.5, 1.1)      # d must stay below one
    with pytest.raises(ValueError):
        habit_plates(0.99, 0.9)     # lam must exceed one


def test_bcc_slip_systems_families():
    slips = bcc_slip_systems()
    assert len(slips) == 48
    by_family = {}
    for s in slips:
        by_family.setdefault(s.family, []).append(s)
        assert float(s.direction @ s.plane_normal) == 0.0
        assert sorted(np.abs(s.direction)) == [1, 1, 1]
    assert {k: len(v) for k, v in by_family.items()} == {110: 12, 112: 12,
                                                         123: 24}


def test_bcc_slip_systems_sign_convention_and_uniqueness():
    slips = bcc_slip_systems()
    seen = set()
    for s in slips:
        for vec in (s.direction, s.plane_normal):
            nonzero = [c for c in vec if c != 0]
            assert nonzero[0] > 0
        seen.add(s.key)
    assert len(seen) == 48
    # deterministic enumeration
    again = bcc_slip_systems()
    assert [s.key for s in slips] == [s.key for s in again]


def test_cubic_point_group():
    group = cubic_point_group()
    assert len(group) == 24
    keys = set()
    for Q in group:
        assert np.allclose(Q @ Q.T, np.eye(3))
        assert round(np.linalg.det(Q)) == 1
        keys.add(tuple(np.rint(Q).astype(int).ravel()))
    assert len(keys) == 24
    # closure under composition
    for Qa in group[:6]:
        for Qb in group[:6]:
            prod = tuple(np.rint(Qa @ Qb).astype(int).ravel())
            assert prod in keys
