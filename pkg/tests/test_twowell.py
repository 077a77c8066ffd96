import numpy as np
import pytest

from martcompat.crystal import habit_plate_map, variants
from martcompat.errors import HypothesisFailed, NoTwinAxis
from martcompat.twowell import (kqc_membership, twin_params,
                                two_well_bc_feasible,
                                two_well_bc_feasible_complement,
                                twodim_hull_check)

RNG = np.random.default_rng(777)
LAM = 1.2
D = 1.0 / LAM


def variant_pair():
    us = variants(LAM, D)
    return us[0].U, us[1].U


def test_twin_params_frame():
    U1, U2 = variant_pair()
    tp = twin_params(U1, U2)
    assert np.allclose(tp.axis, [0.0, 1.0, 0.0], atol=1e-14)
    frame = np.column_stack([tp.u1, tp.u2, tp.u3])
    assert np.linalg.norm(frame.T @ frame - np.eye(3)) < 1e-12
    lhs = U1 @ tp.L
    rhs = np.eye(3) - tp.delta * np.outer(tp.u3, tp.u1)
    assert np.linalg.norm(lhs - rhs) < 1e-12
    assert tp.delta > 0.0


def test_twin_params_needs_axis():
    with pytest.raises(NoTwinAxis):
        twin_params(np.eye(3), np.diag([1.0, 2.0, 3.0]))


def test_kqc_membership_of_wells():
    U1, U2 = variant_pair()
    tp = twin_params(U1, U2)
    ok1, coords = kqc_membership(U1, tp)
    assert ok1
    assert abs(coords.alpha - (1.0 + tp.delta ** 2)) < 1e-12
    assert abs(coords.beta + tp.delta) < 1e-12
    assert abs(coords.gamma - 1.0) < 1e-12
    ok2, _ = kqc_membership(U2, tp)
    assert ok2
    # rotations of a member stay members
    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th), 0.0],
                  [np.sin(th), np.cos(th), 0.0],
                  [0.0, 0.0, 1.0]])
    ok3, _ = kqc_membership(R @ U2, tp)
    assert ok3


def test_kqc_rejects_scaled_identity():
    U1, U2 = variant_pair()
    tp = twin_params(U1, U2)
    ok, _ = kqc_membership(2.0 * np.eye(3), tp)
    assert not ok


def test_kqc_laminate_path():
    """Points along the twin rank-one segment stay inside the hull."""
    U1, U2 = variant_pair()
    tp = twin_params(U1, U2)
    for s in (0.25, 0.5, 0.75):
        F = U1 + s * np.outer(tp.b, tp.m)
        ok, coords = kqc_membership(F, tp)
        assert ok
        assert coords.gamma <= 1.0 + 1e-12


def test_two_well_trivial_and_synthetic():
    U1, U2 = variant_pair()
    n1 = np.array([1.0, 0.0, 0.0])
    n2 = np.array([0.0, 1.0, 0.0])
    res = two_well_bc_feasible(U1, U2, n1, n2, U1, U1)
    assert res.feasible and res.hypothesis_ok
    assert np.linalg.norm(res.d) < 1e-12
    # jump along the admissible direction with a known coefficient vector
    tp = twin_params(U1, U2)
    n_perp = np.cross(n1, n2)
    n_perp /= np.linalg.norm(n_perp)
    w = np.cross(tp.u_star, n_perp)
    d0 = np.array([0.05, -0.02, 0.03])
    F2 = U1.copy()
    F1 = F2 + np.outer(d0, w)
    res2 = two_well_bc_feasible(U1, U2, n1, n2, F1, F2)
    assert res2.feasible
    assert np.allclose(res2.d, d0, atol=1e-10)
    # a jump off that direction is rejected
    F1_bad = F2 + np.outer(d0, np.array([0.0, 1.0, 1.0]))
    res3 = two_well_bc_feasible(U1, U2, n1, n2, F1_bad, F2)
    assert not res3.feasible


def test_two_well_hypothesis_failure():
    U1 = np.diag([1.2, 0.9, 1.0])
    U2 = np.diag([0.9, 1.2, 1.0])
    with pytest.raises(HypothesisFailed):
        two_well_bc_feasible(U1, U2, np.array([1.0, 0.0, 0.0]),
                             np.array([0.0, 1.0, 0.0]), U1, U2)


def test_two_well_plate_pair_infeasible():
    lam = 1.0331
    plates = habit_plate_map(lam, 1.0 / lam)
    us = variants(lam, 1.0 / lam)
    p1, p4 = plates[(1, "+")], plates[(4, "-")]
    res = two_well_bc_feasible(us[0].U, us[3].U, p1.n, p4.n,
                               p1.gradient, p4.gradient)
    assert res.hypothesis_ok
    assert not res.feasible


def test_two_well_complement_overlap():
    U1, U2 = variant_pair()
    tp = twin_params(U1, U2)
    # u_star points along e1, so the overlap sign is n1_x * n2_x
    assert np.linalg.norm(np.cross(tp.u_star, [1.0, 0.0, 0.0])) < 1e-12
    n1 = np.array([1.0, 0.0, 1.0])
    n2 = np.array([-1.0, 0.5, 0.8])
    n_perp = np.cross(n1, n2)
    n_perp /= np.linalg.norm(n_perp)
    w = np.cross(tp.u_star, n_perp)
    F2 = U1.copy()
    F1 = F2 + np.outer(np.array([0.04, 0.01, -0.02]), w)
    plain = two_well_bc_feasible(U1, U2, n1, n2, F1, F2)
    comp = two_well_bc_feasible_complement(U1, U2, n1, n2, F1, F2)
    assert plain.feasible
    assert not comp.feasible and comp.overlap_ok is False


def test_twodim_hull_check():
    eta1, eta2 = 1.2, 0.9
    F1 = np.diag([eta1, eta2, 1.0])
    b1 = (np.sqrt(2.0) * (eta1 - eta2) / (eta1 + eta2)) * \
        np.array([-eta1, eta2, 0.0])
    m1 = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    B = F1 + np.outer(b1, m1)
    assert twodim_hull_check(eta1, eta2, B)
    assert not twodim_hull_check(eta1, eta2, 2.0 * np.eye(3))
    with pytest.raises(ValueError):
        twodim_hull_check(-1.0, 0.9, B)
