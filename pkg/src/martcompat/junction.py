"""Plastic junction engine.

Two austenite-compatible plates generally differ by a rank-two matrix, so a
planar interface between them is impossible without extra deformation. A
single slip on each side, with the right shear amounts, can close the gap.
This module solves for those amounts in closed form, scans the slip catalog
for admissible pairs, certifies local rigidity of the solutions, measures
how isolated the sheared gradients are from all competing wells, and builds
the layered wedge geometry around the junction axis.
"""

import dataclasses

import numpy as np

from .crystal import (SlipSystem, bcc_slip_systems, habit_plate_map, variants)
from .errors import (DegenerateDenominator, HypothesisFailed, NoBranch,
                     OrderingFailed, OrthogonalityFailed)
from .linalg import (DEFAULT_TOLERANCES, EYE3, cofactor, rank_le_one,
                     rotation_axis_angle, unit)

SQRT2 = np.sqrt(2.0)

# slip data of the non-rigid plate pair (1,+)/(1,-), keyed by roman label
LABELLED_SLIPS = {
    "I": (np.array([-1.0, 1.0, 1.0]), np.array([2.0, 1.0, 1.0])),
    "II": (np.array([1.0, 1.0, 1.0]), np.array([-2.0, 1.0, 1.0])),
    "III": (np.array([1.0, -1.0, 1.0]), np.array([0.0, 1.0, 1.0])),
    "IV": (np.array([1.0, 1.0, -1.0]), np.array([0.0, 1.0, 1.0])),
}


@dataclasses.dataclass
class ShearSolution:
    kind: str                  # "unique" | "family" | "none"
    values: tuple = None       # (s1, s2) when unique
    coefficients: tuple = None # (A, B, C) of A s1 + B s2 + C s1 s2 = 1
    note: str = ""


@dataclasses.dataclass
class PlasticJunction:
    plate1: object
    plate2: object
    slip1: SlipSystem
    slip2: SlipSystem
    t1: float
    t2: float
    b: np.ndarray
    m: np.ndarray
    residual: float
    lam: float
    d: float

    def sheared_gradient(self, side):
        plate = self.plate1 if side == 1 else self.plate2
        slip = self.slip1 if side == 1 else self.slip2
        t = self.t1 if side == 1 else self.t2
        return plate.gradient @ (
            EYE3 + t * np.outer(slip.direction, slip.plane_normal))


@dataclasses.dataclass
class RigidityReport:
    rigid: bool
    f_value: float
    f_normalized: float
    jacobian: np.ndarray
    min_abs_det: float
    family: dict = None


@dataclasses.dataclass
class SeparationReport:
    margin: float
    argmin: tuple


@dataclasses.dataclass
class WedgeGeometry:
    axis: np.ndarray
    theta_psi1: float
    theta_m: float
    theta_psi2: float
    theta_n2: float
    regions: dict


@dataclasses.dataclass
class StabilityResult:
    stable: bool
    reasons: list


def necessary_conditions(a1, a2, phi1, phi2, n1, n2, psi1, psi2,
                         tol=DEFAULT_TOLERANCES):
    """Which of the four triple-product vanishing pairs hold.

    The junction equation forces one of four disjuncts, each demanding two
    particular triple products to vanish: D1 puts both pushed-forward slip
    directions in the plane of a1, a2; D4 puts both slip-plane normals in
    the plane of n1, n2; D2 and D3 are the mixed combinations.
    """
    a1, a2 = np.asarray(a1, float), np.asarray(a2, float)
    n1, n2 = np.asarray(n1, float), np.asarray(n2, float)
    G0 = np.outer(a1, n1) - np.outer(a2, n2)
    sv = np.linalg.svd(G0, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= tol.rank_tol * sv[0]:
        raise ValueError("the unsheared plate difference must have rank two")
    ax, nx = np.cross(a1, a2), np.cross(n1, n2)
    sa, sn = np.linalg.norm(ax), np.linalg.norm(nx)

    def small(v, cross_vec, cross_norm):
        v = np.asarray(v, float)
        return abs(v @ cross_vec) <= tol.rank_tol * cross_norm * np.linalg.norm(v)

    c_phi1 = small(phi1, ax, sa)
    c_phi2 = small(phi2, ax, sa)
    c_psi1 = small(psi1, nx, sn)
    c_psi2 = small(psi2, nx, sn)
    out = set()
    if c_phi1 and c_phi2:
        out.add("D1")
    if c_phi1 and c_psi1:
        out.add("D2")
    if c_phi2 and c_psi2:
        out.add("D3")
    if c_psi1 and c_psi2:
        out.add("D4")
    return out


def _span_coefficients(v, b1, b2, tol):
    B = np.column_stack([b1, b2])
    x, *_ = np.linalg.lstsq(B, v, rcond=None)
    if np.linalg.norm(B @ x - v) <= tol.rank_tol * max(np.linalg.norm(v), 1.0):
        return x
    return None


def solve_shear_amounts(a1, a2, phi1, phi2, n1, n2, psi1, psi2,
                        tol=DEFAULT_TOLERANCES):
    """Shear amounts making a1 x n1 - a2 x n2 + s1 phi1 x psi1 - s2 phi2 x psi2
    rank one.

    Dispatches on which span conditions hold. When both slip-plane normals
    lie in span{n1, n2} and a pushed-forward direction leaves span{a1, a2},
    the two amounts are a ratio of triple products (branch A); the transposed
    situation is branch B. When both span conditions hold at once the
    solutions form a one-parameter family and the bilinear constraint
    coefficients are returned instead (branch C). Unique candidates are
    accepted only if the cofactor of the assembled matrix vanishes.
    """
    a1, a2 = np.asarray(a1, float), np.asarray(a2, float)
    phi1, phi2 = np.asarray(phi1, float), np.asarray(phi2, float)
    n1, n2 = np.asarray(n1, float), np.asarray(n2, float)
    psi1, psi2 = np.asarray(psi1, float), np.asarray(psi2, float)
    G0 = np.outer(a1, n1) - np.outer(a2, n2)
    scale = np.linalg.norm(G0) ** 2
    al = _span_coefficients(psi1, n1, n2, tol)
    be = _span_coefficients(psi2, n1, n2, tol)
    ga = _span_coefficients(phi1, a1, a2, tol)
    de = _span_coefficients(phi2, a1, a2, tol)
    psi_span = al is not None and be is not None
    phi_span = ga is not None and de is not None
    ax, nx = np.cross(a1, a2), np.cross(n1, n2)

    def verified(s1, s2):
        G = G0 + s1 * np.outer(phi1, psi1) - s2 * np.outer(phi2, psi2)
        return np.linalg.norm(cofactor(G)) <= max(tol.residual_tol * scale, 1e-13)

    def dispatch(num1, den1, num2, den2, sc, branch):
        z1 = abs(den1) <= tol.rank_tol * sc
        z2 = abs(den2) <= tol.rank_tol * sc
        if not z1 and not z2:
            s1, s2 = num1 / den1, num2 / den2
            if verified(s1, s2):
                return ShearSolution("unique", (s1, s2), note=branch)
            return ShearSolution("none", note=branch)
        if (z1 and abs(num1) > tol.rank_tol * sc) or \
                (z2 and abs(num2) > tol.rank_tol * sc):
            raise DegenerateDenominator(
                "branch %s denominator vanishes with nonzero numerator" % branch)
        # a vacuous equation leaves a line of candidate amounts
        fixed = None if z1 else num1 / den1
        other = None if z2 else num2 / den2
        return ShearSolution("family", (fixed, other),
                             note=branch + " degenerate line")

    hyp_a = psi_span and (
        abs(ax @ phi2) > tol.rank_tol * np.linalg.norm(ax) * np.linalg.norm(phi2)
        or abs(ax @ phi1) > tol.rank_tol * np.linalg.norm(ax) * np.linalg.norm(phi1))
    hyp_b = phi_span and (
        abs(nx @ psi2) > tol.rank_tol * np.linalg.norm(nx) * np.linalg.norm(psi2)
        or abs(nx @ psi1) > tol.rank_tol * np.linalg.norm(nx) * np.linalg.norm(psi1))

    if hyp_a:
        cr = np.cross(phi1, phi2)
        sc = np.linalg.norm(a1) * np.linalg.norm(phi1) * np.linalg.norm(phi2)
        return dispatch(ax @ phi2, (al[1] * a1 + al[0] * a2) @ cr,
                        ax @ phi1, (be[1] * a1 + be[0] * a2) @ cr, sc, "A")
    if hyp_b:
        cr = np.cross(psi1, psi2)
        sc = np.linalg.norm(n1) * np.linalg.norm(psi1) * np.linalg.norm(psi2)
        return dispatch(nx @ psi2, (ga[1] * n1 + ga[0] * n2) @ cr,
                        nx @ psi1, (de[1] * n1 + de[0] * n2) @ cr, sc, "B")
    if psi_span and phi_span:
        A = al[1] * ga[1] - al[0] * ga[0]
        B = -(be[1] * de[1] - be[0] * de[0])
        C = -(al[0] * be[1] - al[1] * be[0]) * (ga[0] * de[1] - ga[1] * de[0])
        if max(abs(A), abs(B), abs(C)) <= tol.rank_tol:
            return ShearSolution("none", note="C")
        return ShearSolution("family", coefficients=(A, B, C), note="C")
    raise NoBranch("no span condition holds for this slip pair")


def eta_xi(lam):
    """Closed-form shear amounts of the four base-plate junction cases."""
    if not 1.0 < lam < SQRT2:
        raise ValueError("eta_xi requires 1 < lam < sqrt(2)")
    den_e = 2.0 * (2 * lam ** 4 + 5 * SQRT2 * lam ** 3 - 4 * lam ** 2
                   + 3 * SQRT2 * lam + 2)
    e1 = (2 * lam ** 4 + 5 * SQRT2 * lam ** 3 + 4 * lam ** 2
          - 5 * SQRT2 * lam - 6) / den_e
    e2 = (2 * lam ** 4 + SQRT2 * lam ** 3 - 4 * lam ** 2
          - SQRT2 * lam + 2) / den_e
    den_x = 2.0 * (2 * lam ** 4 - 5 * SQRT2 * lam ** 3 - 4 * lam ** 2
                   - 3 * SQRT2 * lam + 2)
    x1 = -(2 * lam ** 4 - 5 * SQRT2 * lam ** 3 + 4 * lam ** 2
           + 5 * SQRT2 * lam - 6) / den_x
    x2 = (2 * lam ** 4 - SQRT2 * lam ** 3 - 4 * lam ** 2
          + SQRT2 * lam + 2) / den_x
    return e1, e2, x1, x2


def closed_form_cases(lam):
    """Junction data for the (1,+) base plate: partner, slip plane, and the
    two (direction1, direction2, shear pair) options per case."""
    e1, e2, x1, x2 = eta_xi(lam)
    A = np.array
    return {
        "a": {"partner": (3, "+"), "psi": A([-1.0, 1.0, 0.0]), "options": [
            (A([-1.0, -1.0, -1.0]), A([1.0, 1.0, -1.0]), (e1, e2)),
            (A([1.0, 1.0, -1.0]), A([-1.0, -1.0, -1.0]), (-e2, -e1))]},
        "b": {"partner": (4, "-"), "psi": A([1.0, 1.0, 0.0]), "options": [
            (A([-1.0, 1.0, 1.0]), A([-1.0, 1.0, -1.0]), (x1, x2)),
            (A([-1.0, 1.0, -1.0]), A([-1.0, 1.0, 1.0]), (-x2, -x1))]},
        "c": {"partner": (5, "+"), "psi": A([-1.0, 0.0, 1.0]), "options": [
            (A([-1.0, -1.0, -1.0]), A([1.0, -1.0, 1.0]), (e1, e2)),
            (A([1.0, -1.0, 1.0]), A([-1.0, -1.0, -1.0]), (-e2, -e1))]},
        "d": {"partner": (6, "-"), "psi": A([1.0, 0.0, 1.0]), "options": [
            (A([-1.0, 1.0, 1.0]), A([-1.0, -1.0, 1.0]), (x1, x2)),
            (A([-1.0, -1.0, 1.0]), A([-1.0, 1.0, 1.0]), (-x2, -x1))]},
    }


def junction_normal_closed_form(case, option, lam):
    """Polynomial junction-plane normal for the four cases, unnormalized.

    Option 1 returns the component vector directly; option 2 transports it
    through the inverse transposed shears of option 1, which maps the normal
    of one slip ordering onto the other.
    """
    if case not in "abcd" or len(case) != 1:
        raise ValueError("case must be one of a, b, c, d")
    if option not in (1, 2):
        raise ValueError("option must be 1 or 2")
    if not 1.0 < lam < SQRT2:
        raise ValueError("junction normals require 1 < lam < sqrt(2)")
    m1p = -2 * SQRT2 * lam ** 5 - 8 * lam ** 4 + 7 * SQRT2 * lam ** 3 \
        + 2 * lam ** 2 + 3 * SQRT2 * lam - 2
    m2p = 2 * lam ** 4 + 7 * SQRT2 * lam ** 3 - 16 * lam ** 2 + SQRT2 * lam + 6
    m3p = -2 * lam * (SQRT2 * lam ** 4 + 5 * lam ** 3 - 2 * SQRT2 * lam ** 2
                      + 3 * lam + SQRT2)
    m1m = -(2 * lam ** 4 - 7 * SQRT2 * lam ** 3 - 16 * lam ** 2 - SQRT2 * lam + 6)
    m2m = 2 * SQRT2 * lam ** 5 - 8 * lam ** 4 - 7 * SQRT2 * lam ** 3 \
        + 2 * lam ** 2 - 3 * SQRT2 * lam - 2
    m3m = 2 * lam * (SQRT2 * lam ** 4 - 5 * lam ** 3 - 2 * SQRT2 * lam ** 2
                     - 3 * lam + SQRT2)
    vec = {"a": (m1p, m2p, m3p), "b": (m1m, m2m, m3m),
           "c": (m1p, m3p, m2p), "d": (m1m, m3m, m2m)}[case]
    v = np.array(vec)
    if option == 1:
        return v
    data = closed_form_cases(lam)[case]
    psi = data["psi"]
    phi1, phi2, (t1, t2) = data["options"][0]
    back1 = EYE3 - t1 * np.outer(psi, phi1)
    back2 = EYE3 - t2 * np.outer(psi, phi2)
    return back2 @ (back1 @ v)


def _rigidity_certificate(P1, P2, n1, n2, t1, phi1, psi1, phi2, psi2, m, tol):
    """Cheap transversality test: nonzero means the junction is isolated."""
    mh = unit(np.cross(n1, n2))
    if abs(mh @ m) > 100.0 * tol.rank_tol:
        return None
    if abs(mh @ psi1) > tol.rank_tol * np.linalg.norm(psi1):
        return None
    if abs(mh @ psi2) > tol.rank_tol * np.linalg.norm(psi2):
        return None
    v = np.cross(m, mh)
    u = P1 @ mh
    w = P1 @ (v + t1 * phi1 * (psi1 @ v))
    cr1 = np.cross(u, w)
    cr2 = np.cross(P1 @ phi1, P2 @ phi2)
    den = np.linalg.norm(cr1) * np.linalg.norm(cr2)
    if den == 0.0:
        return 0.0
    return (cr1 @ cr2) / den


def _first_nonzero_positive_vec(v):
    for c in v:
        if abs(c) > 1e-14:
            return -v if c < 0 else v
    return v


def find_plastic_junctions(lam, d, base, partners, slips,
                           tol=DEFAULT_TOLERANCES):
    """Scan ordered slip pairs for rigid junctions of the base plate.

    For every partner plate and ordered pair from the slip catalog, the pair
    is first screened by the necessary triple-product conditions, then the
    shear amounts are solved through the post-multiplied reformulation
    (valid when each slip direction is orthogonal to the other slip plane).
    Unique nonzero solutions whose assembled difference is rank one and
    which pass the rigidity certificate are returned, in deterministic
    partner-then-slip order.
    """
    if not 1.0 < lam < SQRT2:
        raise ValueError("junction scans require 1 < lam < sqrt(2)")
    if not 0.0 < d < 1.0:
        raise ValueError("junction scans require 0 < d < 1")
    a1, n1 = base.a, base.n
    P1 = base.gradient
    dirs = np.array([s.direction for s in slips])
    planes = np.array([s.plane_normal for s in slips])
    dir_norms = np.linalg.norm(dirs, axis=1)
    plane_norms = np.linalg.norm(planes, axis=1)
    # the reformulation needs each direction orthogonal to the other plane
    cross_dots = dirs @ planes.T
    gate = (cross_dots == 0.0) & (cross_dots.T == 0.0)
    ph1_all = dirs @ P1.T

    junctions = []
    for partner in partners:
        a2, n2 = partner.a, partner.n
        P2 = partner.gradient
        ax, nx = np.cross(a1, a2), np.cross(n1, n2)
        sa, sn = np.linalg.norm(ax), np.linalg.norm(nx)
        ph2_all = dirs @ P2.T
        c_phi1 = np.abs(ph1_all @ ax) <= \
            tol.rank_tol * sa * np.linalg.norm(ph1_all, axis=1)
        c_phi2 = np.abs(ph2_all @ ax) <= \
            tol.rank_tol * sa * np.linalg.norm(ph2_all, axis=1)
        c_psi = np.abs(planes @ nx) <= tol.rank_tol * sn * plane_norms
        needed = ((c_phi1[:, None] & c_phi2[None, :])
                  | (c_phi1 & c_psi)[:, None]
                  | (c_phi2 & c_psi)[None, :]
                  | (c_psi[:, None] & c_psi[None, :]))
        for i, j in zip(*np.nonzero(needed & gate)):
            phi1, psi1 = dirs[i], planes[i]
            phi2, psi2 = dirs[j], planes[j]
            try:
                sol = solve_shear_amounts(a1, a2, ph1_all[j], ph2_all[i],
                                          n1, n2, psi2, psi1, tol)
            except (DegenerateDenominator, NoBranch):
                continue
            if sol.kind != "unique":
                continue
            s1, s2 = sol.values
            t1, t2 = -s2, -s1
            if abs(t1) <= tol.rank_tol or abs(t2) <= tol.rank_tol:
                continue
            G = P1 @ (EYE3 + t1 * np.outer(phi1, psi1)) \
                - P2 @ (EYE3 + t2 * np.outer(phi2, psi2))
            sv = np.linalg.svd(G, compute_uv=False)
            if sv[0] < 1e-12 or sv[1] > tol.rank_tol * sv[0]:
                continue
            m = _first_nonzero_positive_vec(np.linalg.svd(G)[2][0])
            b = G @ m
            residual = np.linalg.norm(G - np.outer(b, m)) / sv[0]
            fn = _rigidity_certificate(P1, P2, n1, n2, t1, phi1, psi1,
                                       phi2, psi2, m, tol)
            if fn is None or abs(fn) <= tol.rigidity_tol:
                continue
            junctions.append(PlasticJunction(
                base, partner, slips[i], slips[j], float(t1), float(t2),
                b, m, float(residual), lam, d))
    return junctions


def scan_junctions(lam, d=None, base_key=(1, "+"), partner_keys=None,
                   tol=DEFAULT_TOLERANCES):
    """Convenience scan of one base plate against partner plates."""
    if d is None:
        d = 1.0 / lam
    plates = habit_plate_map(lam, d)
    base = plates[base_key]
    if partner_keys is None:
        partner_keys = [k for k in sorted(plates) if k != base_key]
    partners = [plates[k] for k in partner_keys]
    return find_plastic_junctions(lam, d, base, partners,
                                  bcc_slip_systems(), tol)


def case_junction(case, option, lam, tol=DEFAULT_TOLERANCES):
    """Assemble the closed-form junction of one case and option at d = 1/lam."""
    data = closed_form_cases(lam)[case]
    plates = habit_plate_map(lam, 1.0 / lam)
    base = plates[(1, "+")]
    partner = plates[data["partner"]]
    psi = data["psi"]
    phi1, phi2, (t1, t2) = data["options"][option - 1]
    slip1 = SlipSystem(phi1, psi, 110)
    slip2 = SlipSystem(phi2, psi, 110)
    G = base.gradient @ (EYE3 + t1 * np.outer(phi1, psi)) \
        - partner.gradient @ (EYE3 + t2 * np.outer(phi2, psi))
    sv = np.linalg.svd(G, compute_uv=False)
    m = _first_nonzero_positive_vec(np.linalg.svd(G)[2][0])
    b = G @ m
    residual = np.linalg.norm(G - np.outer(b, m)) / sv[0]
    return PlasticJunction(base, partner, slip1, slip2, float(t1), float(t2),
                           b, m, float(residual), lam, 1.0 / lam)


def _linear_theta_solve(P1, P2, phi1, psi1, phi2, psi2, v, R):
    """Shear amounts annihilating the rotated junction map on direction v."""
    c0 = R @ (P1 @ v) - P2 @ v
    cols = np.column_stack([(psi1 @ v) * (R @ (P1 @ phi1)),
                            -(psi2 @ v) * (P2 @ phi2)])
    sol, *_ = np.linalg.lstsq(cols, -c0, rcond=None)
    return sol


def _family_probe(P1, P2, phi1, psi1, phi2, psi2, m, mh, tol,
                  thetas=(-0.2, -0.05, 0.05, 0.2)):
    """Look for nearby rotated solutions; returns samples or None."""
    v = unit(np.cross(m, mh))
    found = {"axis": mh.copy(), "theta": [], "t1": [], "t2": []}
    for th in thetas:
        R = rotation_axis_angle(mh, th)
        t1, t2 = _linear_theta_solve(P1, P2, phi1, psi1, phi2, psi2, v, R)
        G = R @ P1 @ (EYE3 + t1 * np.outer(phi1, psi1)) \
            - P2 @ (EYE3 + t2 * np.outer(phi2, psi2))
        sv = np.linalg.svd(G, compute_uv=False)
        if sv[0] > 1e-12 and sv[1] <= 1e-9 * sv[0]:
            found["theta"].append(float(th))
            found["t1"].append(float(t1))
            found["t2"].append(float(t2))
    if len(found["theta"]) >= 2:
        return found
    return None


def local_rigidity(j, tol=DEFAULT_TOLERANCES):
    """Certify that no nearby rotation or shear change preserves the junction.

    Evaluates the transversality triple product together with the analytic
    Jacobian of the constraint map in (rotation angle, shear 1, shear 2),
    cross-checked against central finite differences. Both indicators must
    agree; when they vanish a numerical probe looks for the solution family.
    """
    P1, P2 = j.plate1.gradient, j.plate2.gradient
    n1, n2 = j.plate1.n, j.plate2.n
    phi1, psi1 = j.slip1.direction, j.slip1.plane_normal
    phi2, psi2 = j.slip2.direction, j.slip2.plane_normal
    m, t1, t2 = j.m, j.t1, j.t2

    C = cofactor(P1 - P2)
    csv = np.linalg.svd(C, compute_uv=False)
    mh = unit(np.cross(n1, n2))
    hyp_ok = (csv[0] > 0.0 and csv[1] <= tol.rank_tol * csv[0]
              and abs(mh @ m) <= 100.0 * tol.rank_tol
              and abs(mh @ psi1) <= tol.rank_tol * np.linalg.norm(psi1)
              and abs(mh @ psi2) <= tol.rank_tol * np.linalg.norm(psi2)
              and np.linalg.norm(np.cross(psi1, m)) > tol.rank_tol
              and np.linalg.norm(np.cross(psi2, m)) > tol.rank_tol)
    if not hyp_ok:
        family = _family_probe(P1, P2, phi1, psi1, phi2, psi2, m, mh, tol)
        if family is not None:
            return RigidityReport(False, 0.0, 0.0, None, 0.0, family)
        raise HypothesisFailed(
            "rigidity hypotheses fail and no solution family was found")

    v = np.cross(m, mh)
    u = P1 @ mh
    w = P1 @ (v + t1 * phi1 * (psi1 @ v))
    p, q = P1 @ phi1, P2 @ phi2
    cr_uw, cr_pq = np.cross(u, w), np.cross(p, q)
    f_value = cr_uw @ cr_pq
    den = np.linalg.norm(cr_uw) * np.linalg.norm(cr_pq)
    f_norm = f_value / den if den > 0.0 else 0.0

    u_unit = unit(u)
    col_th = np.cross(u_unit, w)
    col_t1 = (psi1 @ v) * p
    col_t2 = -(psi2 @ v) * q
    J = np.column_stack([col_th, col_t1, col_t2])

    def gmap(th, s1, s2):
        R = rotation_axis_angle(u_unit, th)
        return R @ (P1 @ (v + s1 * phi1 * (psi1 @ v))) \
            - P2 @ (v + s2 * phi2 * (psi2 @ v))

    h = 1e-6
    J_fd = np.column_stack([
        (gmap(h, t1, t2) - gmap(-h, t1, t2)) / (2 * h),
        (gmap(0.0, t1 + h, t2) - gmap(0.0, t1 - h, t2)) / (2 * h),
        (gmap(0.0, t1, t2 + h) - gmap(0.0, t1, t2 - h)) / (2 * h)])
    rel = np.linalg.norm(J - J_fd) / max(np.linalg.norm(J), 1e-300)
    if rel > 1e-6:
        raise ArithmeticError(
            "analytic and finite-difference Jacobians disagree (%.2e)" % rel)

    det_j = np.linalg.det(J)
    col_scale = np.prod([np.linalg.norm(c) for c in (col_th, col_t1, col_t2)])
    det_norm = det_j / col_scale if col_scale > 0.0 else 0.0
    rigid_f = bool(abs(f_norm) > tol.rigidity_tol)
    rigid_det = bool(abs(det_norm) > tol.rigidity_tol)
    if rigid_f != rigid_det:
        raise ArithmeticError("rigidity indicators disagree "
                              "(f %.3e, det %.3e)" % (f_norm, det_norm))
    family = None
    if not rigid_f:
        family = _family_probe(P1, P2, phi1, psi1, phi2, psi2, m, mh, tol)
    return RigidityReport(rigid_f, float(f_value), float(f_norm), J,
                          abs(float(det_j)), family)


def _cubic_real_roots(c3, c2, c1, c0):
    """Real roots of batches of cubics with positive leading coefficient.

    Returns an array of shape (..., 3) padded with nan, computed by the
    trigonometric and single-real-root closed forms plus two Newton steps.
    """
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    roots = np.full(b.shape + (3,), np.nan)
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    single = disc > 0.0
    if np.any(single):
        sq = np.sqrt(disc[single])
        roots[single, 0] = (np.cbrt(-q[single] / 2.0 + sq)
                            + np.cbrt(-q[single] / 2.0 - sq) + shift[single])
    triple = ~single
    if np.any(triple):
        r0 = np.sqrt(np.maximum(-p[triple] / 3.0, 0.0))
        safe_r = np.where(r0 > 0.0, r0, 1.0)
        ang = np.arccos(np.clip(-q[triple] / (2.0 * safe_r ** 3), -1.0, 1.0)) / 3.0
        ang = np.where(r0 > 0.0, ang, 0.0)
        for k in range(3):
            roots[triple, k] = (2.0 * r0 * np.cos(ang - 2.0 * np.pi * k / 3.0)
                                + shift[triple])
    for _ in range(2):
        fx = ((c3[..., None] * roots + c2[..., None]) * roots
              + c1[..., None]) * roots + c0[..., None]
        dfx = (3.0 * c3[..., None] * roots + 2.0 * c2[..., None]) * roots \
            + c1[..., None]
        with np.errstate(invalid="ignore", divide="ignore"):
            roots = roots - np.where(np.abs(dfx) > 1e-300, fx / dfx, 0.0)
    return roots


def _canonical_slip_key(direction, plane_normal):
    def norm_sign(v):
        t = tuple(int(round(x)) for x in v)
        for c in t:
            if c != 0:
                return t if c > 0 else tuple(-x for x in t)
        return t
    return norm_sign(direction), norm_sign(plane_normal)


def separation_margin(F, own_variant, own_slip, lam, d=None,
                      tol=DEFAULT_TOLERANCES):
    """Distance from F to every competing sheared well, minimized in closed form.

    For each variant and slip system the squared Frobenius distance between
    the Gram matrix of F and the sheared well is a quartic in the shear
    amount; its derivative cubic is solved exactly and the global minimum
    taken over all real critical points. The junction's own (variant, slip)
    pair is excluded; unsheared wells of the other variants are included.
    """
    if d is None:
        d = 1.0 / lam
    F = np.asarray(F, dtype=float)
    FtF = F.T @ F
    slips = bcc_slip_systems()
    dirs = np.array([s.direction for s in slips])
    planes = np.array([s.plane_normal for s in slips])
    psi_sq = np.einsum("ki,ki->k", planes, planes)
    own_key = None
    if own_slip is not None:
        own_key = _canonical_slip_key(own_slip.direction, own_slip.plane_normal)
    catalog_keys = [_canonical_slip_key(s.direction, s.plane_normal)
                    for s in slips]

    best = (np.inf, (None, None, None))
    for var in variants(lam, d):
        U2 = var.U @ var.U
        D = FtF - U2
        u = dirs @ U2
        du = np.einsum("ki,ij,kj->k", planes, D, u)
        dpsi = np.einsum("ki,ij,kj->k", planes, D, planes)
        uu = np.einsum("ki,ki->k", u, u)
        pu = np.einsum("ki,ki->k", planes, u)
        phiu = np.einsum("ki,ki->k", dirs, u)
        dd = float(np.sum(D * D))
        c0 = np.full(len(slips), dd)
        c1 = -4.0 * du
        c2 = 2.0 * (psi_sq * uu + pu ** 2) - 2.0 * phiu * dpsi
        c3 = 4.0 * phiu * pu * psi_sq
        c4 = phiu ** 2 * psi_sq ** 2
        roots = _cubic_real_roots(4.0 * c4, 3.0 * c3, 2.0 * c2, c1)
        g = (((c4[:, None] * roots + c3[:, None]) * roots + c2[:, None])
             * roots + c1[:, None]) * roots + c0[:, None]
        g = np.where(np.isnan(g), np.inf, g)
        if var.index == own_variant and own_key is not None:
            for k, key in enumerate(catalog_keys):
                if key == own_key:
                    g[k, :] = np.inf
        k_flat = int(np.argmin(g))
        ki, kr = divmod(k_flat, 3)
        if g[ki, kr] < best[0]:
            best = (float(g[ki, kr]), (var.index, ki, float(roots[ki, kr])))
        if var.index != own_variant and dd < best[0]:
            best = (dd, (var.index, None, 0.0))
    return SeparationReport(float(np.sqrt(max(best[0], 0.0))), best[1])


def build_vii_wedges(j, n1, n2, tol=DEFAULT_TOLERANCES):
    """Arrange the five junction gradients in angular order around the axis.

    Starting from the austenite interface of plate 1, the interfaces normal
    to psi1, the junction normal m, psi2 and finally n2 must appear at
    strictly increasing angles when sweeping around the common axis through
    the region outside the austenite wedge. Raises OrderingFailed when no
    sign assignment of the interface half-planes achieves this, and
    OrthogonalityFailed when the five normals do not share an axis.
    """
    P1, P2 = j.plate1.gradient, j.plate2.gradient
    F1b, F2b = j.sheared_gradient(1), j.sheared_gradient(2)
    psi1, psi2 = j.slip1.plane_normal, j.slip2.plane_normal
    m = j.m
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    for P in (P1, P2):
        if not rank_le_one(P - EYE3, tol):
            raise OrthogonalityFailed(
                "each plate must be rank-one connected to the identity")
    raw_axis = np.cross(n1, n2)
    if np.linalg.norm(raw_axis) <= tol.rank_tol * max(
            np.linalg.norm(n1) * np.linalg.norm(n2), 1.0):
        raise OrthogonalityFailed("plate normals are parallel")
    mh = unit(raw_axis)
    for name, vec in (("n1", n1), ("n2", n2), ("psi1", psi1),
                      ("psi2", psi2), ("m", m)):
        if abs(vec @ mh) > 100.0 * tol.rank_tol * max(np.linalg.norm(vec), 1.0):
            raise OrthogonalityFailed(
                "%s is not perpendicular to the junction axis" % name)
    n1u, n2u = unit(n1), unit(n2)
    g1 = np.cross(mh, n1u)
    if g1 @ n2u < 0.0:
        mh = -mh
        g1 = -g1
    g2 = np.cross(mh, n2u)
    if g2 @ n1u < 0.0:
        g2 = -g2

    def sweep_angle(target):
        ang = np.arctan2(np.cross(g1, target) @ mh, g1 @ target)
        return ang + 2.0 * np.pi if ang <= 0.0 else ang

    theta_n2 = sweep_angle(g2)
    # the sweep from plate-1 face to plate-2 face must pass outside the wedge
    for frac in (0.25, 0.5, 0.75):
        probe = rotation_axis_angle(mh, frac * theta_n2) @ g1
        if min(probe @ n1u, probe @ n2u) >= -tol.rank_tol:
            raise OrderingFailed("sweep leaves the region outside the wedge")

    def half_plane_angles(normal):
        h = np.cross(mh, unit(normal))
        first = sweep_angle(h)
        second = first + np.pi
        if second >= 2.0 * np.pi:
            second -= 2.0 * np.pi
        return (first, second)

    options = [half_plane_angles(w) for w in (psi1, m, psi2)]
    chosen = None
    for tp1 in options[0]:
        for tm in options[1]:
            for tp2 in options[2]:
                if 0.0 < tp1 < tm < tp2 < theta_n2:
                    chosen = (tp1, tm, tp2)
                    break
            if chosen:
                break
        if chosen:
            break
    if chosen is None:
        raise OrderingFailed(
            "interface half-planes do not order inside the sweep")
    theta_psi1, theta_m, theta_psi2 = chosen

    interfaces = ((EYE3, P1, n1u), (P1, F1b, psi1), (F1b, F2b, m),
                  (F2b, P2, psi2), (P2, EYE3, n2u))
    for left, right, normal in interfaces:
        jump = right - left
        nn = unit(normal)
        scale = np.linalg.norm(jump)
        if scale == 0.0:
            continue
        off_plane = np.linalg.norm(jump - np.outer(jump @ nn, nn))
        if not rank_le_one(jump, tol) or off_plane > 1e-7 * scale:
            raise OrderingFailed("jump across an interface is not rank one "
                                 "with the required normal")
    regions = {"austenite": EYE3.copy(), "plate1": P1, "sheared1": F1b,
               "sheared2": F2b, "plate2": P2}
    return WedgeGeometry(mh, float(theta_psi1), float(theta_m),
                         float(theta_psi2), float(theta_n2), regions)


def stability_check(j, n1, n2, tol=DEFAULT_TOLERANCES):
    """Sufficient conditions for local stability of a junction.

    Checks rigidity, strictly positive separation margins for both sheared
    gradients, transversality of each slip against the junction normal, and
    realizability of the wedge geometry for some orientation of the given
    plate normals. A failed clause is recorded; the check never claims
    instability beyond listing which sufficient conditions did not verify.
    """
    reasons = []
    try:
        rep = local_rigidity(j, tol)
        if not rep.rigid:
            reasons.append("rigidity certificate vanishes")
    except HypothesisFailed as exc:
        reasons.append("rigidity hypotheses fail: %s" % exc)
    floor = np.sqrt(tol.residual_tol)
    for side, plate, slip in ((1, j.plate1, j.slip1), (2, j.plate2, j.slip2)):
        rep = separation_margin(j.sheared_gradient(side), plate.variant,
                                slip, j.lam, j.d, tol)
        if rep.margin <= floor:
            reasons.append("separation margin vanishes on side %d" % side)
    us = variants(j.lam, j.d)
    for side, plate, slip in ((1, j.plate1, j.slip1), (2, j.plate2, j.slip2)):
        U2 = us[plate.variant - 1].U @ us[plate.variant - 1].U
        val = np.cross(U2 @ slip.direction, slip.plane_normal) @ j.m
        scale = max(np.linalg.norm(U2 @ slip.direction)
                    * np.linalg.norm(slip.plane_normal), 1.0)
        if abs(val) <= tol.rank_tol * scale:
            reasons.append("slip transversality fails on side %d" % side)
    wedge_ok = False
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            try:
                build_vii_wedges(j, s1 * n1, s2 * n2, tol)
                wedge_ok = True
                break
            except (OrderingFailed, OrthogonalityFailed):
                continue
        if wedge_ok:
            break
    if not wedge_ok:
        reasons.append("wedge geometry is not realizable for these normals")
    return StabilityResult(not reasons, reasons)


def dislocation_density_norm(j):
    """Frobenius norm of the row-wise cross product of the plastic jump
    with the junction normal; the surface density left on the interface."""
    fp = j.t1 * np.outer(j.slip1.direction, j.slip1.plane_normal) \
        - j.t2 * np.outer(j.slip2.direction, j.slip2.plane_normal)
    return float(np.linalg.norm(np.cross(fp, j.m[None, :])))


def nonrigid_family_check(lam, case, tol=DEFAULT_TOLERANCES):
    """Verify the solution structure of the (1,+)/(1,-) slip pairings.

    Same-slip pairings (I,I) and (II,II) admit a line of shear pairs with a
    fixed offset; the mixed pairing (I,II) admits a bilinear curve; the
    pairing (III,IV) has an isolated shear pair that extends to a rotation
    family. Returns sampled residual diagnostics for the claimed structure.
    """
    if not 1.0 < lam < SQRT2:
        raise ValueError("family checks require 1 < lam < sqrt(2)")
    case = tuple(case)
    if len(case) != 2 or any(label not in LABELLED_SLIPS for label in case):
        raise ValueError("case must pair two of the labels I, II, III, IV")
    plates = habit_plate_map(lam, 1.0 / lam)
    base, partner = plates[(1, "+")], plates[(1, "-")]
    a1, n1, a2, n2 = base.a, base.n, partner.a, partner.n
    P1, P2 = base.gradient, partner.gradient
    phi1, psi1 = LABELLED_SLIPS[case[0]]
    phi2, psi2 = LABELLED_SLIPS[case[1]]

    if case in (("I", "I"), ("II", "II")):
        offset = lam * (lam ** 2 - 1.0) / (SQRT2 * (2.0 * lam ** 4 + 1.0))
        if case == ("II", "II"):
            offset = -offset
        sol = solve_shear_amounts(a1, a2, P1 @ phi2, P2 @ phi1,
                                  n1, n2, psi2, psi1, tol)
        samples = []
        max_resid = 0.0
        max_m_dev = 0.0
        for s2 in (-0.15, -0.05, 0.0, 0.08, 0.2):
            s1 = s2 + offset
            t1, t2 = -s2, -s1
            G = P1 @ (EYE3 + t1 * np.outer(phi1, psi1)) \
                - P2 @ (EYE3 + t2 * np.outer(phi2, psi2))
            sv = np.linalg.svd(G, compute_uv=False)
            max_resid = max(max_resid, sv[1] / sv[0])
            m = np.linalg.svd(G)[2][0]
            den = 4.0 * lam ** 4 * (2.0 * t2 + 1.0) + 4.0 * t2
            if case == ("I", "I"):
                x = 2.0 - 4.0 * (2.0 * lam ** 4 + 1.0) / (
                    den + SQRT2 * lam ** 3 - SQRT2 * lam)
            else:
                x = 4.0 * (2.0 * lam ** 4 + 1.0) / (
                    den - SQRT2 * lam ** 3 + SQRT2 * lam) - 2.0
            model = np.array([x, 1.0, 1.0])
            dev = np.linalg.norm(np.cross(m, model / np.linalg.norm(model)))
            max_m_dev = max(max_m_dev, dev)
            samples.append({"t1": float(t1), "t2": float(t2)})
        return {"kind": "line", "offset": float(offset),
                "coefficients": sol.coefficients, "samples": samples,
                "max_residual": float(max_resid),
                "max_normal_deviation": float(max_m_dev)}

    if case in (("I", "II"), ("II", "I")):
        sol = solve_shear_amounts(a1, a2, P1 @ phi1, P2 @ phi2,
                                  n1, n2, psi1, psi2, tol)
        if sol.kind != "family" or sol.coefficients is None:
            return {"kind": sol.kind, "samples": [], "max_residual": np.inf}
        A, B, C = sol.coefficients
        samples = []
        max_resid = 0.0
        for t1 in (-0.1, -0.04, 0.02, 0.07, 0.12):
            den = B + C * t1
            if abs(den) < 1e-12:
                continue
            t2 = (1.0 - A * t1) / den
            G = P1 @ (EYE3 + t1 * np.outer(phi1, psi1)) \
                - P2 @ (EYE3 + t2 * np.outer(phi2, psi2))
            sv = np.linalg.svd(G, compute_uv=False)
            max_resid = max(max_resid, sv[1] / sv[0])
            samples.append({"t1": float(t1), "t2": float(t2)})
        return {"kind": "curve", "coefficients": (float(A), float(B), float(C)),
                "samples": samples, "max_residual": float(max_resid)}

    if case == ("III", "IV"):
        sol = solve_shear_amounts(a1, a2, P1 @ phi2, P2 @ phi1,
                                  n1, n2, psi2, psi1, tol)
        if sol.kind != "unique":
            return {"kind": sol.kind, "samples": [], "max_residual": np.inf}
        s1, s2 = sol.values
        t1, t2 = -s2, -s1
        mh = unit(np.cross(n1, n2))
        v = unit(np.cross(np.array([1.0, 0.0, 0.0]), mh))
        samples = []
        max_resid = 0.0
        max_formula_dev = 0.0
        for th in (-0.7, -0.3, 0.05, 0.25, 0.6):
            R = rotation_axis_angle(-mh, th)
            tt1, tt2 = _linear_theta_solve(P1, P2, phi1, psi1, phi2, psi2, v, R)
            G = R @ P1 @ (EYE3 + tt1 * np.outer(phi1, psi1)) \
                - P2 @ (EYE3 + tt2 * np.outer(phi2, psi2))
            sv = np.linalg.svd(G, compute_uv=False)
            max_resid = max(max_resid, sv[1] / sv[0])
            half = th / 2.0
            model = lam ** 2 * ((lam ** 2 - 1.0) * np.cos(half)
                                - 2.0 * lam * np.sin(half)) / (
                SQRT2 * ((lam ** 2 - 1.0) * np.sin(half)
                         + 2.0 * lam * np.cos(half)))
            max_formula_dev = max(max_formula_dev, abs(tt2 - model),
                                  abs(tt1 + tt2))
            samples.append({"theta": float(th), "t1": float(tt1),
                            "t2": float(tt2)})
        return {"kind": "point+rotations", "t": (float(t1), float(t2)),
                "shear": lam * (lam ** 2 - 1.0) / (2.0 * SQRT2),
                "samples": samples, "max_residual": float(max_resid),
                "max_formula_deviation": float(max_formula_dev)}

    raise ValueError("unknown slip pairing %r" % (case,))
