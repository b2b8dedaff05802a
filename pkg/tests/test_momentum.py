from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from poisson_forge.algebra import TwoCocycle, abelian, so3
from poisson_forge.cotangent import cayley
from poisson_forge.errors import NonConstantDefect
from poisson_forge.groups import so2_rep, so3_rep
from poisson_forge.loops import GaugeLoop, GaugedLoop, TrigLoop, holonomy
from poisson_forge.momentum import (ComomentumMap, MomentumMap, check_equivariance, check_lie_hom,
                                    compose_group_momentum, lift_obstruction, pullback_residual)
from poisson_forge.poisson import PoissonStructure
from poisson_forge.polynomial import Polynomial, random_polynomial


def _translation(with_omega: bool):
    P = PoissonStructure.constant([[0, 1], [-1, 0]])
    omega = TwoCocycle(P.lam) if with_omega else None
    return ComomentumMap(abelian(2), Polynomial.variables(2), omega), P


def _rotated_identity():
    """phi(X) = H_{R^T X} for an exact rational rotation R: an automorphism, hence a homomorphism."""
    g = so3()
    R = cayley([[0, Fraction(1, 2), 0], [Fraction(-1, 2), 0, Fraction(1, 3)], [0, Fraction(-1, 3), 0]])
    x = Polynomial.variables(3)
    phi = [sum((x[a] * R[a][i] for a in range(3)), Polynomial.zero(3)) for i in range(3)]
    return ComomentumMap(g, phi), PoissonStructure.linear(g)


def momentum_library():
    """(label, comomentum map, source structure, expected verdict)."""
    g = so3()
    kks = PoissonStructure.linear(g)
    x = Polynomial.variables(3)
    y = Polynomial.variables(2)
    return [
        ("coadjoint identity", ComomentumMap(g, x), kks, True),
        ("rotated identity", *_rotated_identity(), True),
        ("translation with cocycle", *_translation(True), True),
        ("abelian, zero bracket", ComomentumMap(abelian(2), [y[0] + 2 * y[1], 3 * y[1]]),
         PoissonStructure.linear(abelian(2)), True),
        ("twice identity", ComomentumMap(g, [2 * v for v in x]), kks, False),
        ("translation without cocycle", *_translation(False), False),
        ("anisotropic scaling", ComomentumMap(g, [x[0], x[1], 2 * x[2]]), kks, False),
        ("projection", ComomentumMap(g, [x[0], x[1], Polynomial.zero(3)]), kks, False),
    ]


LIBRARY = momentum_library()


@pytest.mark.parametrize("label,cm,P,expected", LIBRARY, ids=[c[0] for c in LIBRARY])
def test_hom_and_equivariance_agree(label, cm, P, expected):
    hom = check_lie_hom(cm, P)
    eq = check_equivariance(cm.momentum_map(), cm, P)
    assert hom.ok == expected
    assert eq.ok == expected


@pytest.mark.parametrize("label,cm,P,expected", [c for c in LIBRARY if c[3]], ids=[c[0] for c in LIBRARY if c[3]])
def test_pullback_property(label, cm, P, expected, rng):
    mm = cm.momentum_map()
    target = cm.target()
    for _ in range(5):
        F, G = (random_polynomial(rng, cm.algebra.dim, max_degree=3) for _ in range(2))
        assert pullback_residual(mm, F, G, P, target).is_zero()


def test_failing_map_breaks_pullback():
    g = so3()
    cm = ComomentumMap(g, [2 * v for v in Polynomial.variables(3)])
    x = Polynomial.variables(3)
    assert not pullback_residual(cm.momentum_map(), x[0], x[1], PoissonStructure.linear(g), cm.target()).is_zero()


def test_momentum_map_consistency():
    cm, _ = _rotated_identity()
    mm = cm.momentum_map()
    assert mm.consistency_residual(cm, [(1, 2, 3), (Fraction(1, 2), 0, -4)]) == 0


def test_report_json():
    cm, P = _translation(False)
    data = check_lie_hom(cm, P).to_json()
    assert data["status"] == "fail" and data["residuals"]


class TestLiftObstruction:
    def test_translation_has_no_lift(self):
        P = PoissonStructure.constant([[0, 1], [-1, 0]])
        ob = lift_obstruction(Polynomial.variables(2), P, abelian(2))
        assert ob.cocycle.matrix[0][1] == 1
        assert not ob.lift_exists

    def test_coadjoint_zero_class(self, kks, x3, g3):
        ob = lift_obstruction(x3, kks, g3)
        assert all(v == 0 for row in ob.cocycle.matrix for v in row)
        assert ob.lift_exists

    def test_shift_by_constants(self, kks, x3, g3):
        lam = (Fraction(1), Fraction(-2), Fraction(1, 3))
        ob = lift_obstruction([x + c for x, c in zip(x3, lam)], kks, g3)
        # c(X, Y) = -lam([X, Y])
        for i in range(3):
            for j in range(3):
                assert ob.cocycle.matrix[i][j] == -sum(a * b for a, b in zip(lam, g3.basis_bracket(i, j)))
        assert ob.lift_exists and ob.coboundary == tuple(-v for v in lam)

    def test_verdict_invariant_under_constants(self):
        P = PoissonStructure.constant([[0, 1], [-1, 0]])
        y = Polynomial.variables(2)
        for shift in (0, 3, Fraction(-5, 2)):
            assert not lift_obstruction([y[0] + shift, y[1] - shift], P, abelian(2)).lift_exists

    def test_non_constant_defect(self, kks, x3, g3):
        with pytest.raises(NonConstantDefect):
            lift_obstruction([x3[0] ** 2, x3[1], x3[2]], kks, g3)


class TestGroupMomentum:
    def test_zero_loop_gives_identity(self):
        rep = so3_rep()
        mu = compose_group_momentum(lambda m: TrigLoop.zero(rep.algebra), rep)
        assert np.allclose(mu((1, 2, 3)), np.eye(3), atol=1e-14)

    def test_constant_loop_gives_exp(self):
        rep = so2_rep()
        mu = compose_group_momentum(lambda m: TrigLoop.constant(rep.algebra, [float(m[0])]), rep)
        for c in (0.5, -1.25, 2.0):
            assert np.max(np.abs(mu((c,)) - scipy.linalg.expm(c * rep.generators[0]))) < 1e-10

    def test_equivariance_spot_check(self, rng):
        rep = so3_rep()
        xi = TrigLoop.random(rng, rep.algebra, 2, 0.3)
        gl = GaugeLoop.from_generator(rep, TrigLoop.random(rng, rep.algebra, 2, 0.3, based=True), based=True)
        mu = compose_group_momentum(lambda m: xi, rep)
        gauged = compose_group_momentum(lambda m: GaugedLoop(xi, gl), rep)
        assert np.linalg.norm(gauged(()) - gl(0.0) @ mu(()) @ np.linalg.inv(gl(1.0))) < 1e-8
