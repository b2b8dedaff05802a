import math

import numpy as np
import pytest
import scipy.linalg

from poisson_forge.algebra import abelian, so3
from poisson_forge.errors import DimensionMismatch, FiberMismatch, NonPeriodic
from poisson_forge.groups import so2_rep, so3_rep, su2_rep
from poisson_forge.loops import (CoarseStepWarning, GaugedLoop, GaugeLoop, SampledLoop, TrigLoop,
                                 affine_flat_bracket, affine_ham_field, fiber_recover, gauge_transform, holonomy,
                                 holonomy_equivariance_residual, holonomy_path, loop_bracket, loop_D, loop_kappa,
                                 spectral_derivative, write_holonomy_csv)

G = so3()
PI = math.pi


def mode(i, n, kind="cos", scale=1.0):
    return TrigLoop.mode(G, i, n, kind, scale)


def rotation_loop(rep, turns=1.0):
    J = rep.generators[0]
    return GaugeLoop.from_path(rep, lambda t: scipy.linalg.expm(2 * PI * turns * np.asarray(t)[..., None, None] * J))


class TestTrigLoop:
    def test_evaluation(self):
        xi = TrigLoop(G, [1, 0, 0], cos=[[0, 2, 0]], sin=[[0, 0, 3]])
        assert np.allclose(xi(0.25), [1, 0, 3])
        assert xi(np.zeros((4, 2))).shape == (4, 2, 3)

    def test_json_roundtrip(self, rng):
        xi = TrigLoop.random(rng, G, 3)
        back = TrigLoop.from_json(G, xi.to_json())
        assert np.array_equal(back.coefficients(), xi.coefficients())

    def test_based(self, rng):
        assert np.max(np.abs(TrigLoop.random(rng, G, 3, based=True)(0.0))) < 1e-14

    def test_shape_errors(self):
        with pytest.raises(DimensionMismatch):
            TrigLoop(G, [1, 2])
        with pytest.raises(DimensionMismatch):
            loop_bracket(TrigLoop.zero(G), TrigLoop.zero(abelian(3)))


class TestBracket:
    def test_self(self, rng):
        xi = TrigLoop.random(rng, G, 2)
        assert loop_bracket(xi, xi).max_abs() < 1e-14

    def test_product_to_sum(self):
        b = loop_bracket(mode(0, 1), mode(1, 1))
        assert np.allclose(b.a0, [0, 0, 0.5])
        assert np.allclose(b.cos, [[0, 0, 0], [0, 0, 0.5]])
        assert np.allclose(b.sin, 0)

    def test_constants(self):
        b = loop_bracket(TrigLoop.constant(G, [1, 0, 0]), TrigLoop.constant(G, [0, 1, 0]))
        assert b.degree == 0 and np.allclose(b.a0, [0, 0, 1])

    def test_pointwise_agreement_and_degree(self, rng):
        xi, eta = TrigLoop.random(rng, G, 2), TrigLoop.random(rng, G, 3)
        b = loop_bracket(xi, eta)
        assert b.degree <= 5
        t = rng.random(7)
        expected = np.einsum("ti,tj,ijk->tk", xi(t), eta(t), G.structure_array())
        assert np.max(np.abs(b(t) - expected)) < 1e-12

    def test_jacobi(self, rng):
        for _ in range(10):
            a, b, c = (TrigLoop.random(rng, G, 2) for _ in range(3))
            J = (loop_bracket(a, loop_bracket(b, c)) + loop_bracket(b, loop_bracket(c, a))
                 + loop_bracket(c, loop_bracket(a, b)))
            assert J.max_abs() < 1e-10


class TestKappaAndD:
    def test_kappa_values(self):
        assert loop_kappa(mode(0, 1), mode(0, 1)) == pytest.approx(0.5, abs=1e-15)
        assert loop_kappa(mode(0, 1), mode(0, 1, "sin")) == 0.0
        X, Y = TrigLoop.constant(G, [1, 2, 3]), TrigLoop.constant(G, [0, -1, 2])
        assert loop_kappa(X, Y) == pytest.approx(4.0)

    def test_kappa_matches_quadrature(self, rng):
        xi, eta = TrigLoop.random(rng, G, 3), TrigLoop.random(rng, G, 2)
        t = np.arange(64) / 64
        assert loop_kappa(xi, eta) == pytest.approx(np.mean(np.sum(xi(t) * eta(t), axis=1)), abs=1e-12)

    def test_kappa_invariance(self, rng):
        for _ in range(10):
            x, z, e = (TrigLoop.random(rng, G, 2) for _ in range(3))
            assert abs(loop_kappa(loop_bracket(x, z), e) + loop_kappa(z, loop_bracket(x, e))) < 1e-10

    def test_D_examples(self):
        assert loop_D(TrigLoop.constant(G, [1, 2, 3])).max_abs() == 0
        d = loop_D(mode(0, 1))
        assert np.allclose(d.sin, [[-2 * PI, 0, 0]]) and np.allclose(d.cos, 0)
        assert len(loop_D(mode(0, 3)).cos) == 3

    def test_D_skew_derivation(self, rng):
        for _ in range(10):
            xi, eta = TrigLoop.random(rng, G, 3), TrigLoop.random(rng, G, 2)
            assert abs(loop_kappa(loop_D(xi), eta) + loop_kappa(xi, loop_D(eta))) < 1e-12
            lhs = loop_D(loop_bracket(xi, eta))
            rhs = loop_bracket(loop_D(xi), eta) + loop_bracket(xi, loop_D(eta))
            assert (lhs - rhs).max_abs() < 1e-12 * max(1.0, lhs.max_abs())

    def test_cocycle(self, rng):
        for _ in range(10):
            a, b, c = (TrigLoop.random(rng, G, 2) for _ in range(3))
            w = lambda x, y: loop_kappa(loop_D(x), y)
            cyc = w(loop_bracket(a, b), c) + w(loop_bracket(b, c), a) + w(loop_bracket(c, a), b)
            assert abs(cyc) < 1e-9


class TestAffine:
    def test_flat_bracket_value(self):
        b, c = affine_flat_bracket(mode(0, 1), mode(0, 1, "sin"))
        assert b.max_abs() == 0 and abs(c + PI) < 1e-12

    def test_constants(self):
        b, c = affine_flat_bracket(TrigLoop.constant(G, [1, 0, 0]), TrigLoop.constant(G, [0, 1, 0]))
        assert np.allclose(b.a0, [0, 0, 1]) and c == 0

    def test_self(self, rng):
        xi = TrigLoop.random(rng, G, 2)
        b, c = affine_flat_bracket(xi, xi)
        assert b.max_abs() < 1e-14 and abs(c) < 1e-12

    def test_antisymmetry(self, rng):
        xi, eta = TrigLoop.random(rng, G, 2), TrigLoop.random(rng, G, 3)
        b1, c1 = affine_flat_bracket(xi, eta)
        b2, c2 = affine_flat_bracket(eta, xi)
        assert (b1 + b2).max_abs() < 1e-14 and abs(c1 + c2) < 1e-12

    def test_ham_field_examples(self):
        X = affine_ham_field(TrigLoop.constant(G, [1, 0, 0]))
        assert np.allclose(X(TrigLoop.constant(G, [0, 1, 0])).a0, [0, 0, 1])
        Y = affine_ham_field(mode(0, 1))(TrigLoop.zero(G))
        assert np.allclose(Y.sin, [[2 * PI, 0, 0]]) and np.allclose(Y.cos, 0)

    def test_pairing(self, rng):
        # kappa(zeta, X_eta(xi)) = {zeta^flat, eta^flat}(xi) = kappa(xi, [zeta, eta]) + kappa(D zeta, eta)
        for _ in range(10):
            zeta, eta, xi = (TrigLoop.random(rng, G, 2) for _ in range(3))
            lhs = loop_kappa(zeta, affine_ham_field(eta)(xi))
            b, c = affine_flat_bracket(zeta, eta)
            assert abs(lhs - (loop_kappa(xi, b) + c)) < 1e-10


class TestGauge:
    def test_identity_gauge(self, rng):
        rep = so3_rep()
        xi = TrigLoop.random(rng, G, 2)
        s = gauge_transform(xi, GaugeLoop.identity(rep), 32)
        assert np.array_equal(s.values, xi(s.t))

    def test_so2_rotation(self):
        rep = so2_rep()
        s = gauge_transform(TrigLoop.zero(rep.algebra), rotation_loop(rep), 32)
        assert np.max(np.abs(s.values + 2 * PI)) < 1e-8

    def test_constant_gauge(self, rng):
        rep = so3_rep()
        g = scipy.linalg.expm(rep.matrix([0.3, -0.2, 1.0]))
        X = np.array([1.0, 2.0, -1.0])
        s = gauge_transform(TrigLoop.constant(G, X), GaugeLoop.constant(rep, g), 16)
        assert np.max(np.abs(s.values - rep.Ad(g, X))) < 1e-12

    def test_non_periodic(self):
        # half turn about e1 flips e2, so the transformed constant loop does not close up
        rep = so3_rep()
        with pytest.raises(NonPeriodic):
            gauge_transform(TrigLoop.constant(G, [0, 1, 0]), rotation_loop(rep, 0.5), 16)

    def test_based_generator(self, rng):
        rep = so3_rep()
        with pytest.raises(ValueError):
            GaugeLoop.from_generator(rep, TrigLoop.constant(G, [1, 0, 0]), based=True)
        gl = GaugeLoop.from_generator(rep, TrigLoop.random(rng, G, 2, based=True), based=True)
        assert gl.is_based()

    def test_sampled_interpolation(self, rng):
        xi = TrigLoop.random(rng, G, 3)
        t = np.linspace(0, 1, 33)
        s = SampledLoop(t, xi(t))
        probe = rng.random(5)
        assert np.max(np.abs(s(probe) - xi(probe))) < 1e-12


class TestHolonomy:
    def test_zero_loop(self):
        assert np.allclose(holonomy(TrigLoop.zero(G), so3_rep()), np.eye(3), atol=1e-15)

    @pytest.mark.parametrize("rep", [so2_rep(), so3_rep(), su2_rep()], ids=lambda r: r.name)
    def test_constant_is_exp(self, rep, rng):
        for s in (1.0, 0.37):
            X = rng.standard_normal(rep.algebra.dim)
            H = holonomy(TrigLoop.constant(rep.algebra, X), rep, s, 1e-3)
            assert np.max(np.abs(H - scipy.linalg.expm(s * rep.matrix(X)))) < 1e-10

    def test_full_rotation(self):
        rep = so2_rep()
        H = holonomy(TrigLoop.constant(rep.algebra, [2 * PI]), rep, 1.0, 1e-3)
        assert np.max(np.abs(H - np.eye(2))) < 1e-10

    def test_stays_on_group(self, rng):
        rep = su2_rep()
        H = holonomy(TrigLoop.random(rng, G, 3), rep)
        assert np.max(np.abs(H.conj().T @ H - np.eye(2))) < 1e-13

    def test_coarse_step_warns(self):
        with pytest.warns(CoarseStepWarning):
            holonomy(TrigLoop.zero(G), so3_rep(), 1.0, 0.05)

    def test_rkmk4_matches_rk4(self, rng):
        rep = so3_rep()
        xi = TrigLoop.random(rng, G, 2, 0.5)
        assert np.max(np.abs(holonomy(xi, rep) - holonomy(xi, rep, method="rkmk4"))) < 1e-9

    @pytest.mark.filterwarnings("ignore::poisson_forge.loops.CoarseStepWarning")
    def test_csv(self, tmp_path, rng):
        t, gam = holonomy_path(TrigLoop.random(rng, G, 1), su2_rep(), 1.0, 0.25)
        path = tmp_path / "h.csv"
        write_holonomy_csv(path, t, gam)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("t,g11_re,g11_im") and len(lines) == 6


class TestEquivariance:
    def test_identity_gauge_exact(self, rng):
        assert holonomy_equivariance_residual(TrigLoop.random(rng, G, 2), GaugeLoop.identity(so3_rep())) == 0.0

    @pytest.mark.parametrize("rep", [so3_rep(), su2_rep()], ids=lambda r: r.name)
    def test_random_pairs(self, rep, rng):
        for _ in range(5):
            xi = TrigLoop.random(rng, G, 3, 0.3)
            gl = GaugeLoop.from_generator(rep, TrigLoop.random(rng, G, 2, 0.3, based=True), based=True)
            assert holonomy_equivariance_residual(xi, gl, 1.0, 1e-3) < 1e-8

    def test_intermediate_time(self, rng):
        rep = so3_rep()
        xi = TrigLoop.random(rng, G, 3, 0.3)
        gl = GaugeLoop.from_generator(rep, TrigLoop.random(rng, G, 2, 0.3, based=True), based=True)
        assert holonomy_equivariance_residual(xi, gl, 0.6, 1e-3) < 1e-8

    def test_so2_rotation_gauge(self):
        # Both sides are the identity; the Lie-group integrator is exact on constant abelian loops.
        rep = so2_rep()
        r = holonomy_equivariance_residual(TrigLoop.zero(rep.algebra), rotation_loop(rep), 1.0, 1e-3, "rkmk4")
        assert r < 1e-10

    def test_fourth_order(self, rng):
        rep = so3_rep()
        xi = TrigLoop.random(rng, G, 3, 0.3)
        gl = GaugeLoop.from_generator(rep, TrigLoop.random(rng, G, 2, 0.3, based=True), based=True)
        r1 = holonomy_equivariance_residual(xi, gl, 1.0, 1e-2)
        r2 = holonomy_equivariance_residual(xi, gl, 1.0, 5e-3)
        assert 10 <= r1 / r2 <= 24


class TestFiber:
    def test_same_loop_gives_identity(self, rng):
        rep = so3_rep()
        xi = TrigLoop.random(rng, G, 2, 0.3)
        fr = fiber_recover(xi, xi, rep, 200)
        assert np.max(np.abs(fr.g - np.eye(3))) < 1e-14 and fr.ok

    def test_round_trip(self, rng):
        rep = so3_rep()
        xi = TrigLoop.random(rng, G, 3, 0.3)
        g0 = GaugeLoop.from_generator(rep, TrigLoop.random(rng, G, 2, 0.3, based=True), based=True)
        fr = fiber_recover(xi, GaugedLoop(xi, g0), rep)
        assert fr.distance_to(g0) < 1e-6 and fr.ok

    def test_abelian_constants(self):
        rep = so2_rep()
        xi, eta = TrigLoop.zero(rep.algebra), TrigLoop.constant(rep.algebra, [2 * PI])
        fr = fiber_recover(xi, eta, rep)
        expected = scipy.linalg.expm(-2 * PI * fr.t[:, None, None] * rep.generators[0])
        assert fr.ok and np.max(np.abs(fr.g - expected)) < 1e-8
        assert np.max(np.abs(fr.g[len(fr.t) // 2] - np.eye(2))) > 1

    def test_mismatch(self, rng):
        rep = so3_rep()
        with pytest.raises(FiberMismatch):
            fiber_recover(TrigLoop.zero(G), TrigLoop.constant(G, [1.0, 0, 0]), rep, 100)

    def test_spectral_derivative(self):
        t = np.arange(64) / 64
        assert np.max(np.abs(spectral_derivative(np.sin(2 * PI * 3 * t)) - 6 * PI * np.cos(2 * PI * 3 * t))) < 1e-10
