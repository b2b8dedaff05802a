from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from poisson_forge.algebra import TwoCocycle, abelian, check_cocycle, so3, so3_plus_line
from poisson_forge.cotangent import (CotangentPoint, CotangentTangent, GeneratorAlgebra, cayley, gen_bracket,
                                     gen_jacobiator, iz_residual, ix_residual, left_action_vector,
                                     magnetic_is_cocycle, omega_eval, omega_oracle, orbit_form_eval, orbit_radical,
                                     random_rational_point, reduction_check, theta_ambient, theta_eval)
from poisson_forge.errors import DimensionMismatch, RepresentationMismatch
from poisson_forge.groups import MatrixRep, so3_rep, su2_rep, translations_rep
from poisson_forge.polynomial import Polynomial

G3 = so3()
REP = so3_rep()


def random_probe(rng, rep=REP):
    n = rep.algebra.dim
    p = CotangentPoint(rng.standard_normal(n), rep.exp(rng.standard_normal(n)))
    t1 = CotangentTangent(rng.standard_normal(n), rng.standard_normal(n))
    t2 = CotangentTangent(rng.standard_normal(n), rng.standard_normal(n))
    return p, t1, t2


def E(a, b, m=3):
    M = [[0] * m for _ in range(m)]
    M[a][b] = 1
    return M


@pytest.fixture(scope="module")
def B():
    return GeneratorAlgebra(REP)


class TestForms:
    def test_theta_values(self):
        p = CotangentPoint([1.0, 0, 0], np.eye(3))
        assert theta_eval(p, CotangentTangent([5, 5, 5], [1, 0, 0])) == 1.0
        assert theta_eval(p, CotangentTangent([5, 5, 5], [0, 0, 0])) == 0.0

    def test_shape_mismatch(self):
        p = CotangentPoint([1.0, 0, 0], np.eye(3))
        with pytest.raises(DimensionMismatch):
            theta_eval(p, CotangentTangent([1, 2], [1, 0]))

    def test_theta_right_invariance(self, rng):
        for _ in range(10):
            p, t, _ = random_probe(rng)
            h = REP.exp(rng.standard_normal(3))
            Gdot = REP.matrix(t.Y) @ p.g
            before = theta_ambient(REP, p.alpha, p.g, t.beta, Gdot)
            after = theta_ambient(REP, p.alpha, p.g @ h, t.beta, Gdot @ h)
            assert abs(before - after) < 1e-12
            assert abs(before - theta_eval(p, t)) < 1e-12

    def test_omega_antisymmetric(self, rng):
        p, t1, t2 = random_probe(rng)
        assert omega_eval(p, t1, t1, G3) == 0.0
        assert omega_eval(p, t1, t2, G3) == -omega_eval(p, t2, t1, G3)

    @pytest.mark.parametrize("rep", [so3_rep(), su2_rep(), translations_rep(2)], ids=lambda r: r.name)
    def test_matches_oracle(self, rep, rng):
        for _ in range(25):
            p, t1, t2 = random_probe(rng, rep)
            assert abs(omega_eval(p, t1, t2, rep.algebra) - omega_oracle(rep, p, t1, t2)) < 1e-6

    def test_left_action_contraction(self, rng):
        for _ in range(25):
            p, _, t = random_probe(rng)
            X = rng.standard_normal(3)
            assert abs(ix_residual(p, X, t, G3)) < 1e-12
            assert abs(omega_oracle(REP, p, left_action_vector(p, X, G3), t) - t.beta @ X) < 1e-6

    def test_vertical_contraction(self, rng):
        # Omega((gamma, 0), (beta, Y)) = -gamma(Y) with Omega = -dTheta, both in closed form and by the oracle
        for _ in range(25):
            p, _, t = random_probe(rng)
            gamma = rng.standard_normal(3)
            vertical = CotangentTangent(gamma, np.zeros(3))
            assert abs(omega_eval(p, vertical, t, G3) + gamma @ t.Y) < 1e-12
            assert abs(omega_oracle(REP, p, vertical, t) + gamma @ t.Y) < 1e-6
            assert abs(iz_residual(p, gamma, t, G3) + 2 * gamma @ t.Y) < 1e-12

    def test_exact_inputs(self):
        p = CotangentPoint(np.array([Fraction(1, 3), 0, 2], dtype=object), np.eye(3))
        t1 = CotangentTangent([1, 0, 0], [0, 1, 0])
        t2 = CotangentTangent([0, 1, 0], [1, 0, 0])
        # beta2(Y1) - beta1(Y2) - alpha([Y1, Y2]) = 1 - 1 - alpha(-e3) = 2
        assert omega_eval(p, t1, t2, G3) == 2.0


class TestGeneratorBracket:
    def test_momenta(self, B):
        assert gen_bracket(B.H([1, 0, 0]), B.H([0, 1, 0]), B) == B.H([0, 0, 1])

    def test_coefficients_commute(self, B):
        assert gen_bracket(B.F(E(0, 1)), B.F(E(2, 0)), B).is_zero()

    def test_coefficient_momentum(self, B):
        for a in range(3):
            for b in range(3):
                for i in range(3):
                    X = G3.basis_vector(i)
                    AX = np.array(E(a, b), dtype=float) @ REP.generators[i]
                    expected = B.F([[Fraction(v) for v in row] for row in AX])
                    assert gen_bracket(B.F(E(a, b)), B.H(X), B) == expected

    def test_example_at_identity(self, B):
        p = CotangentPoint([1, 2, 3], np.eye(3, dtype=int))
        assert B.evaluate(gen_bracket(B.F(E(0, 0)), B.H([0, 0, 1]), B), p) == 0

    def test_directional_oracle(self, B, rng):
        for _ in range(10):
            A = rng.integers(-3, 4, (3, 3))
            X = rng.integers(-3, 4, 3)
            p = random_rational_point(rng, B)
            g = np.asarray(p.g, dtype=float)
            s = 1e-6
            fd = (np.trace(A @ REP.exp(s * X) @ g) - np.trace(A @ REP.exp(-s * X) @ g)) / (2 * s)
            exact = B.evaluate(gen_bracket(B.F(A.tolist()), B.H(X.tolist()), B), p)
            assert abs(float(exact) - fd) < 1e-8

    def test_antisymmetry_and_leibniz(self, B, rng):
        gens = [B.H([1, 0, 0]), B.H([0, 2, -1]), B.F(E(0, 1)), B.F(E(2, 2)), B.constant(3)]
        for _ in range(10):
            a, b, c = (gens[i] for i in rng.integers(0, len(gens), 3))
            a = a * gens[rng.integers(0, len(gens))]
            assert (gen_bracket(a, b, B) + gen_bracket(b, a, B)).is_zero()
            lhs = gen_bracket(a * b, c, B)
            assert lhs == a * gen_bracket(b, c, B) + b * gen_bracket(a, c, B)

    def test_complex_rep_rejected(self):
        with pytest.raises(RepresentationMismatch):
            GeneratorAlgebra(su2_rep())


def _triples(B):
    hs = [B.H(B.rep.algebra.basis_vector(i)) for i in range(B.n)]
    fs = [B.F(E(0, B.m - 1, B.m)), B.F(E(1, 0, B.m))]
    pool = hs + fs + [hs[0] * fs[0]]
    return [(a, b, c) for a in pool for b in pool for c in pool]


class TestJacobiDichotomy:
    def test_plain(self, B):
        for a, b, c in _triples(B)[:60]:
            assert gen_jacobiator(a, b, c, B).is_zero()

    def test_coboundary_magnetic(self):
        b = TwoCocycle.from_entries(3, [(0, 1, 1)])
        Bm = GeneratorAlgebra(REP, b)
        assert magnetic_is_cocycle(Bm)
        for a, b_, c in _triples(Bm)[:60]:
            assert gen_jacobiator(a, b_, c, Bm).is_zero()
        assert gen_bracket(Bm.H([1, 0, 0]), Bm.H([0, 1, 0]), Bm) == Bm.H([0, 0, 1]) + 1

    def test_non_cocycle_magnetic(self):
        g = so3_plus_line()
        gens = np.concatenate([REP.generators, np.eye(3)[None]])
        rep = MatrixRep(g, gens, "general", "so3+R")
        assert rep.homomorphism_residual() == 0
        b = TwoCocycle.from_entries(4, [(2, 3, 1)])
        Bm = GeneratorAlgebra(rep, b)
        assert not magnetic_is_cocycle(Bm)
        J = gen_jacobiator(Bm.H([1, 0, 0, 0]), Bm.H([0, 1, 0, 0]), Bm.H([0, 0, 0, 1]), Bm)
        assert J.is_constant() and not J.is_zero()

    def test_abelian_case(self):
        rep = translations_rep(2)
        Bm = GeneratorAlgebra(rep, TwoCocycle.from_entries(2, [(0, 1, 5)]))
        assert magnetic_is_cocycle(Bm)
        for a, b, c in _triples(Bm):
            assert gen_jacobiator(a, b, c, Bm).is_zero()


class TestReduction:
    def test_cayley_is_orthogonal(self):
        g = cayley([[0, 1, Fraction(1, 2)], [-1, 0, 2], [Fraction(-1, 2), -2, 0]])
        gt = [list(r) for r in zip(*g)]
        prod = [[sum(gt[i][k] * g[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
        assert prod == [[int(i == j) for j in range(3)] for i in range(3)]

    def test_passes_on_samples(self, B, rng):
        samples = [random_rational_point(rng, B) for _ in range(100)]
        assert all(p.group_residual(REP) < 1e-10 for p in samples)
        report = reduction_check(B, samples)
        assert report.ok and len(report.kernels_equal) == 100

    def test_single_generator_fails(self, B, rng):
        samples = [random_rational_point(rng, B) for _ in range(3)]
        report = reduction_check(B, samples, [B.H([1, 0, 0])])
        assert not any(report.kernels_equal) and not report.ok

    def test_magnetic_quotient(self, rng):
        b = TwoCocycle.from_entries(3, [(0, 1, 2), (1, 2, -1)])
        Bm = GeneratorAlgebra(REP, b)
        report = reduction_check(Bm, [random_rational_point(rng, Bm) for _ in range(5)])
        assert report.ok
        assert gen_bracket(Bm.H([0, 1, 0]), Bm.H([0, 0, 1]), Bm) == Bm.H([1, 0, 0]) - 1

    def test_translations(self, rng):
        Bt = GeneratorAlgebra(translations_rep(2))
        assert reduction_check(Bt, [random_rational_point(rng, Bt) for _ in range(5)]).ok

    def test_json(self, B, rng):
        out = reduction_check(B, [random_rational_point(rng, B)]).to_json()
        assert out["status"] == "pass" and out["residuals"][0]["samples"] == 1


class TestOrbitForm:
    def test_value(self):
        assert orbit_form_eval([0, 0, 1], np.eye(3), [1, 0, 0], [0, 1, 0], REP) == pytest.approx(1.0)

    def test_diagonal(self, rng):
        X = rng.standard_normal(3)
        assert abs(orbit_form_eval(rng.standard_normal(3), REP.exp(rng.standard_normal(3)), X, X, REP)) < 1e-14

    def test_left_translation(self, rng):
        alpha, X, Y = rng.standard_normal((3, 3))
        g, h = REP.exp(rng.standard_normal(3)), REP.exp(rng.standard_normal(3))
        # X.g moved to h.X.g = (Ad_h X).(h g)
        before = orbit_form_eval(alpha, g, X, Y, REP)
        after = orbit_form_eval(alpha, h @ g, REP.Ad(h, X), REP.Ad(h, Y), REP)
        assert abs(before - after) < 1e-12

    def test_radical(self):
        assert orbit_radical([0, 0, 1], G3) == [(0, 0, 1)]
        assert len(orbit_radical([0, 0, 0], G3)) == 3
        assert len(orbit_radical([1, 2, 0], abelian(3))) == 3
