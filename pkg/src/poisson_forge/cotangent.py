"""Cotangent bundle of a matrix group in the right trivialization ``T_*(G) = g_* x G``.

A point is ``(alpha, g)``; a tangent vector ``(beta, Y)`` stands for ``(beta, Y.g)``.
The Liouville form is ``Theta(beta, Y.g) = alpha(Y)`` and ``Omega = -d Theta``.

The generator algebra is realized as polynomials in ``n + m^2`` variables: the
momenta ``h_i = H_{e_i}`` followed by the matrix coefficients ``g_ab`` (row-major).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .algebra import LieAlgebra, TwoCocycle, as_matrix, as_vector, check_cocycle
from .errors import DimensionMismatch, RepresentationMismatch
from .groups import MatrixRep
from .poisson import PoissonStructure, jacobiator, pbracket
from .polynomial import Polynomial

ORACLE_STEP = 1e-5


@dataclass(frozen=True)
class CotangentPoint:
    alpha: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha))
        object.__setattr__(self, "g", np.asarray(self.g))

    def group_residual(self, rep: MatrixRep) -> float:
        """Distance from orthogonality/unitarity (0 for general groups)."""
        g = np.asarray(self.g, dtype=complex if rep.is_complex else float)
        if rep.kind == "general":
            return 0.0
        return float(np.max(np.abs(g.conj().T @ g - np.eye(len(g)))))


@dataclass(frozen=True)
class CotangentTangent:
    beta: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta))
        object.__setattr__(self, "Y", np.asarray(self.Y))


def _bracket(g: LieAlgebra, x, y) -> np.ndarray:
    return np.einsum("i,j,ijk->k", np.asarray(x, dtype=float), np.asarray(y, dtype=float), g.structure_array())


def _check(p: CotangentPoint, *ts: CotangentTangent) -> None:
    k = len(p.alpha)
    for t in ts:
        if len(t.beta) != k or len(t.Y) != k:
            raise DimensionMismatch(f"tangent data must have length {k}")


def theta_eval(p: CotangentPoint, t: CotangentTangent) -> float:
    _check(p, t)
    return float(np.dot(p.alpha, t.Y))


def omega_eval(p: CotangentPoint, t1: CotangentTangent, t2: CotangentTangent, algebra: LieAlgebra) -> float:
    """``-dTheta`` in closed form: ``beta2(Y1) - beta1(Y2) - alpha([Y1, Y2])``."""
    _check(p, t1, t2)
    return float(np.dot(t2.beta, t1.Y) - np.dot(t1.beta, t2.Y)
                 - np.dot(p.alpha, _bracket(algebra, t1.Y, t2.Y)))


def left_action_vector(p: CotangentPoint, X, algebra: LieAlgebra) -> CotangentTangent:
    """Fundamental vector of the lifted left action at ``p``: ``(-alpha o ad X, X)``."""
    X = np.asarray(X, dtype=float)
    ad = np.array([[float(v) for v in row] for row in algebra.ad(X)])
    return CotangentTangent(-(np.asarray(p.alpha, dtype=float) @ ad), X)


def ix_residual(p: CotangentPoint, X, t: CotangentTangent, algebra: LieAlgebra) -> float:
    """``Omega(X_sigma(p), (beta, Y)) - beta(X)``."""
    return omega_eval(p, left_action_vector(p, X, algebra), t, algebra) - float(np.dot(t.beta, X))


def iz_residual(p: CotangentPoint, gamma, t: CotangentTangent, algebra: LieAlgebra) -> float:
    """``Omega((gamma, 0), (beta, Y)) - gamma(Y)``."""
    vertical = CotangentTangent(np.asarray(gamma, dtype=float), np.zeros(len(p.alpha)))
    return omega_eval(p, vertical, t, algebra) - float(np.dot(gamma, t.Y))


# -- finite-difference oracle -----------------------------------------------

def theta_ambient(rep: MatrixRep, alpha, G, beta_dot, G_dot) -> float:
    """Liouville form on ``g_* x GL``: ``alpha(coords(G_dot G^{-1}))``; ``beta_dot`` is ignored."""
    return float(np.real(np.dot(alpha, rep.coords(G_dot @ np.linalg.inv(G)))))


def omega_oracle(rep: MatrixRep, p: CotangentPoint, t1: CotangentTangent, t2: CotangentTangent,
                 step: float = ORACLE_STEP) -> float:
    """``-dTheta(u, v)`` with ``dTheta(u, v) = D_u Theta(v) - D_v Theta(u)`` by central differences."""
    _check(p, t1, t2)
    alpha, g = np.asarray(p.alpha, dtype=float), np.asarray(p.g)
    u = (np.asarray(t1.beta, dtype=float), rep.matrix(t1.Y) @ g)
    v = (np.asarray(t2.beta, dtype=float), rep.matrix(t2.Y) @ g)

    def directional(a, b):  # D_a Theta(b)
        plus = theta_ambient(rep, alpha + step * a[0], g + step * a[1], *b)
        minus = theta_ambient(rep, alpha - step * a[0], g - step * a[1], *b)
        return (plus - minus) / (2.0 * step)

    return -(directional(u, v) - directional(v, u))


# -- generator algebra -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GeneratorAlgebra:
    """Polynomials in momenta ``H_X`` and matrix coefficients ``F_A = trace(A g)``.

    Brackets: ``{H_X, H_Y} = H_[X,Y] + b(X, Y)``, ``{F_A, H_X} = F_{A X}``,
    ``{F_A, F_B} = 0``; realized as an affine Poisson structure in the
    coordinates ``(h_1..h_n, g_11..g_mm)``.
    """

    rep: MatrixRep
    magnetic: TwoCocycle | None = None
    structure: PoissonStructure = field(default=None, repr=False)

    def __post_init__(self):
        if self.rep.is_complex:
            raise RepresentationMismatch("matrix coefficients need a real representation")
        g, m, n = self.rep.algebra, self.rep.size, self.rep.algebra.dim
        E = [self.generator_matrix(i) for i in range(n)]
        N = n + m * m
        entries = [(i, j, k, v) for i, j, k, v in g.bracket_entries()]
        for i in range(n):
            for a in range(m):
                for b in range(m):
                    # {g_ab, h_i} = (E_i g)_ab = sum_c E_i[a][c] g_cb
                    for c in range(m):
                        v = E[i][a][c]
                        if v:
                            entries.append((self.gvar(a, b), i, self.gvar(c, b), v))
                            entries.append((i, self.gvar(a, b), self.gvar(c, b), -v))
        big = LieAlgebra.from_brackets(N, entries, self.var_names(), f"B({g.name})")
        lam = [[Fraction(0)] * N for _ in range(N)]
        if self.magnetic is not None:
            if self.magnetic.dim != n:
                raise DimensionMismatch("magnetic cocycle dimension differs from the algebra")
            for i in range(n):
                for j in range(n):
                    lam[i][j] = self.magnetic.matrix[i][j]
        object.__setattr__(self, "structure", PoissonStructure.affine(big, lam, check=False))

    @property
    def n(self) -> int:
        return self.rep.algebra.dim

    @property
    def m(self) -> int:
        return self.rep.size

    @property
    def nvars(self) -> int:
        return self.n + self.m * self.m

    def gvar(self, a: int, b: int) -> int:
        return self.n + a * self.m + b

    def var_names(self) -> tuple:
        return tuple(f"h{i + 1}" for i in range(self.n)) + tuple(
            f"g{a + 1}{b + 1}" for a in range(self.m) for b in range(self.m))

    def H(self, X: Sequence) -> Polynomial:
        X = as_vector(X)
        if len(X) != self.n:
            raise DimensionMismatch("X has wrong length")
        return Polynomial.linear(list(X) + [0] * (self.m * self.m))

    def F(self, A) -> Polynomial:
        """``trace(A g) = sum_ab A_ab g_ba``."""
        A = as_matrix(A)
        coeffs = [Fraction(0)] * self.nvars
        for a in range(self.m):
            for b in range(self.m):
                coeffs[self.gvar(b, a)] += A[a][b]
        return Polynomial.linear(coeffs)

    def constant(self, c) -> Polynomial:
        return Polynomial.constant(self.nvars, c)

    def bracket(self, a: Polynomial, b: Polynomial) -> Polynomial:
        return pbracket(a, b, self.structure)

    def jacobiator(self, a: Polynomial, b: Polynomial, c: Polynomial) -> Polynomial:
        return jacobiator(a, b, c, self.structure)

    def point(self, p: CotangentPoint) -> list:
        return list(p.alpha) + list(np.asarray(p.g).ravel())

    def evaluate(self, F: Polynomial, p: CotangentPoint):
        return F(self.point(p))

    def generator_matrix(self, i: int) -> list:
        return [[Fraction(float(v)) for v in row] for row in self.rep.generators[i]]

    def tangent_differential(self, F: Polynomial, p: CotangentPoint) -> list:
        """Row ``dF`` in tangent coordinates ``(beta, Y)``, exact for rational points."""
        pt = self.point(p)
        grad = [F.diff(i)(pt) for i in range(self.nvars)]
        g = as_matrix(np.asarray(p.g).tolist())
        row = grad[: self.n]
        for i in range(self.n):
            E = self.generator_matrix(i)
            s = Fraction(0)
            for a in range(self.m):
                for b in range(self.m):
                    dg = sum((E[a][c] * g[c][b] for c in range(self.m)), Fraction(0))
                    s += grad[self.gvar(a, b)] * dg
            row.append(s)
        return row


def gen_bracket(a: Polynomial, b: Polynomial, B: GeneratorAlgebra) -> Polynomial:
    return B.bracket(a, b)


def gen_jacobiator(a: Polynomial, b: Polynomial, c: Polynomial, B: GeneratorAlgebra) -> Polynomial:
    return B.jacobiator(a, b, c)


def cayley(S) -> list:
    """Exact rational orthogonal matrix ``(I - S)^{-1} (I + S)`` from a skew matrix ``S``."""
    S = as_matrix(S)
    m = len(S)
    I = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    left = linalg.inverse([[I[i][j] - S[i][j] for j in range(m)] for i in range(m)])
    return [[sum((left[i][k] * (I[k][j] + S[k][j]) for k in range(m)), Fraction(0)) for j in range(m)]
            for i in range(m)]


def random_rational_point(rng: np.random.Generator, B: GeneratorAlgebra) -> CotangentPoint:
    """Random exact point: rational ``alpha`` and a Cayley-transform rotation (orthogonal groups)."""
    n, m = B.n, B.m
    alpha = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(n)]
    if B.rep.kind == "orthogonal":
        S = [[Fraction(0)] * m for _ in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                v = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
                S[i][j], S[j][i] = v, -v
        g = cayley(S)
    else:
        x = [Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(n)]
        M = [[sum((Fraction(float(E[a][b])) * xi for xi, E in zip(x, B.rep.generators)), Fraction(0))
              for b in range(m)] for a in range(m)]
        # exp(M) = I + M when products of generators vanish (translation groups).
        if any(np.any(Ei @ Ej) for Ei in B.rep.generators for Ej in B.rep.generators):
            raise RepresentationMismatch("exact samples need an orthogonal or translation group")
        g = [[Fraction(int(a == b)) + M[a][b] for b in range(m)] for a in range(m)]
    return CotangentPoint(np.array(alpha, dtype=object), np.array(g, dtype=object))


@dataclass
class ReductionReport:
    kernels_equal: list = field(default_factory=list)
    quotient_bracket: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.kernels_equal) and all(r.is_zero() for r in self.quotient_bracket.values())

    def to_json(self) -> dict:
        return {"check": "redcond", "status": "pass" if self.ok else "fail",
                "residuals": [{"samples": len(self.kernels_equal),
                               "kernel_failures": self.kernels_equal.count(False),
                               "bracket_failures": [str(k) for k, r in self.quotient_bracket.items()
                                                    if not r.is_zero()]}]}


def reduction_check(B: GeneratorAlgebra, samples: Sequence[CotangentPoint],
                    generators: Sequence[Polynomial] | None = None) -> ReductionReport:
    """Compare ``ker T(q)`` for ``q(alpha, g) = alpha`` with the common kernel of the generator differentials.

    Also checks that ``{H_X, H_Y}`` is the pullback of the bracket on ``g_*``
    (linear, or affine with the magnetic cocycle).
    """
    n = B.n
    gens = list(generators) if generators is not None else [B.H(B.rep.algebra.basis_vector(i)) for i in range(n)]
    Tq = [[Fraction(int(i == j)) for j in range(2 * n)] for i in range(n)]
    report = ReductionReport()
    for p in samples:
        rows = [B.tangent_differential(F, p) for F in gens]
        report.kernels_equal.append(linalg.same_kernel(rows, Tq, 2 * n))
    g = B.rep.algebra
    target = (PoissonStructure.linear(g) if B.magnetic is None
              else PoissonStructure.affine(g, B.magnetic.matrix, check=False))
    xs = Polynomial.variables(n)
    for i in range(n):
        for j in range(i + 1, n):
            expected = pbracket(xs[i], xs[j], target).embed(B.nvars)
            report.quotient_bracket[i, j] = B.bracket(B.H(g.basis_vector(i)), B.H(g.basis_vector(j))) - expected
    return report


def orbit_form_eval(alpha, g_mat, X, Y, rep: MatrixRep) -> float:
    """``alpha([Ad_{g^-1} X, Ad_{g^-1} Y])``: the orbit 2-form on ``X.g, Y.g``."""
    ginv = np.linalg.inv(np.asarray(g_mat))
    x, y = np.real(rep.Ad(ginv, X)), np.real(rep.Ad(ginv, Y))
    return float(np.dot(alpha, _bracket(rep.algebra, x, y)))


def orbit_radical(alpha: Sequence, algebra: LieAlgebra) -> list[tuple]:
    """Exact kernel of ``(X, Y) -> alpha([X, Y])``: the stabilizer algebra of ``alpha``."""
    alpha = as_vector(alpha)
    M = [[sum((a * c for a, c in zip(alpha, algebra.basis_bracket(i, j))), Fraction(0))
          for j in range(algebra.dim)] for i in range(algebra.dim)]
    return linalg.nullspace(M, algebra.dim)


def magnetic_is_cocycle(B: GeneratorAlgebra) -> bool:
    return B.magnetic is None or check_cocycle(B.rep.algebra, B.magnetic) == 0
