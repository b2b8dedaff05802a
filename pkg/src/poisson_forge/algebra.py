"""Finite-dimensional Lie algebras with exact rational structure constants.

Vectors are sequences of rationals in the chosen basis. Covectors use the
dual basis. Linear maps act on column vectors, ``(Mx)_i = sum_j M[i][j] x_j``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NonCocycleInput, SingularForm

Vector = tuple[Fraction, ...]
Matrix = tuple[tuple[Fraction, ...], ...]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def as_vector(x: Iterable) -> Vector:
    return tuple(as_fraction(v) for v in x)


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(as_vector(r) for r in rows)


def _square(m: Matrix, n: int, what: str) -> None:
    if len(m) != n or any(len(r) != n for r in m):
        raise DimensionMismatch(f"{what} must be {n}x{n}")


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Structure constants ``c[i][j][k]`` with ``[e_i, e_j] = sum_k c[i][j][k] e_k``.

    The full table is stored as given; antisymmetry and the Jacobi identity
    are reported by :func:`validate_lie` rather than enforced here.
    """

    dim: int
    basis: tuple[str, ...]
    c: tuple[tuple[tuple[Fraction, ...], ...], ...]
    name: str = ""
    _sparse: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if len(self.basis) != self.dim:
            raise DimensionMismatch("basis length differs from dim")
        sparse = {}
        for i in range(self.dim):
            for j in range(self.dim):
                row = tuple((k, v) for k, v in enumerate(self.c[i][j]) if v)
                if row:
                    sparse[i, j] = row
        object.__setattr__(self, "_sparse", sparse)

    @classmethod
    def from_brackets(cls, dim: int, entries: Iterable[Sequence], basis: Sequence[str] | None = None,
                      name: str = "") -> "LieAlgebra":
        """Build from ``[i, j, k, value]`` entries (0-based, full table)."""
        c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for i, j, k, v in entries:
            if not all(0 <= idx < dim for idx in (i, j, k)):
                raise DimensionMismatch(f"bracket index out of range: {(i, j, k)}")
            c[i][j][k] += as_fraction(v)
        basis = tuple(basis) if basis is not None else tuple(f"e{i + 1}" for i in range(dim))
        return cls(dim, basis, tuple(tuple(tuple(r) for r in plane) for plane in c), name)

    def bracket_entries(self):
        """Nonzero ``(i, j, k, value)`` entries of the table."""
        for (i, j), row in self._sparse.items():
            for k, v in row:
                yield i, j, k, v

    def basis_bracket(self, i: int, j: int) -> Vector:
        return self.c[i][j]

    def basis_vector(self, i: int) -> Vector:
        return tuple(Fraction(int(k == i)) for k in range(self.dim))

    def ad(self, x: Sequence) -> Matrix:
        """Matrix of ``ad x = [x, .]``."""
        x = self._vec(x)
        m = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for (i, j), row in self._sparse.items():
            if x[i]:
                for k, v in row:
                    m[k][j] += x[i] * v
        return as_matrix(m)

    def structure_array(self) -> np.ndarray:
        """Float copy of the structure constants, shape ``(dim, dim, dim)``."""
        return np.array([[[float(v) for v in r] for r in plane] for plane in self.c])

    def is_abelian(self) -> bool:
        return not self._sparse

    def _vec(self, x) -> Vector:
        x = as_vector(x)
        if len(x) != self.dim:
            raise DimensionMismatch(f"expected vector of length {self.dim}, got {len(x)}")
        return x


def bracket(g: LieAlgebra, x: Sequence, y: Sequence) -> Vector:
    x, y = g._vec(x), g._vec(y)
    out = [Fraction(0)] * g.dim
    for (i, j), row in g._sparse.items():
        s = x[i] * y[j]
        if s:
            for k, v in row:
                out[k] += s * v
    return tuple(out)


@dataclass
class LieReport:
    """Violations found by :func:`validate_lie`; truthy when there are any."""

    antisymmetry: list = field(default_factory=list)
    jacobi: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.antisymmetry and not self.jacobi

    def __bool__(self) -> bool:
        return not self.ok

    @property
    def max_residual(self) -> Fraction:
        vals = [abs(r) for _, r in self.antisymmetry + self.jacobi]
        return max(vals, default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "check": "lie",
            "status": "pass" if self.ok else "fail",
            "residuals": [{"kind": "antisymmetry", "index": list(idx), "value": str(r)} for idx, r in self.antisymmetry]
            + [{"kind": "jacobi", "index": list(idx), "value": str(r)} for idx, r in self.jacobi],
        }


def validate_lie(g: LieAlgebra) -> LieReport:
    """Antisymmetry violations and nonzero Jacobi residuals, all exact.

    A Jacobi residual at ``(i, j, k, l)`` is the ``e_l`` component of
    ``[[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]``.
    """
    n = g.dim
    report = LieReport()
    for i, j, k in itertools.product(range(n), repeat=3):
        r = g.c[i][j][k] + g.c[j][i][k]
        if r:
            report.antisymmetry.append(((i, j, k), r))

    def bb(i, j, k):
        out = [Fraction(0)] * n
        for m, v in g._sparse.get((i, j), ()):
            for l, w in g._sparse.get((m, k), ()):
                out[l] += v * w
        return out

    for i, j, k in itertools.combinations_with_replacement(range(n), 3):
        for a, b, cc in {(i, j, k), (i, k, j)}:
            terms = [bb(a, b, cc), bb(b, cc, a), bb(cc, a, b)]
            for l in range(n):
                r = terms[0][l] + terms[1][l] + terms[2][l]
                if r:
                    report.jacobi.append(((a, b, cc, l), r))
    return report


@dataclass(frozen=True)
class BilinearForm:
    """``kappa(x, y) = x^T M y``. Flags are claims, validated on construction."""

    matrix: Matrix
    symmetric: bool = False
    nondegenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        n = len(self.matrix)
        _square(self.matrix, n, "form")
        if self.symmetric and not self.is_symmetric():
            raise ValueError("form flagged symmetric but matrix is not")
        if self.nondegenerate and linalg.rank(self.matrix) < n:
            raise SingularForm("form flagged nondegenerate but matrix is singular")

    @classmethod
    def identity(cls, n: int) -> "BilinearForm":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)), True, True)

    @classmethod
    def diagonal(cls, values: Sequence) -> "BilinearForm":
        n = len(values)
        m = [[as_fraction(values[i]) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        return cls(as_matrix(m), True, all(as_fraction(v) != 0 for v in values))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def is_symmetric(self) -> bool:
        m = self.matrix
        return all(m[i][j] == m[j][i] for i in range(len(m)) for j in range(i))

    def __call__(self, x: Sequence, y: Sequence) -> Fraction:
        m = self.matrix
        return sum((as_fraction(xi) * m[i][j] * as_fraction(yj)
                    for i, xi in enumerate(x) if xi for j, yj in enumerate(y) if yj), Fraction(0))


@dataclass(frozen=True)
class LinearEndo:
    matrix: Matrix
    kind: str = "generic"  # derivation | adjoint-dual | generic

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        _square(self.matrix, len(self.matrix), "endomorphism")
        if self.kind not in ("derivation", "adjoint-dual", "generic"):
            raise ValueError(f"unknown endomorphism kind {self.kind!r}")

    @classmethod
    def inner(cls, g: LieAlgebra, d: Sequence) -> "LinearEndo":
        return cls(g.ad(d), "derivation")

    def __call__(self, x: Sequence) -> Vector:
        return tuple(sum((mij * as_fraction(xj) for mij, xj in zip(row, x)), Fraction(0)) for row in self.matrix)


@dataclass(frozen=True)
class TwoCocycle:
    """``omega(e_i, e_j) = matrix[i][j]``; the cocycle property is checked separately."""

    matrix: Matrix

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        _square(self.matrix, len(self.matrix), "cocycle")

    @classmethod
    def zero(cls, n: int) -> "TwoCocycle":
        return cls(tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n)))

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[tuple[int, int, object]]) -> "TwoCocycle":
        """Antisymmetric matrix with ``omega(e_i, e_j) = v`` for each ``(i, j, v)``."""
        m = [[Fraction(0)] * n for _ in range(n)]
        for i, j, v in entries:
            m[i][j] += as_fraction(v)
            m[j][i] -= as_fraction(v)
        return cls(as_matrix(m))

    @classmethod
    def from_form_and_derivation(cls, kappa: BilinearForm, D: LinearEndo) -> "TwoCocycle":
        """``omega(X, Y) = kappa(D X, Y)``."""
        n = kappa.dim
        cols = [D([Fraction(int(r == i)) for r in range(n)]) for i in range(n)]
        e = lambda j: [Fraction(int(r == j)) for r in range(n)]
        return cls(tuple(tuple(kappa(cols[i], e(j)) for j in range(n)) for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def __call__(self, x: Sequence, y: Sequence) -> Fraction:
        return BilinearForm(self.matrix)(x, y)


def _check_shape(g: LieAlgebra, m: Matrix, what: str) -> None:
    if len(m) != g.dim:
        raise DimensionMismatch(f"{what} has size {len(m)}, algebra has dim {g.dim}")


def check_form_invariance(g: LieAlgebra, kappa: BilinearForm) -> Fraction:
    """Largest ``|kappa([x,y],z) + kappa(y,[x,z])|`` over basis triples."""
    _check_shape(g, kappa.matrix, "form")
    n, m = g.dim, kappa.matrix
    worst = Fraction(0)
    for i, j, k in itertools.product(range(n), repeat=3):
        r = sum((v * m[l][k] for l, v in g._sparse.get((i, j), ())), Fraction(0))
        r += sum((v * m[j][l] for l, v in g._sparse.get((i, k), ())), Fraction(0))
        worst = max(worst, abs(r))
    return worst


@dataclass(frozen=True)
class DerivationReport:
    derivation_residual: Fraction
    skew_residual: Fraction

    @property
    def ok(self) -> bool:
        return self.derivation_residual == 0 and self.skew_residual == 0


def check_kappa_skew_derivation(g: LieAlgebra, kappa: BilinearForm, D: LinearEndo) -> DerivationReport:
    _check_shape(g, kappa.matrix, "form")
    _check_shape(g, D.matrix, "derivation")
    n = g.dim
    e = [g.basis_vector(i) for i in range(n)]
    De = [D(v) for v in e]
    der = skew = Fraction(0)
    for i, j in itertools.product(range(n), repeat=2):
        lhs = D(g.basis_bracket(i, j))
        rhs1, rhs2 = bracket(g, De[i], e[j]), bracket(g, e[i], De[j])
        der = max(der, max(abs(a - b - c) for a, b, c in zip(lhs, rhs1, rhs2)))
        skew = max(skew, abs(kappa(De[i], e[j]) + kappa(e[i], De[j])))
    return DerivationReport(der, skew)


def check_cocycle(g: LieAlgebra, omega: TwoCocycle) -> Fraction:
    """Largest antisymmetry or cyclic-sum residual of ``omega``; 0 iff a 2-cocycle."""
    _check_shape(g, omega.matrix, "cocycle")
    n, w = g.dim, omega.matrix
    worst = max((abs(w[i][j] + w[j][i]) for i in range(n) for j in range(n)), default=Fraction(0))

    def wb(i, j, k):  # omega([e_i, e_j], e_k)
        return sum((v * w[l][k] for l, v in g._sparse.get((i, j), ())), Fraction(0))

    for i, j, k in itertools.product(range(n), repeat=3):
        worst = max(worst, abs(wb(i, j, k) + wb(j, k, i) + wb(k, i, j)))
    return worst


def is_coboundary(g: LieAlgebra, omega: TwoCocycle) -> Vector | None:
    """A functional ``f`` with ``omega(X, Y) = f([X, Y])``, or None if the class is nonzero."""
    if check_cocycle(g, omega) != 0:
        raise NonCocycleInput("omega is not a 2-cocycle")
    n = g.dim
    rows, rhs = [], []
    for i in range(n):
        for j in range(i + 1, n):
            rows.append(list(g.c[i][j]))
            rhs.append(omega.matrix[i][j])
    if not rows:
        return tuple(Fraction(0) for _ in range(n))
    return linalg.solve(rows, rhs)


@dataclass(frozen=True)
class CentralExtension:
    """``R (+)_omega g`` with the central element at index 0."""

    base: LieAlgebra
    cocycle: TwoCocycle
    algebra: LieAlgebra

    @property
    def central_index(self) -> int:
        return 0


def central_extension(g: LieAlgebra, omega: TwoCocycle) -> CentralExtension:
    """Bracket ``[(t, X), (s, Y)] = (omega(X, Y), [X, Y])``."""
    if check_cocycle(g, omega) != 0:
        raise NonCocycleInput("omega is not a 2-cocycle")
    entries = [(i + 1, j + 1, k + 1, v) for i, j, k, v in g.bracket_entries()]
    entries += [(i + 1, j + 1, 0, omega.matrix[i][j]) for i in range(g.dim) for j in range(g.dim)
                if omega.matrix[i][j]]
    name = f"{g.name}^" if g.name else ""
    ext = LieAlgebra.from_brackets(g.dim + 1, entries, ("c",) + g.basis, name)
    return CentralExtension(g, omega, ext)


def flat(kappa: BilinearForm, x: Sequence) -> Vector:
    """Covector ``Y -> kappa(X, Y)``."""
    x = as_vector(x)
    if len(x) != kappa.dim:
        raise DimensionMismatch("vector length differs from form size")
    m = kappa.matrix
    return tuple(sum((x[i] * m[i][j] for i in range(len(x))), Fraction(0)) for j in range(len(x)))


def sharp(kappa: BilinearForm, alpha: Sequence) -> Vector:
    """Inverse of :func:`flat`; raises :class:`SingularForm` for degenerate kappa."""
    alpha = as_vector(alpha)
    if len(alpha) != kappa.dim:
        raise DimensionMismatch("covector length differs from form size")
    if linalg.rank(kappa.matrix) < kappa.dim:
        raise SingularForm("form is degenerate")
    mt = [[kappa.matrix[i][j] for i in range(kappa.dim)] for j in range(kappa.dim)]
    return linalg.solve(mt, alpha)


def gamma_inner(g_mat: np.ndarray, d: Sequence, g: LieAlgebra, rep) -> np.ndarray:
    """Adjoint 1-cocycle ``d - Ad_g d`` integrating the inner derivation ``ad(d)``."""
    if rep.algebra.dim != g.dim:
        raise DimensionMismatch("representation does not match the algebra")
    d = np.asarray([float(v) for v in d])
    return d - rep.Ad(g_mat, d)


# -- built-in algebras -------------------------------------------------------

def so3() -> LieAlgebra:
    entries = []
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        entries += [(i, j, k, 1), (j, i, k, -1)]
    return LieAlgebra.from_brackets(3, entries, ("e1", "e2", "e3"), "so3")


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra.from_brackets(n, [], tuple(f"e{i + 1}" for i in range(n)), f"R{n}")


def heisenberg() -> LieAlgebra:
    omega = TwoCocycle.from_entries(2, [(0, 1, 1)])
    return central_extension(abelian(2), omega).algebra


def direct_sum(a: LieAlgebra, b: LieAlgebra) -> LieAlgebra:
    """``a + b`` with ``b``'s basis placed after ``a``'s and ``[a, b] = 0``."""
    n = a.dim
    entries = list(a.bracket_entries()) + [(i + n, j + n, k + n, v) for i, j, k, v in b.bracket_entries()]
    basis = a.basis + tuple(f"{x}'" if x in a.basis else x for x in b.basis)
    return LieAlgebra.from_brackets(n + b.dim, entries, basis, f"{a.name}+{b.name}")


def so3_plus_line() -> LieAlgebra:
    """``so(3) + R``; unlike ``so(3)`` it carries 2-forms that are not cocycles."""
    return direct_sum(so3(), LieAlgebra.from_brackets(1, [], ("z",), "R1"))


BUILTIN_ALGEBRAS = {"so3": so3, "su2": so3, "so2": lambda: abelian(1), "R2": lambda: abelian(2),
                    "heisenberg": heisenberg, "so3+R": so3_plus_line}
