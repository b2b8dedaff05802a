"""Constant, linear and affine Poisson brackets on polynomial functions.

Coordinates ``x_1, ..., x_n`` are a basis of the space of linear functions
``V_*``. A structure is fixed by the brackets of the coordinates,

    {x_i, x_j} = Lambda[i][j] + sum_k c[i][j][k] x_k,

and extended to all polynomials by the Leibniz rule, which gives
``{F, G}(v) = sum_ij dF_i(v) dG_j(v) {x_i, x_j}(v)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .algebra import (BilinearForm, LieAlgebra, LinearEndo, Matrix, TwoCocycle, as_matrix,
                      as_vector, check_cocycle, validate_lie)
from .errors import DimensionMismatch, NonCentralElement, NonCocycleInput, NonFinite, WellDefinednessWitness
from .polynomial import CompiledPolynomials, Polynomial

KINDS = ("constant", "linear", "affine")


@dataclass(frozen=True, eq=False)
class PoissonStructure:
    n: int
    kind: str
    lam: Matrix | None = None
    algebra: LieAlgebra | None = None
    name: str = ""
    _pairs: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind in ("constant", "affine") and self.lam is None:
            raise ValueError(f"{self.kind} structure needs Lambda")
        if self.kind in ("linear", "affine") and self.algebra is None:
            raise ValueError(f"{self.kind} structure needs a bracket on V_*")
        if self.lam is not None:
            object.__setattr__(self, "lam", as_matrix(self.lam))
            if len(self.lam) != self.n or any(len(r) != self.n for r in self.lam):
                raise DimensionMismatch("Lambda must be n x n")
        if self.algebra is not None and self.algebra.dim != self.n:
            raise DimensionMismatch("bracket dimension differs from n")
        pairs = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                p = self.coordinate_bracket(i, j)
                if not p.is_zero():
                    pairs.append((i, j, p))
        object.__setattr__(self, "_pairs", tuple(pairs))

    # -- constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, lam, check: bool = True, name: str = "") -> "PoissonStructure":
        lam = as_matrix(lam)
        ps = cls(len(lam), "constant", lam=lam, name=name)
        if check:
            ps.validate()
        return ps

    @classmethod
    def linear(cls, algebra: LieAlgebra, check: bool = True, name: str = "") -> "PoissonStructure":
        ps = cls(algebra.dim, "linear", algebra=algebra, name=name or f"kks-{algebra.name}")
        if check:
            ps.validate()
        return ps

    kks = linear

    @classmethod
    def affine(cls, algebra: LieAlgebra, lam, check: bool = True, name: str = "") -> "PoissonStructure":
        ps = cls(algebra.dim, "affine", lam=as_matrix(lam), algebra=algebra, name=name)
        if check:
            ps.validate()
        return ps

    @classmethod
    def from_form_and_derivation(cls, algebra: LieAlgebra, kappa: BilinearForm, D: LinearEndo,
                                 check: bool = True) -> "PoissonStructure":
        """``{X^flat, Y^flat} = [X, Y]^flat + kappa(DX, Y)`` on the generators ``x_i = e_i^flat``."""
        omega = TwoCocycle.from_form_and_derivation(kappa, D)
        return cls.affine(algebra, omega.matrix, check=check, name=f"kappa-D-{algebra.name}")

    @classmethod
    def canonical(cls, m: int) -> "PoissonStructure":
        """Constant structure on ``V x V_*`` with ``{q_i, p_j} = delta_ij``."""
        n = 2 * m
        lam = [[Fraction(0)] * n for _ in range(n)]
        for i in range(m):
            lam[i][m + i], lam[m + i][i] = Fraction(1), Fraction(-1)
        return cls.constant(lam, name=f"canonical-{m}")

    def validate(self) -> None:
        """Raise if the defining data violate the structure's invariants."""
        if self.lam is not None:
            if any(self.lam[i][j] != -self.lam[j][i] for i in range(self.n) for j in range(self.n)):
                raise NonCocycleInput("Lambda is not skew-symmetric")
        if self.algebra is not None:
            report = validate_lie(self.algebra)
            if not report.ok:
                raise ValueError(f"bracket on V_* is not a Lie bracket (max residual {report.max_residual})")
        if self.kind == "affine" and check_cocycle(self.algebra, TwoCocycle(self.lam)) != 0:
            raise NonCocycleInput("Lambda is not a 2-cocycle for the bracket on V_*")

    # -- data -----------------------------------------------------------------
    def coordinate_bracket(self, i: int, j: int) -> Polynomial:
        """``{x_i, x_j}`` as an affine polynomial."""
        terms = {}
        if self.lam is not None and self.lam[i][j]:
            terms[(0,) * self.n] = self.lam[i][j]
        if self.algebra is not None:
            for k, v in enumerate(self.algebra.c[i][j]):
                if v:
                    terms[tuple(int(r == k) for r in range(self.n))] = v
        return Polynomial(self.n, terms)

    @property
    def sharp_map(self) -> Matrix | None:
        """Matrix ``S`` with ``alpha^sharp = S alpha``, so ``Lambda(beta, alpha) = beta(alpha^sharp)``."""
        return self.lam

    def sharp(self, alpha: Sequence) -> tuple:
        if self.lam is None:
            return tuple(Fraction(0) for _ in range(self.n))
        return tuple(sum((self.lam[k][j] * alpha[j] for j in range(self.n)), 0 * alpha[0]) for k in range(self.n))

    def ad_dual(self, alpha: Sequence, v: Sequence) -> tuple:
        """``(ad_0 alpha)^* v``, defined by ``beta((ad_0 alpha)^* v) = [alpha, beta]_0(v)``."""
        if self.algebra is None:
            return tuple(0 * v[0] for _ in range(self.n))
        out = [0 * v[0]] * self.n
        for i, j, k, c in self.algebra.bracket_entries():
            if alpha[i]:
                out[j] = out[j] + alpha[i] * c * v[k]
        return tuple(out)

    def lambda_sharp_residual(self) -> Fraction:
        """``max |Lambda(beta, alpha) - beta(alpha^sharp)|`` over basis pairs."""
        if self.lam is None:
            return Fraction(0)
        worst = Fraction(0)
        for a in range(self.n):
            alpha = [Fraction(int(r == a)) for r in range(self.n)]
            s = self.sharp(alpha)
            for b in range(self.n):
                worst = max(worst, abs(self.lam[b][a] - s[b]))
        return worst

    def pullback_algebra(self) -> LieAlgebra | None:
        return self.algebra


def _check(P: PoissonStructure, *polys: Polynomial) -> None:
    for p in polys:
        if p.n != P.n:
            raise DimensionMismatch(f"polynomial over {p.n} coordinates, structure over {P.n}")


def differential(F: Polynomial, v: Sequence) -> tuple:
    """Gradient covector ``(dF/dx_1(v), ..., dF/dx_n(v))``."""
    if len(v) != F.n:
        raise DimensionMismatch(f"point has {len(v)} coordinates, polynomial has {F.n}")
    return tuple(F.diff(i)(v) for i in range(F.n))


def pbracket(F: Polynomial, G: Polynomial, P: PoissonStructure) -> Polynomial:
    _check(P, F, G)
    if F.is_constant() or G.is_constant():
        return Polynomial.zero(P.n)
    dF, dG = F.gradient(), G.gradient()
    out = Polynomial.zero(P.n)
    for i, j, b in P._pairs:
        t = dF[i] * dG[j] - dF[j] * dG[i]
        if not t.is_zero():
            out = out + b * t
    return out


class PolyVectorField:
    """Vector field on ``V`` with polynomial components in the coordinate basis."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Polynomial]):
        self.components = tuple(components)
        if len({c.n for c in self.components}) > 1 or (self.components and self.components[0].n != len(self.components)):
            raise DimensionMismatch("need n components over n coordinates")

    @property
    def n(self) -> int:
        return len(self.components)

    @classmethod
    def zero(cls, n: int) -> "PolyVectorField":
        return cls([Polynomial.zero(n)] * n)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyVectorField) and self.components == other.components

    __hash__ = None

    def __repr__(self) -> str:
        return f"PolyVectorField({list(self.components)})"

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField([a - b for a, b in zip(self.components, other.components)])

    def scale(self, f) -> "PolyVectorField":
        """Pointwise product with a function (polynomial or scalar)."""
        return PolyVectorField([f * c for c in self.components])

    def apply(self, F: Polynomial) -> Polynomial:
        """Directional derivative ``X F = dF . X``."""
        out = Polynomial.zero(self.n)
        for i, c in enumerate(self.components):
            if not c.is_zero():
                d = F.diff(i)
                if not d.is_zero():
                    out = out + d * c
        return out

    def lie_bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        """``[X, Y]_k = X(Y_k) - Y(X_k)``."""
        return PolyVectorField([self.apply(yk) - other.apply(xk)
                                for xk, yk in zip(self.components, other.components)])

    def __call__(self, v: Sequence) -> tuple:
        return tuple(c(v) for c in self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def compile(self) -> CompiledPolynomials:
        return CompiledPolynomials(self.components)


def hamiltonian_field(H: Polynomial, P: PoissonStructure) -> PolyVectorField:
    """``X_H(v) = dH(v)^sharp - (ad_0 dH(v))^* v``, with ``{F, H} = dF . X_H``."""
    _check(P, H)
    alpha = H.gradient()
    coords = Polynomial.variables(P.n)
    zero = Polynomial.zero(P.n)
    sharp = P.sharp(alpha) if P.lam is not None else (zero,) * P.n
    ad_star = P.ad_dual(alpha, coords) if P.algebra is not None else (zero,) * P.n
    return PolyVectorField([s - a for s, a in zip(sharp, ad_star)])


def jacobiator(F: Polynomial, G: Polynomial, H: Polynomial, P: PoissonStructure) -> Polynomial:
    """``{F,{G,H}} + {G,{H,F}} + {H,{F,G}}``."""
    _check(P, F, G, H)
    return (pbracket(F, pbracket(G, H, P), P) + pbracket(G, pbracket(H, F, P), P)
            + pbracket(H, pbracket(F, G, P), P))


def leibniz_check(F: Polynomial, G: Polynomial, H: Polynomial, P: PoissonStructure) -> Polynomial:
    """``{F, GH} - {F, G} H - G {F, H}``; identically zero."""
    return pbracket(F, G * H, P) - pbracket(F, G, P) * H - G * pbracket(F, H, P)


def characteristic_form(p: Sequence, F: Polynomial, G: Polynomial, P: PoissonStructure,
                        probes: Sequence[Polynomial] = (), certify: bool = False):
    """Value of the induced skew form on Hamiltonian vectors at ``p``, i.e. ``{F, G}(p)``.

    With ``certify=True`` every pair of probe generators whose Hamiltonian
    vectors agree at ``p`` must give the same pairing against ``F``, ``G`` and
    each probe; otherwise :class:`WellDefinednessWitness` is raised.
    """
    _check(P, F, G, *probes)
    if len(p) != P.n:
        raise DimensionMismatch(f"point has {len(p)} coordinates, structure has {P.n}")
    value = differential(F, p)
    xg = hamiltonian_field(G, P)(p)
    result = sum((a * b for a, b in zip(value, xg)), Fraction(0))
    if certify:
        gens = [F, G, *probes]
        fields = [hamiltonian_field(q, P)(p) for q in gens]
        grads = [differential(q, p) for q in gens]
        for a in range(len(gens)):
            for b in range(a + 1, len(gens)):
                if fields[a] != fields[b]:
                    continue
                for c in range(len(gens)):
                    # {A, C}(p) = -dC(p) X_A(p)
                    va = -sum((x * y for x, y in zip(grads[c], fields[a])), Fraction(0))
                    vb = -sum((x * y for x, y in zip(grads[c], fields[b])), Fraction(0))
                    vaa = pbracket(gens[a], gens[c], P)(p)
                    vbb = pbracket(gens[b], gens[c], P)(p)
                    if va != vaa or vb != vbb or vaa != vbb:
                        raise WellDefinednessWitness(
                            f"generators {a} and {b} share X(p) but pair differently with {c}",
                            witness=(a, b, c))
    return result


@dataclass(frozen=True)
class HyperplaneRestriction:
    """Bracket on the hyperplane ``{x_C = level}`` of a structure with central ``x_C``."""

    P: PoissonStructure
    index: int
    level: Fraction

    def restrict(self, F: Polynomial) -> Polynomial:
        return F.substitute(self.index, self.level)

    def bracket(self, F: Polynomial, G: Polynomial) -> Polynomial:
        return self.restrict(pbracket(F, G, self.P))

    def ideal_residual(self, F: Polynomial, G: Polynomial) -> Polynomial:
        """Restriction of ``{F, G}``; must vanish whenever ``F`` vanishes on the hyperplane."""
        if not self.restrict(F).is_zero():
            raise ValueError("F does not vanish on the hyperplane")
        return self.bracket(F, G)


def restrict_hyperplane(P: PoissonStructure, index: int, level=1) -> HyperplaneRestriction:
    if not 0 <= index < P.n:
        raise DimensionMismatch("coordinate index out of range")
    for j in range(P.n):
        if not P.coordinate_bracket(index, j).is_zero():
            raise NonCentralElement(f"x_{index + 1} does not Poisson-commute with x_{j + 1}")
    return HyperplaneRestriction(P, index, Fraction(level))


@dataclass
class QuotientReport:
    closed: bool
    samples: list = field(default_factory=list)  # (point, kernels_equal)

    @property
    def ok(self) -> bool:
        return self.closed and all(eq for _, eq in self.samples)

    def to_json(self) -> dict:
        return {"check": "redcond", "status": "pass" if self.ok else "fail",
                "residuals": [{"closed": self.closed}]
                + [{"point": [str(x) for x in m], "kernels_equal": eq} for m, eq in self.samples]}


def _in_generated_algebra(B: Polynomial, generators: Sequence[Polynomial]) -> bool:
    span = [Polynomial.constant(B.n, 1), *generators]
    monos = sorted({e for p in [B, *span] for e in p.terms})
    rows = [[p.terms.get(e, Fraction(0)) for p in span] for e in monos]
    if linalg.solve(rows, [B.terms.get(e, Fraction(0)) for e in monos]) is not None:
        return True
    if all(g.degree <= 1 for g in generators):
        # B is a polynomial in linear forms iff it is constant along their common kernel.
        lin = [[g.diff(i).constant_term for i in range(B.n)] for g in generators]
        return all(B.directional(k).is_zero() for k in linalg.nullspace(lin, B.n))
    return False


def quotient_check(P: PoissonStructure, q: Sequence[Sequence], generators: Sequence[Polynomial],
                   samples: Sequence[Sequence]) -> QuotientReport:
    """Compare ``ker q`` with the common kernel of the generator differentials at each sample."""
    _check(P, *generators)
    closed = all(_in_generated_algebra(pbracket(a, b, P), generators)
                 for i, a in enumerate(generators) for b in generators[i + 1:])
    qrows = [as_vector(r) for r in q]
    report = QuotientReport(closed)
    for m in samples:
        m = as_vector(m)
        rows = [differential(F, m) for F in generators]
        report.samples.append((m, linalg.same_kernel(rows, qrows, P.n)))
    return report


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    monitors: dict[str, np.ndarray] = field(default_factory=dict)

    def drift(self, name: str) -> float:
        m = self.monitors[name]
        return float(np.max(np.abs(m - m[0])))

    def to_csv(self, path) -> None:
        n = self.states.shape[1]
        names = list(self.monitors)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "t"] + [f"x{i + 1}" for i in range(n)] + names)
            for s in range(len(self.t)):
                w.writerow([s, f"{self.t[s]:.17g}"] + [f"{x:.17g}" for x in self.states[s]]
                           + [f"{self.monitors[k][s]:.17g}" for k in names])


def rk4_flow(H: Polynomial, P: PoissonStructure, v0: Sequence[float], h: float, steps: int,
             monitors: Mapping[str, Polynomial] | None = None) -> Trajectory:
    """Classical fixed-step RK4 for ``v' = X_H(v)`` in double precision."""
    if h <= 0:
        raise ValueError("step size must be positive")
    field_ = hamiltonian_field(H, P).compile()
    v = np.asarray(v0, dtype=float)
    if v.shape != (P.n,):
        raise DimensionMismatch("initial state has wrong length")
    states = np.empty((steps + 1, P.n))
    states[0] = v
    for s in range(steps):
        k1 = field_(v)
        k2 = field_(v + 0.5 * h * k1)
        k3 = field_(v + 0.5 * h * k2)
        k4 = field_(v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(v)):
            raise NonFinite(f"state left double range at step {s + 1}")
        states[s + 1] = v
    mon = {}
    for name, poly in (monitors or {}).items():
        mon[name] = poly.compile()(states)[:, 0]
    return Trajectory(np.arange(steps + 1) * h, states, mon)
