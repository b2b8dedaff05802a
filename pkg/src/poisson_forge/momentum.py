"""Comomentum maps ``phi: g -> A`` and their momentum maps ``Phi: M -> g^*``."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .algebra import LieAlgebra, TwoCocycle, as_vector, is_coboundary
from .errors import DimensionMismatch, NonConstantDefect
from .poisson import PoissonStructure, differential, hamiltonian_field, pbracket
from .polynomial import Polynomial


@dataclass(frozen=True, eq=False)
class ComomentumMap:
    """Linear map ``e_i -> phi[i]`` into polynomials on the source, with optional cocycle ``omega``.

    With ``omega`` the target is the affine structure ``{H_X, H_Y} = H_[X,Y] + omega(X, Y)``.
    """

    algebra: LieAlgebra
    phi: tuple
    omega: TwoCocycle | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        if len(self.phi) != self.algebra.dim:
            raise DimensionMismatch("need one polynomial per basis element")
        if len({p.n for p in self.phi}) > 1:
            raise DimensionMismatch("polynomials over different coordinate counts")
        if self.omega is not None and self.omega.dim != self.algebra.dim:
            raise DimensionMismatch("cocycle dimension differs from the algebra")

    @property
    def n(self) -> int:
        return self.phi[0].n

    def __call__(self, X: Sequence) -> Polynomial:
        X = as_vector(X)
        out = Polynomial.zero(self.n)
        for x, p in zip(X, self.phi):
            if x:
                out = out + p * x
        return out

    def momentum_map(self) -> "MomentumMap":
        return MomentumMap(self.phi)

    def target(self) -> PoissonStructure:
        """Poisson structure on ``g^*`` that ``Phi`` should intertwine with."""
        if self.omega is None:
            return PoissonStructure.linear(self.algebra)
        return PoissonStructure.affine(self.algebra, self.omega.matrix)


@dataclass(frozen=True, eq=False)
class MomentumMap:
    """``Phi(m) = (Phi_1(m), ..., Phi_k(m))`` in the dual basis, ``Phi_k = phi(e_k)``."""

    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def n(self) -> int:
        return self.components[0].n

    def __call__(self, m: Sequence) -> tuple:
        return tuple(c(m) for c in self.components)

    def jacobian(self, m: Sequence) -> list[tuple]:
        return [differential(c, m) for c in self.components]

    def pullback(self, F: Polynomial) -> Polynomial:
        """``F o Phi``."""
        return F.compose(self.components)

    def consistency_residual(self, cm: ComomentumMap, probes: Sequence[Sequence]) -> Fraction:
        """``max |Phi(m)(e_i) - phi(e_i)(m)|`` over probes."""
        return max((abs(a(m) - b(m)) for m in probes for a, b in zip(self.components, cm.phi)),
                   default=Fraction(0))


@dataclass
class MomentumReport:
    check: str
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(_is_zero(r) for r in self.residuals.values())

    def failures(self) -> list:
        return [k for k, r in self.residuals.items() if not _is_zero(r)]

    def to_json(self) -> dict:
        return {"check": self.check, "status": "pass" if self.ok else "fail",
                "residuals": [{"key": str(k), "value": str(r)} for k, r in self.residuals.items()
                              if not _is_zero(r)]}


def _is_zero(r) -> bool:
    if isinstance(r, Polynomial):
        return r.is_zero()
    if isinstance(r, (tuple, list)):
        return all(v == 0 for v in r)
    return r == 0


def check_lie_hom(cm: ComomentumMap, P: PoissonStructure, g: LieAlgebra | None = None) -> MomentumReport:
    """Residuals ``phi([e_i, e_j]) + omega(e_i, e_j) - {phi(e_i), phi(e_j)}`` for ``i < j``."""
    g = g or cm.algebra
    report = MomentumReport("momentum-hom")
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            r = cm(g.basis_bracket(i, j)) - pbracket(cm.phi[i], cm.phi[j], P)
            if cm.omega is not None:
                r = r + cm.omega.matrix[i][j]
            report.residuals[i, j] = r
    return report


def default_probes(n: int, count: int = 5, seed: int = 0) -> list[tuple]:
    """Seeded small rational points."""
    rng = np.random.default_rng(seed)
    return [tuple(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(n))
            for _ in range(count)]


def check_equivariance(mm: MomentumMap, cm: ComomentumMap, P: PoissonStructure, g: LieAlgebra | None = None,
                       probes: Sequence[Sequence] | None = None) -> MomentumReport:
    """Compare ``T_m(Phi) X_phi(X)(m)`` with ``-Phi(m) o ad X`` (plus ``omega(., X)``) at each probe.

    Component ``k`` of the left side is ``{Phi_k, phi(X)}(m)``; of the right side
    ``Phi(m)([e_k, X]) + omega(e_k, X)``.
    """
    g = g or cm.algebra
    probes = default_probes(P.n) if probes is None else [as_vector(m) for m in probes]
    fields = [hamiltonian_field(p, P) for p in cm.phi]
    report = MomentumReport("equivariance")
    for a, m in enumerate(probes):
        jac = mm.jacobian(m)
        value = mm(m)
        for i in range(g.dim):
            Xm = fields[i](m)
            lhs = [sum((d * v for d, v in zip(row, Xm)), Fraction(0)) for row in jac]
            rhs = []
            for k in range(g.dim):
                r = sum((c * value[l] for l, c in enumerate(g.basis_bracket(k, i))), Fraction(0))
                if cm.omega is not None:
                    r += cm.omega.matrix[k][i]
                rhs.append(r)
            report.residuals[a, i] = tuple(x - y for x, y in zip(lhs, rhs))
    return report


def pullback_residual(mm: MomentumMap, F: Polynomial, G: Polynomial, P_source: PoissonStructure,
                      P_target: PoissonStructure) -> Polynomial:
    """``{Phi^* F, Phi^* G} - Phi^* {F, G}``; zero for a Poisson map."""
    return (pbracket(mm.pullback(F), mm.pullback(G), P_source)
            - mm.pullback(pbracket(F, G, P_target)))


@dataclass
class Obstruction:
    cocycle: TwoCocycle
    coboundary: tuple | None

    @property
    def lift_exists(self) -> bool:
        return self.coboundary is not None

    def to_json(self) -> dict:
        return {"check": "lift", "status": "pass",
                "residuals": [{"cocycle": [[str(v) for v in r] for r in self.cocycle.matrix],
                               "coboundary": None if self.coboundary is None else [str(v) for v in self.coboundary],
                               "lift_exists": self.lift_exists}]}


def lift_obstruction(potentials: Sequence[Polynomial], P: PoissonStructure, g: LieAlgebra) -> Obstruction:
    """Defect ``c(X, Y) = {F_X, F_Y} - F_[X,Y]`` of action potentials ``F_{e_i}``.

    The defect must be constant; its class in ``H^2(g)`` decides whether the
    potentials can be shifted by constants into a Lie homomorphism.
    """
    if len(potentials) != g.dim:
        raise DimensionMismatch("need one potential per basis element")
    cm = ComomentumMap(g, potentials)
    n = g.dim
    matrix = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = pbracket(potentials[i], potentials[j], P) - cm(g.basis_bracket(i, j))
            if not d.is_constant():
                raise NonConstantDefect(f"defect for ({g.basis[i]}, {g.basis[j]}) is {d}")
            matrix[i][j], matrix[j][i] = d.constant_term, -d.constant_term
    omega = TwoCocycle(matrix)
    return Obstruction(omega, is_coboundary(g, omega))


def compose_group_momentum(loop_of: Callable[[Sequence], "TrigLoop"], rep, s: float = 1.0,
                           h: float = 1e-3, method: str = "rk4") -> Callable[[Sequence], np.ndarray]:
    """``m -> Hol_s(Phi(m))`` for a momentum map ``Phi`` with values in the loop algebra."""
    from .loops import holonomy

    return lambda m: holonomy(loop_of(m), rep, s, h, method)
