"""Matrix representations of Lie algebras and their groups (double precision)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import LieAlgebra, abelian, so3
from .errors import RepresentationMismatch

KINDS = ("general", "orthogonal", "unitary")


@dataclass(frozen=True, eq=False)
class MatrixRep:
    """Generator matrices ``E_i`` with ``x -> sum_i x_i E_i`` a Lie algebra homomorphism.

    ``kind`` tells integrators which manifold to reproject onto.
    """

    algebra: LieAlgebra
    generators: np.ndarray
    kind: str = "general"
    name: str = ""
    _pinv: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        gens = np.asarray(self.generators)
        if gens.ndim != 3 or gens.shape[0] != self.algebra.dim or gens.shape[1] != gens.shape[2]:
            raise RepresentationMismatch(
                f"expected generators of shape ({self.algebra.dim}, m, m), got {gens.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}")
        object.__setattr__(self, "generators", gens)
        flat = gens.reshape(gens.shape[0], -1).T
        stacked = np.vstack([flat.real, flat.imag]) if np.iscomplexobj(gens) else flat
        object.__setattr__(self, "_pinv", np.linalg.pinv(stacked))

    @property
    def size(self) -> int:
        return self.generators.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.generators)

    def matrix(self, x) -> np.ndarray:
        """``sum_i x_i E_i``; ``x`` may carry leading batch axes."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.algebra.dim:
            raise RepresentationMismatch("coordinate vector does not match representation")
        return np.tensordot(x, self.generators, axes=([-1], [0]))

    def coords(self, M) -> np.ndarray:
        """Least-squares coordinates of a (batch of) matrices in the generator basis."""
        M = np.asarray(M)
        flat = M.reshape(M.shape[:-2] + (-1,))
        if self.is_complex:
            flat = np.concatenate([flat.real, flat.imag], axis=-1)
        elif np.iscomplexobj(flat):
            flat = flat.real
        return flat @ self._pinv.T

    def exp(self, x) -> np.ndarray:
        return scipy.linalg.expm(self.matrix(x))

    def identity(self) -> np.ndarray:
        return np.eye(self.size, dtype=self.generators.dtype)

    def Ad(self, g, x) -> np.ndarray:
        """Coordinates of ``g X g^{-1}``."""
        g = np.asarray(g)
        return self.coords(g @ self.matrix(x) @ np.linalg.inv(g))

    def reproject(self, g: np.ndarray) -> np.ndarray:
        """Nearest orthogonal/unitary matrix (polar factor); identity map for ``general``."""
        if self.kind == "general":
            return g
        u, _, vh = np.linalg.svd(g)
        return u @ vh

    def homomorphism_residual(self) -> float:
        """``max |[E_i, E_j] - sum_k c_ijk E_k|`` over basis pairs."""
        E, c = self.generators, self.algebra.structure_array()
        comm = np.einsum("iab,jbc->ijac", E, E) - np.einsum("jab,ibc->ijac", E, E)
        expected = np.einsum("ijk,kab->ijab", c, E)
        return float(np.abs(comm - expected).max())


def so2_rep() -> MatrixRep:
    J = np.array([[[0.0, -1.0], [1.0, 0.0]]])
    return MatrixRep(abelian(1), J, "orthogonal", "so2")


def so3_rep() -> MatrixRep:
    E = np.zeros((3, 3, 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        E[i, k, j], E[i, j, k] = 1.0, -1.0
    return MatrixRep(so3(), E, "orthogonal", "so3")


def su2_rep() -> MatrixRep:
    """``e_k = -i sigma_k / 2``, which satisfies ``[e1, e2] = e3`` cyclically."""
    sigma = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
    return MatrixRep(so3(), -0.5j * sigma, "unitary", "su2")


def translations_rep(n: int = 2) -> MatrixRep:
    """Abelian ``R^n`` as unipotent ``(n+1) x (n+1)`` matrices."""
    E = np.zeros((n, n + 1, n + 1))
    for i in range(n):
        E[i, i, n] = 1.0
    return MatrixRep(abelian(n), E, "general", f"R{n}")


BUILTIN_GROUPS = {"so2": so2_rep, "so3": so3_rep, "su2": su2_rep, "R2": translations_rep}


def builtin_group(name: str) -> MatrixRep:
    try:
        return BUILTIN_GROUPS[name]()
    except KeyError:
        raise KeyError(f"unknown group {name!r}; known: {sorted(BUILTIN_GROUPS)}") from None
