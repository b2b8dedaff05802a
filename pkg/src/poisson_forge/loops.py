"""Trigonometric loops in a Lie algebra, the gauge action and holonomy.

A :class:`TrigLoop` stores ``xi(t) = a0 + sum_n a_n cos(2 pi n t) + b_n sin(2 pi n t)``
in double precision. The gauge action of a loop ``g`` in a matrix group is
``xi^g = Ad_g xi - g' g^{-1}`` and holonomy solves ``gamma' = gamma xi``,
``gamma(0) = 1``.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .algebra import BilinearForm, LieAlgebra
from .errors import DimensionMismatch, FiberMismatch, NonFinite, NonPeriodic, RepresentationMismatch
from .groups import MatrixRep

TWO_PI = 2.0 * math.pi
FD_STEP = 1e-6
PERIODIC_TOL = 1e-8


class CoarseStepWarning(UserWarning):
    """Holonomy step larger than 1e-2."""


@dataclass(frozen=True, eq=False)
class TrigLoop:
    algebra: LieAlgebra
    a0: np.ndarray
    cos: np.ndarray = None
    sin: np.ndarray = None

    def __post_init__(self):
        k = self.algebra.dim
        a0 = np.asarray(self.a0, dtype=float)
        cos = np.zeros((0, k)) if self.cos is None else np.asarray(self.cos, dtype=float).reshape(-1, k)
        sin = np.zeros((0, k)) if self.sin is None else np.asarray(self.sin, dtype=float).reshape(-1, k)
        if a0.shape != (k,):
            raise DimensionMismatch(f"a0 must have length {k}")
        N = max(len(cos), len(sin))
        cos = np.vstack([cos, np.zeros((N - len(cos), k))])
        sin = np.vstack([sin, np.zeros((N - len(sin), k))])
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "cos", cos)
        object.__setattr__(self, "sin", sin)

    # -- constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, algebra: LieAlgebra, x) -> "TrigLoop":
        return cls(algebra, np.asarray(x, dtype=float))

    @classmethod
    def zero(cls, algebra: LieAlgebra) -> "TrigLoop":
        return cls(algebra, np.zeros(algebra.dim))

    @classmethod
    def mode(cls, algebra: LieAlgebra, i: int, n: int, kind: str = "cos", scale: float = 1.0) -> "TrigLoop":
        """``scale * e_i * cos(2 pi n t)`` (or ``sin``); ``n = 0`` gives a constant."""
        k = algebra.dim
        e = np.zeros(k)
        e[i] = scale
        if n == 0:
            return cls(algebra, e if kind == "cos" else np.zeros(k))
        coeffs = np.zeros((n, k))
        coeffs[n - 1] = e
        return cls(algebra, np.zeros(k), coeffs if kind == "cos" else None, coeffs if kind == "sin" else None)

    @classmethod
    def random(cls, rng: np.random.Generator, algebra: LieAlgebra, degree: int, scale: float = 1.0,
               based: bool = False) -> "TrigLoop":
        """Random loop with normal coefficients; ``based`` forces ``xi(0) = 0``."""
        k = algebra.dim
        cos = scale * rng.standard_normal((degree, k))
        sin = scale * rng.standard_normal((degree, k))
        a0 = -cos.sum(axis=0) if based else scale * rng.standard_normal(k)
        return cls(algebra, a0, cos, sin)

    # -- inspection -----------------------------------------------------------
    @property
    def degree(self) -> int:
        nz = np.nonzero(np.any(self.cos != 0, axis=1) | np.any(self.sin != 0, axis=1))[0]
        return int(nz[-1]) + 1 if len(nz) else 0

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def padded(self, N: int) -> "TrigLoop":
        if N < len(self.cos):
            raise ValueError("cannot pad to a smaller degree")
        pad = np.zeros((N - len(self.cos), self.dim))
        return TrigLoop(self.algebra, self.a0, np.vstack([self.cos, pad]), np.vstack([self.sin, pad]))

    def coefficients(self) -> np.ndarray:
        """Flat vector ``(a0, cos, sin)``, for sup-norm comparisons."""
        return np.concatenate([self.a0, self.cos.ravel(), self.sin.ravel()])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        n = np.arange(1, len(self.cos) + 1)
        phase = TWO_PI * t[..., None] * n
        return self.a0 + np.cos(phase) @ self.cos + np.sin(phase) @ self.sin

    # -- vector space ---------------------------------------------------------
    def _aligned(self, other: "TrigLoop") -> tuple["TrigLoop", "TrigLoop"]:
        if other.algebra is not self.algebra and other.algebra.c != self.algebra.c:
            raise DimensionMismatch("loops live in different Lie algebras")
        N = max(len(self.cos), len(other.cos))
        return self.padded(N), other.padded(N)

    def __add__(self, other: "TrigLoop") -> "TrigLoop":
        a, b = self._aligned(other)
        return TrigLoop(self.algebra, a.a0 + b.a0, a.cos + b.cos, a.sin + b.sin)

    def __sub__(self, other: "TrigLoop") -> "TrigLoop":
        return self + (-other)

    def __neg__(self) -> "TrigLoop":
        return self * -1.0

    def __mul__(self, s: float) -> "TrigLoop":
        return TrigLoop(self.algebra, s * self.a0, s * self.cos, s * self.sin)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coefficients()), initial=0.0))

    # -- complex Fourier form -------------------------------------------------
    def _complex(self) -> np.ndarray:
        """Coefficients ``c_m`` for ``m = -N..N`` of ``sum c_m exp(2 pi i m t)``, shape ``(2N+1, k)``."""
        N = len(self.cos)
        half = 0.5 * (self.cos - 1j * self.sin)
        return np.vstack([np.conj(half[::-1]), self.a0[None, :].astype(complex), half])

    @classmethod
    def _from_complex(cls, algebra: LieAlgebra, c: np.ndarray) -> "TrigLoop":
        N = (len(c) - 1) // 2
        pos = c[N + 1:]
        return cls(algebra, c[N].real, 2.0 * pos.real, -2.0 * pos.imag)

    def to_json(self) -> dict:
        return {"k": self.algebra.name, "N": len(self.cos), "a0": self.a0.tolist(),
                "cos": [[n + 1, row.tolist()] for n, row in enumerate(self.cos) if np.any(row)],
                "sin": [[n + 1, row.tolist()] for n, row in enumerate(self.sin) if np.any(row)]}

    @classmethod
    def from_json(cls, algebra: LieAlgebra, data: dict) -> "TrigLoop":
        N, k = int(data.get("N", 0)), algebra.dim
        cos, sin = np.zeros((N, k)), np.zeros((N, k))
        for key, target in (("cos", cos), ("sin", sin)):
            for n, coeffs in data.get(key, []):
                if not 1 <= int(n) <= N:
                    raise DimensionMismatch(f"{key} mode {n} outside 1..{N}")
                target[int(n) - 1] = coeffs
        return cls(algebra, np.asarray(data.get("a0", np.zeros(k)), dtype=float), cos, sin)


def loop_bracket(xi: TrigLoop, eta: TrigLoop) -> TrigLoop:
    """Pointwise bracket; the product-to-sum rules are a convolution of Fourier coefficients."""
    xi._aligned(eta)
    c = xi.algebra.structure_array()
    a, b = xi._complex(), eta._complex()
    out = np.zeros((len(a) + len(b) - 1, xi.dim), dtype=complex)
    for m in range(len(a)):
        out[m:m + len(b)] += np.einsum("i,nj,ijk->nk", a[m], b, c)
    return TrigLoop._from_complex(xi.algebra, out)


def _gram(form, k: int) -> np.ndarray:
    if form is None:
        return np.eye(k)
    m = form.matrix if isinstance(form, BilinearForm) else form
    m = np.array([[float(v) for v in row] for row in m])
    if m.shape != (k, k):
        raise DimensionMismatch(f"form must be {k} x {k}")
    return m


def loop_kappa(xi: TrigLoop, eta: TrigLoop, form=None) -> float:
    """``int_0^1 <xi(t), eta(t)> dt`` by Fourier orthogonality; ``form`` defaults to the identity."""
    a, b = xi._aligned(eta)
    G = _gram(form, xi.dim)
    return float(a.a0 @ G @ b.a0 + 0.5 * (np.einsum("ni,ij,nj->", a.cos, G, b.cos)
                                          + np.einsum("ni,ij,nj->", a.sin, G, b.sin)))


def loop_D(xi: TrigLoop) -> TrigLoop:
    """Derivative in ``t``."""
    n = TWO_PI * np.arange(1, len(xi.cos) + 1)[:, None]
    return TrigLoop(xi.algebra, np.zeros(xi.dim), n * xi.sin, -n * xi.cos)


def affine_flat_bracket(xi: TrigLoop, eta: TrigLoop, form=None) -> tuple[TrigLoop, float]:
    """``{xi^flat, eta^flat}`` as the pair ``([xi, eta], kappa(D xi, eta))``."""
    return loop_bracket(xi, eta), loop_kappa(loop_D(xi), eta, form)


def affine_ham_field(eta: TrigLoop) -> Callable[[TrigLoop], TrigLoop]:
    """Hamiltonian field of ``eta^flat``: ``xi -> [eta, xi] - D eta``."""
    d_eta = loop_D(eta)
    return lambda xi: loop_bracket(eta, xi) - d_eta


# -- gauge loops -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaugeLoop:
    """A loop ``g: [0, 1] -> K`` in a matrix group.

    Built from a generator (``g = exp(eta(t))``) or from an explicit path.
    """

    rep: MatrixRep
    generator: TrigLoop | None = None
    path: Callable | None = None
    is_identity: bool = False

    @classmethod
    def from_generator(cls, rep: MatrixRep, eta: TrigLoop, based: bool = False) -> "GaugeLoop":
        if eta.dim != rep.algebra.dim:
            raise RepresentationMismatch("generator loop does not match the representation")
        if based and np.max(np.abs(eta(0.0))) > 1e-12:
            raise ValueError("based gauge loop needs eta(0) = 0")
        return cls(rep, generator=eta)

    @classmethod
    def from_path(cls, rep: MatrixRep, path: Callable) -> "GaugeLoop":
        return cls(rep, path=path)

    @classmethod
    def identity(cls, rep: MatrixRep) -> "GaugeLoop":
        return cls(rep, path=lambda t: np.broadcast_to(rep.identity(), np.shape(t) + (rep.size,) * 2),
                   is_identity=True)

    @classmethod
    def constant(cls, rep: MatrixRep, g) -> "GaugeLoop":
        g = np.asarray(g)
        return cls(rep, path=lambda t: np.broadcast_to(g, np.shape(t) + g.shape))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.generator is not None:
            return scipy.linalg.expm(self.rep.matrix(self.generator(t)))
        return np.asarray(self.path(t))

    def derivative(self, t, step: float = FD_STEP) -> np.ndarray:
        """Central difference ``(g(t + h) - g(t - h)) / 2h``; error ``O(h^2)`` plus roundoff ``~eps/h``."""
        if self.is_identity:
            return np.zeros(np.shape(t) + (self.rep.size,) * 2)
        t = np.asarray(t, dtype=float)
        return (self(t + step) - self(t - step)) / (2.0 * step)

    def is_based(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self(0.0) - self.rep.identity())) <= tol)


@dataclass(frozen=True, eq=False)
class GaugedLoop:
    """Pointwise evaluator of ``Ad_g xi - g' g^{-1}``."""

    xi: Callable
    g: GaugeLoop

    def __call__(self, t) -> np.ndarray:
        x = np.asarray(self.xi(t))
        if self.g.is_identity:
            return x
        rep = self.g.rep
        gm = self.g(t)
        ginv = np.linalg.inv(gm)
        M = gm @ rep.matrix(x) @ ginv - self.g.derivative(t) @ ginv
        return rep.coords(M)


@dataclass
class SampledLoop:
    """Values on the uniform grid ``t_j = j / grid``, ``j = 0..grid`` (endpoint included)."""

    t: np.ndarray
    values: np.ndarray
    evaluator: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.t) < 2:
            raise ValueError("grid needs at least two points")

    @property
    def grid(self) -> int:
        return len(self.t) - 1

    def periodicity_residual(self) -> float:
        return float(np.max(np.abs(self.values[-1] - self.values[0])))

    def __call__(self, t) -> np.ndarray:
        if self.evaluator is not None:
            return self.evaluator(t)
        # Trigonometric interpolation through the samples.
        samples = self.values[:-1]
        N = len(samples)
        c = np.fft.fft(samples, axis=0) / N
        freqs = np.fft.fftfreq(N, d=1.0 / N)
        if N % 2 == 0:
            c[N // 2] *= 0.5
            c = np.vstack([c, c[N // 2][None]])
            freqs = np.append(freqs, N // 2)
        t = np.asarray(t, dtype=float)
        phase = np.exp(2j * np.pi * t[..., None] * freqs)
        return (phase @ c).real

    def max_distance(self, other) -> float:
        """Sup over the grid of the coordinate difference to another sampled or callable loop."""
        other_values = other.values if isinstance(other, SampledLoop) else np.asarray(other(self.t))
        return float(np.max(np.abs(self.values - other_values)))


def gauge_transform(xi: TrigLoop, g: GaugeLoop, grid: int = 256) -> SampledLoop:
    if xi.dim != g.rep.algebra.dim:
        raise RepresentationMismatch("loop and gauge representation have different algebras")
    ev = GaugedLoop(xi, g)
    t = np.linspace(0.0, 1.0, grid + 1)
    sampled = SampledLoop(t, ev(t), ev)
    gap = sampled.periodicity_residual()
    if gap > PERIODIC_TOL:
        raise NonPeriodic(f"gauge-transformed loop endpoint mismatch {gap:.3e}")
    return sampled


# -- holonomy ----------------------------------------------------------------

LoopLike = Union[TrigLoop, SampledLoop, GaugedLoop, Callable]


def _dexpinv(omega: np.ndarray, A: np.ndarray) -> np.ndarray:
    # Truncated inverse differential of exp for right-trivialized gamma' = gamma A.
    c1 = omega @ A - A @ omega
    return A + 0.5 * c1 + (omega @ c1 - c1 @ omega) / 12.0


def holonomy_path(xi: LoopLike, rep: MatrixRep, s: float = 1.0, h: float = 1e-3,
                  method: str = "rk4") -> tuple[np.ndarray, np.ndarray]:
    """Solve ``gamma' = gamma xi(t)``, ``gamma(0) = 1`` on ``[0, s]``; returns step times and ``gamma``.

    The step is shrunk so that it divides ``s``. ``method`` is ``"rk4"`` (classical,
    with polar reprojection for orthogonal/unitary groups) or ``"rkmk4"``
    (Munthe-Kaas, which stays on the group by construction).
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    if h <= 0:
        raise ValueError("step size must be positive")
    if h > 1e-2:
        warnings.warn(f"holonomy step {h} exceeds 1e-2", CoarseStepWarning, stacklevel=2)
    if method not in ("rk4", "rkmk4"):
        raise ValueError(f"unknown method {method!r}")
    steps = max(1, math.ceil(s / h - 1e-9))
    h = s / steps
    stage_t = np.linspace(0.0, s, 2 * steps + 1)
    A = rep.matrix(np.asarray(xi(stage_t)))
    gamma = rep.identity().astype(A.dtype)
    out = np.empty((steps + 1,) + gamma.shape, dtype=A.dtype)
    out[0] = gamma
    for n in range(steps):
        A0, Am, A1 = A[2 * n], A[2 * n + 1], A[2 * n + 2]
        if method == "rk4":
            k1 = gamma @ A0
            k2 = (gamma + 0.5 * h * k1) @ Am
            k3 = (gamma + 0.5 * h * k2) @ Am
            k4 = (gamma + h * k3) @ A1
            gamma = rep.reproject(gamma + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        else:
            k1 = h * A0
            k2 = h * _dexpinv(0.5 * k1, Am)
            k3 = h * _dexpinv(0.5 * k2, Am)
            k4 = h * _dexpinv(k3, A1)
            gamma = gamma @ scipy.linalg.expm((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)
        if not np.all(np.isfinite(gamma)):
            raise NonFinite(f"holonomy left double range at step {n + 1}")
        out[n + 1] = gamma
    return np.linspace(0.0, s, steps + 1), out


def holonomy(xi: LoopLike, rep: MatrixRep, s: float = 1.0, h: float = 1e-3, method: str = "rk4") -> np.ndarray:
    """``Hol_s(xi)``: the solution of ``gamma' = gamma xi`` at time ``s``."""
    return holonomy_path(xi, rep, s, h, method)[1][-1]


def holonomy_equivariance_residual(xi: TrigLoop, g: GaugeLoop, s: float = 1.0, h: float = 1e-3,
                                   method: str = "rk4") -> float:
    """``|Hol_s(xi^g) - g(0) Hol_s(xi) g(s)^{-1}|_F``."""
    rep = g.rep
    lhs = holonomy(GaugedLoop(xi, g), rep, s, h, method)
    if g.is_identity:
        rhs = holonomy(xi, rep, s, h, method)
    else:
        rhs = g(0.0) @ holonomy(xi, rep, s, h, method) @ np.linalg.inv(g(s))
    return float(np.linalg.norm(lhs - rhs))


def spectral_derivative(values: np.ndarray) -> np.ndarray:
    """Derivative of periodic samples on ``t_j = j / N`` (endpoint excluded), along axis 0."""
    N = len(values)
    freqs = np.fft.fftfreq(N, d=1.0 / N)
    if N % 2 == 0:
        freqs[N // 2] = 0.0
    shape = (N,) + (1,) * (values.ndim - 1)
    d = np.fft.ifft(np.fft.fft(values, axis=0) * (2j * np.pi * freqs).reshape(shape), axis=0)
    return d if np.iscomplexobj(values) else d.real


@dataclass
class FiberResult:
    """Recovered gauge loop ``g = gamma_eta^{-1} gamma_xi`` on the grid, plus certificates."""

    t: np.ndarray
    g: np.ndarray
    holonomy_gap: float
    base_residual: float
    periodicity: float
    gauge_residual: float

    @property
    def ok(self) -> bool:
        return self.base_residual < 1e-12 and self.periodicity < 1e-7 and self.gauge_residual < 1e-6

    def distance_to(self, g0: GaugeLoop) -> float:
        return float(np.max(np.abs(self.g - g0(self.t))))

    def to_json(self) -> dict:
        return {"check": "fiber", "status": "pass" if self.ok else "fail",
                "residuals": [{"holonomy_gap": self.holonomy_gap, "base": self.base_residual,
                               "periodicity": self.periodicity, "gauge": self.gauge_residual}]}


def fiber_recover(xi: LoopLike, eta: LoopLike, rep: MatrixRep, grid: int = 1000, tol: float = 1e-6,
                  method: str = "rk4") -> FiberResult:
    """Gauge loop carrying ``xi`` to ``eta`` when both have the same holonomy.

    ``g'`` for the certificate ``eta = xi^g`` is taken by spectral differentiation
    of the sampled ``g``, independently of how ``g`` was produced.
    """
    t, gx = holonomy_path(xi, rep, 1.0, 1.0 / grid, method)
    _, ge = holonomy_path(eta, rep, 1.0, 1.0 / grid, method)
    gap = float(np.linalg.norm(gx[-1] - ge[-1]))
    if gap > tol:
        raise FiberMismatch(f"holonomies differ by {gap:.3e}")
    g = np.linalg.inv(ge) @ gx
    ident = rep.identity()
    base = float(np.max(np.abs(g[0] - ident)))
    periodicity = float(np.max(np.abs(g[-1] - g[0])))
    # Remove the small endpoint defect linearly so the spectral derivative sees a periodic signal.
    drift = g[-1] - g[0]
    body, tt = g[:-1], t[:-1]
    dg = spectral_derivative(body - tt[:, None, None] * drift) + drift
    ginv = np.linalg.inv(body)
    xg = rep.coords(body @ rep.matrix(np.asarray(xi(tt))) @ ginv - dg @ ginv)
    residual = float(np.max(np.abs(np.asarray(eta(tt)) - xg)))
    return FiberResult(t, g, gap, base, periodicity, residual)


def write_holonomy_csv(path, t: np.ndarray, gammas: np.ndarray) -> None:
    """Rows ``t, g11, g12, ...`` (row-major; complex entries as ``re, im`` pairs)."""
    m = gammas.shape[-1]
    cplx = np.iscomplexobj(gammas)
    header = ["t"]
    for a in range(m):
        for b in range(m):
            header += [f"g{a + 1}{b + 1}_re", f"g{a + 1}{b + 1}_im"] if cplx else [f"g{a + 1}{b + 1}"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for tk, gk in zip(t, gammas):
            flat = gk.ravel()
            row = [f"{tk:.17g}"]
            for z in flat:
                row += [f"{z.real:.17g}", f"{z.imag:.17g}"] if cplx else [f"{z:.17g}"]
            w.writerow(row)
