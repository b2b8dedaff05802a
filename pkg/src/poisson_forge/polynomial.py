"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` over ``n`` coordinates maps exponent tuples of length
``n`` to nonzero :class:`~fractions.Fraction` coefficients.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch

Exponent = tuple[int, ...]


class Polynomial:
    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Exponent, object] | None = None):
        self.n = n
        clean: dict[Exponent, Fraction] = {}
        for exp, coef in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != n or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for {n} coordinates")
            coef = coef if isinstance(coef, Fraction) else Fraction(coef)
            if coef:
                clean[exp] = clean.get(exp, Fraction(0)) + coef
        self.terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, n: int, terms: dict[Exponent, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p.n, p.terms, p._hash = n, terms, None
        return p

    # -- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls._raw(n, {})

    @classmethod
    def constant(cls, n: int, value) -> "Polynomial":
        return cls(n, {(0,) * n: value})

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        if not 0 <= i < n:
            raise DimensionMismatch(f"variable index {i} out of range for {n} coordinates")
        return cls._raw(n, {tuple(int(k == i) for k in range(n)): Fraction(1)})

    @classmethod
    def linear(cls, coeffs: Sequence, const=0) -> "Polynomial":
        n = len(coeffs)
        terms = {tuple(int(k == i) for k in range(n)): c for i, c in enumerate(coeffs)}
        terms[(0,) * n] = const
        return cls(n, terms)

    @classmethod
    def variables(cls, n: int) -> list["Polynomial"]:
        return [cls.variable(n, i) for i in range(n)]

    # -- inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.n, Fraction(0))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.n == other.n and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(self.n, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp in sorted(self.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
            coef = self.terms[exp]
            mono = "*".join(f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(exp) if k)
            if not mono:
                parts.append(str(coef))
            elif coef == 1:
                parts.append(mono)
            elif coef == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{coef}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise DimensionMismatch(f"polynomials over {self.n} and {other.n} coordinates")
            return other
        return Polynomial.constant(self.n, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            other = Fraction(other)
            if not other:
                return Polynomial.zero(self.n)
            return Polynomial._raw(self.n, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw(self.n, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / Fraction(other))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result, base = Polynomial.constant(self.n, 1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- calculus and evaluation ----------------------------------------------
    def diff(self, i: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Polynomial._raw(self.n, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.diff(i) for i in range(self.n)]

    def directional(self, v: Sequence) -> "Polynomial":
        """Derivative along the constant vector ``v``."""
        out = Polynomial.zero(self.n)
        for i, vi in enumerate(v):
            if vi:
                out = out + self.diff(i) * vi
        return out

    def __call__(self, point: Sequence):
        """Exact value at ``point`` (rationals in, rational out; floats give floats)."""
        if len(point) != self.n:
            raise DimensionMismatch(f"point has {len(point)} coordinates, polynomial has {self.n}")
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total if self.terms else Fraction(0)

    def substitute(self, i: int, value) -> "Polynomial":
        """Replace coordinate ``i`` by a constant; the coordinate count is kept."""
        value = Fraction(value)
        out: dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            k = e[i]
            ne = e[:i] + (0,) + e[i + 1:]
            v = c * value ** k if k else c
            if v:
                out[ne] = out.get(ne, 0) + v
        return Polynomial._raw(self.n, {e: c for e, c in out.items() if c})

    def compose(self, polys: Sequence["Polynomial"]) -> "Polynomial":
        """``self(polys[0], ..., polys[n-1])``; result lives where ``polys`` live."""
        if len(polys) != self.n:
            raise DimensionMismatch("need one polynomial per coordinate")
        m = polys[0].n if polys else 0
        powers: list[dict[int, Polynomial]] = [{0: Polynomial.constant(m, 1)} for _ in polys]

        def power(i, k):
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * polys[i]
            return cache[k]

        out = Polynomial.zero(m)
        for e, c in self.terms.items():
            term = Polynomial.constant(m, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def embed(self, m: int, offset: int = 0) -> "Polynomial":
        """The same polynomial viewed in ``m >= n`` coordinates starting at ``offset``."""
        pad_l, pad_r = (0,) * offset, (0,) * (m - self.n - offset)
        return Polynomial._raw(m, {pad_l + e + pad_r: c for e, c in self.terms.items()})

    def compile(self) -> "CompiledPolynomials":
        return CompiledPolynomials([self])

    # -- serialization ---------------------------------------------------------
    def to_list(self) -> list:
        return [[str(c), list(e)] for e, c in sorted(self.terms.items())]

    @classmethod
    def from_list(cls, n: int, data: Iterable) -> "Polynomial":
        terms: dict[Exponent, Fraction] = {}
        for coef, exp in data:
            exp = tuple(int(k) for k in exp)
            terms[exp] = terms.get(exp, Fraction(0)) + Fraction(coef)
        return cls(n, terms)


class CompiledPolynomials:
    """Double-precision evaluator for a list of polynomials sharing coordinates."""

    def __init__(self, polys: Sequence[Polynomial]):
        n = polys[0].n if polys else 0
        monos = sorted({e for p in polys for e in p.terms})
        index = {e: i for i, e in enumerate(monos)}
        self.exponents = np.array(monos, dtype=float).reshape(len(monos), n)
        self.coefficients = np.zeros((len(polys), len(monos)))
        for r, p in enumerate(polys):
            for e, c in p.terms.items():
                self.coefficients[r, index[e]] = float(c)

    def __call__(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        monos = np.prod(v[..., None, :] ** self.exponents, axis=-1)
        return monos @ self.coefficients.T


def monomials(n: int, max_degree: int) -> list[Exponent]:
    out = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def random_polynomial(rng: np.random.Generator, n: int, max_degree: int = 4, max_terms: int = 5,
                      max_num: int = 5, max_den: int = 4) -> Polynomial:
    """Seeded random polynomial with small rational coefficients."""
    pool = monomials(n, max_degree)
    k = int(rng.integers(1, max_terms + 1))
    chosen = rng.choice(len(pool), size=min(k, len(pool)), replace=False)
    terms = {}
    for idx in chosen:
        num = int(rng.integers(-max_num, max_num + 1)) or 1
        terms[pool[int(idx)]] = Fraction(num, int(rng.integers(1, max_den + 1)))
    return Polynomial(n, terms)
