"""Config parsing and atomic artifact writing."""
from __future__ import annotations

import contextlib
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import sympy
import tomli

from .algebra import (BUILTIN_ALGEBRAS, BilinearForm, LieAlgebra, LinearEndo, TwoCocycle, as_fraction,
                      as_matrix)
from .errors import ConfigError, PoissonForgeError
from .groups import BUILTIN_GROUPS, MatrixRep
from .loops import TrigLoop
from .poisson import PoissonStructure
from .polynomial import Polynomial


def load_config(path) -> dict:
    """Read a TOML or JSON config (chosen by suffix; ``.json`` is JSON, anything else TOML)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError("path", f"cannot read {path}: {exc.strerror}") from None
    try:
        if path.suffix == ".json":
            return json.loads(raw)
        return tomli.loads(raw.decode())
    except (json.JSONDecodeError, tomli.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("path", f"{path} does not parse: {exc}") from None


def _get(cfg: Mapping, key: str, where: str, default=...):
    if key in cfg:
        return cfg[key]
    if default is ...:
        raise ConfigError(f"{where}.{key}" if where else key, "missing")
    return default


def parse_fraction(value, key: str) -> Fraction:
    try:
        return as_fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ConfigError(key, f"not a rational number: {value!r}") from None


def parse_matrix(value, n: int, key: str) -> list[list[Fraction]]:
    if not isinstance(value, list) or len(value) != n or any(not isinstance(r, list) or len(r) != n for r in value):
        raise ConfigError(key, f"expected a {n} x {n} matrix")
    return [[parse_fraction(v, key) for v in row] for row in value]


def parse_algebra(value, key: str = "algebra") -> LieAlgebra:
    if isinstance(value, str):
        value = {"builtin": value}
    if not isinstance(value, Mapping):
        raise ConfigError(key, "expected a builtin name or a table")
    if "builtin" in value:
        name = value["builtin"]
        if name not in BUILTIN_ALGEBRAS:
            raise ConfigError(f"{key}.builtin", f"unknown algebra {name!r}; known: {sorted(BUILTIN_ALGEBRAS)}")
        return BUILTIN_ALGEBRAS[name]()
    dim = _get(value, "dim", key)
    if not isinstance(dim, int) or dim <= 0:
        raise ConfigError(f"{key}.dim", "must be a positive integer")
    entries = []
    for e in _get(value, "brackets", key, []):
        if not isinstance(e, list) or len(e) != 4:
            raise ConfigError(f"{key}.brackets", f"entry {e!r} is not [i, j, k, value]")
        i, j, k, v = e
        if not all(isinstance(x, int) and 0 <= x < dim for x in (i, j, k)):
            raise ConfigError(f"{key}.brackets", f"index out of range in {e!r}")
        entries.append((i, j, k, parse_fraction(v, f"{key}.brackets")))
    basis = _get(value, "basis", key, None)
    if basis is not None and len(basis) != dim:
        raise ConfigError(f"{key}.basis", "length differs from dim")
    return LieAlgebra.from_brackets(dim, entries, basis, value.get("name", "custom"))


def parse_polynomial(value, n: int, key: str, names: tuple[str, ...] | None = None) -> Polynomial:
    """A polynomial from ``[["p/q", [exponents]], ...]`` or an expression string in ``x1..xn``."""
    if isinstance(value, list):
        try:
            return Polynomial.from_list(n, value)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(key, f"bad polynomial term list: {exc}") from None
    if not isinstance(value, str):
        raise ConfigError(key, "polynomial must be a string or a term list")
    symbols = sympy.symbols([f"x{i + 1}" for i in range(n)])
    local = {str(s): s for s in symbols}
    for name, s in zip(names or (), symbols):
        local.setdefault(name, s)
    try:
        expr = sympy.sympify(value.replace("^", "**"), locals=local, rational=True)
        poly = sympy.Poly(expr, *symbols)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as exc:
        raise ConfigError(key, f"cannot parse polynomial {value!r}: {exc}") from None
    terms = {}
    for exps, coef in poly.terms():
        if not coef.is_Rational:
            raise ConfigError(key, f"coefficient {coef} is not rational")
        terms[tuple(exps)] = Fraction(int(coef.p), int(coef.q))
    return Polynomial(n, terms)


def parse_structure(cfg: Mapping, algebra: LieAlgebra | None, key: str = "structure") -> PoissonStructure:
    """``kind`` plus ``lambda`` (matrix) or ``kappa`` + ``derivation`` / ``inner`` for the affine term."""
    kind = _get(cfg, "kind", key)
    check = bool(cfg.get("check", False))
    if kind not in ("constant", "linear", "affine"):
        raise ConfigError(f"{key}.kind", f"must be constant, linear or affine, got {kind!r}")
    if kind == "linear":
        if algebra is None:
            raise ConfigError("algebra", "linear structure needs an algebra")
        return PoissonStructure.linear(algebra, check=check)
    n = algebra.dim if algebra is not None else cfg.get("n")
    if n is None:
        raise ConfigError(f"{key}.n", "constant structure without an algebra needs n")
    if "lambda" in cfg:
        lam = parse_matrix(cfg["lambda"], n, f"{key}.lambda")
    elif "kappa" in cfg:
        kappa = BilinearForm(parse_matrix(cfg["kappa"], n, f"{key}.kappa"))
        if "inner" in cfg:
            D = LinearEndo.inner(algebra, [parse_fraction(v, f"{key}.inner") for v in cfg["inner"]])
        else:
            D = LinearEndo(parse_matrix(_get(cfg, "derivation", key), n, f"{key}.derivation"))
        lam = [list(r) for r in TwoCocycle.from_form_and_derivation(kappa, D).matrix]
    else:
        raise ConfigError(f"{key}.lambda", f"{kind} structure needs lambda or kappa")
    if any(lam[i][j] != -lam[j][i] for i in range(n) for j in range(n)):
        raise ConfigError(f"{key}.lambda", "must be skew-symmetric")
    if kind == "constant":
        return PoissonStructure.constant(lam, check=False)
    return PoissonStructure.affine(algebra, lam, check=False)


def parse_group(value, key: str = "group", algebra: LieAlgebra | None = None) -> MatrixRep:
    if isinstance(value, str):
        if value not in BUILTIN_GROUPS:
            raise ConfigError(key, f"unknown group {value!r}; known: {sorted(BUILTIN_GROUPS)}")
        return BUILTIN_GROUPS[value]()
    if not isinstance(value, Mapping) or algebra is None:
        raise ConfigError(key, "expected a builtin group name or a table with generators")
    try:
        gens = np.asarray(_get(value, "generators", key), dtype=float)
        return MatrixRep(algebra, gens, value.get("kind", "general"), value.get("name", "custom"))
    except (ValueError, PoissonForgeError) as exc:
        raise ConfigError(f"{key}.generators", str(exc)) from None


def parse_trigloop(value, algebra: LieAlgebra, key: str) -> TrigLoop:
    if not isinstance(value, Mapping):
        raise ConfigError(key, "expected a loop table")
    try:
        return TrigLoop.from_json(algebra, value)
    except (ValueError, TypeError, PoissonForgeError) as exc:
        raise ConfigError(key, str(exc)) from None


@contextlib.contextmanager
def atomic_path(path):
    """Yield a temporary sibling path; move it onto ``path`` only if the block succeeds."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_json(path, obj: Any) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=False)
            fh.write("\n")
