"""Command-line runner: ``poisson-forge verify|bracket|flow|holonomy|explain``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import io
from .algebra import LieAlgebra, TwoCocycle, check_cocycle, validate_lie
from .cotangent import (CotangentPoint, CotangentTangent, GeneratorAlgebra, ix_residual, omega_eval,
                        omega_oracle, random_rational_point, reduction_check)
from .errors import ConfigError, PoissonForgeError, UnknownCheck
from .groups import MatrixRep
from .loops import GaugeLoop, TrigLoop, holonomy, holonomy_equivariance_residual, holonomy_path, write_holonomy_csv
from .momentum import ComomentumMap, check_equivariance, check_lie_hom, lift_obstruction
from .poisson import PoissonStructure, hamiltonian_field, jacobiator, leibniz_check, pbracket, rk4_flow
from .polynomial import Polynomial, random_polynomial

SEED_ENV = "POISSON_FORGE_SEED"
DEFAULT_SEED = 20240601

# name -> (anchor, identity)
CHECKS: dict[str, tuple[str, str]] = {
    "lie": ("Lie bracket axioms on V_*", "[x,x] = 0 and [x,[y,z]] + cyclic = 0 on basis triples"),
    "cocycle": ("affine term is a 2-cocycle", "Lambda([X,Y],Z) + Lambda([Y,Z],X) + Lambda([Z,X],Y) = 0"),
    "antisymmetry": ("skew-symmetry of the bracket", "{F,G} + {G,F} = 0"),
    "leibniz": ("Leibniz rule", "{F,GH} = {F,G}H + G{F,H}"),
    "jacobi": ("Jacobiator as the obstruction to a Lie bracket",
               "{F,{G,H}} + {G,{H,F}} + {H,{F,G}} = 0"),
    "hamiltonian": ("Hamiltonian field X_alpha(v) = alpha^sharp - (ad_0 alpha)^* v", "{F,H} = dF . X_H"),
    "commutator": ("commutator of Hamiltonian fields", "[X_F, X_G] = X_{G,F}"),
    "product": ("Hamiltonian field of a product", "X_FG = F X_G + G X_F"),
    "separation": ("differentials of generators separate tangent vectors",
                   "the coordinate differentials have rank n at every point"),
    "casimir": ("Casimirs are conserved by Hamiltonian flows", "max |C(v(t)) - C(v(0))| below tolerance"),
    "momentum-hom": ("comomentum map is a Lie homomorphism", "phi([X,Y]) + omega(X,Y) = {phi(X), phi(Y)}"),
    "equivariance": ("infinitesimal equivariance of the momentum map",
                     "T_m(Phi) X_phi(X)(m) = -Phi(m) o ad X (+ omega(., X))"),
    "lift": ("lift obstruction as a central extension class",
             "c(X,Y) = {F_X,F_Y} - F_[X,Y] is constant; a lift exists iff c is a coboundary"),
    "hol-exp": ("holonomy of constant loops is the exponential", "Hol_s(X) = exp(sX)"),
    "holeq": ("gauge equivariance of holonomy", "Hol_s(Ad_g xi - g'g^-1) = g(0) Hol_s(xi) g(s)^-1"),
    "fiber": ("holonomy fibers are based gauge orbits", "g = gamma_eta^-1 gamma_xi satisfies eta = xi^g"),
    "redcond": ("quotient condition for Poisson reduction",
                "ker T_m(q) = {v : dF(m) v = 0 for all generators F}"),
    "ix": ("symplectic form against the lifted left action", "Omega(X_sigma(p), (beta, Y.g)) = beta(X)"),
    "omega-oracle": ("Omega = -dTheta", "closed form agrees with a finite-difference exterior derivative"),
}


def explain(name: str) -> str:
    if name not in CHECKS:
        raise UnknownCheck(f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}")
    anchor, identity = CHECKS[name]
    return f"{name}\n  anchor:   {anchor}\n  identity: {identity}"


@dataclass
class CheckResult:
    name: str
    status: str
    max_residual: str
    probes: int
    wall_time: float
    detail: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "anchor": CHECKS.get(self.name, ("", ""))[0], "status": self.status,
               "max_residual": self.max_residual, "probes": self.probes, "wall_time": round(self.wall_time, 6)}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class TaskOutput:
    task: str
    checks: list[CheckResult] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    error: str | None = None


def _poly_size(p: Polynomial) -> Fraction:
    return max((abs(c) for c in p.terms.values()), default=Fraction(0))


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _exact_check(out: TaskOutput, name: str, residuals: Callable[[], list]) -> None:
    with _Timer() as t:
        res = residuals()
    worst = max(res, default=Fraction(0))
    out.checks.append(CheckResult(name, "pass" if worst == 0 else "fail", str(worst), len(res), t.elapsed))


def _float_check(out: TaskOutput, name: str, residuals: Callable[[], list], tol: float) -> None:
    with _Timer() as t:
        res = residuals()
    worst = max(res, default=0.0)
    out.checks.append(CheckResult(name, "pass" if worst < tol else "fail", f"{worst:.6e}", len(res), t.elapsed,
                                  f"tolerance {tol:g}"))


# -- context -----------------------------------------------------------------

@dataclass
class Context:
    cfg: dict
    seed: int
    base: Path
    algebra: LieAlgebra | None
    structure: PoissonStructure | None

    def rng(self, index: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64([self.seed, index]))

    def section(self, name: str) -> dict:
        sec = self.cfg.get(name, {})
        if not isinstance(sec, Mapping):
            raise ConfigError(name, "must be a table")
        return sec

    def path(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base / p

    def poly(self, value, key: str) -> Polynomial:
        if self.structure is None:
            raise ConfigError("structure", "required for polynomial inputs")
        names = self.algebra.basis if self.algebra is not None else None
        return io.parse_polynomial(value, self.structure.n, key, names)

    def require_structure(self) -> PoissonStructure:
        if self.structure is None:
            raise ConfigError("structure", "missing")
        return self.structure


def build_context(cfg: dict, base: Path, seed_override: int | None = None) -> Context:
    seed = cfg.get("seed", DEFAULT_SEED)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise ConfigError(SEED_ENV, f"not an integer: {env!r}") from None
    if seed_override is not None:
        seed = seed_override
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", "must be a non-negative integer")
    algebra = io.parse_algebra(cfg["algebra"]) if "algebra" in cfg else None
    structure = io.parse_structure(cfg["structure"], algebra) if "structure" in cfg else None
    tasks = cfg.get("tasks", [])
    if not isinstance(tasks, list) or any(t not in TASKS for t in tasks):
        raise ConfigError("tasks", f"must be a list drawn from {sorted(TASKS)}")
    tol = cfg.get("tolerances", {})
    if not isinstance(tol, Mapping) or any(not isinstance(v, (int, float)) or v <= 0 for v in tol.values()):
        raise ConfigError("tolerances", "values must be positive numbers")
    return Context(cfg, seed, base, algebra, structure)


def _tol(ctx: Context, name: str, default: float) -> float:
    return float(ctx.cfg.get("tolerances", {}).get(name, default))


# -- tasks -------------------------------------------------------------------

def task_verify(ctx: Context, out: TaskOutput, index: int) -> None:
    sec = ctx.section("verify")
    P = ctx.require_structure()
    wanted = sec.get("checks", ["lie", "cocycle", "antisymmetry", "leibniz", "jacobi", "hamiltonian",
                                "commutator", "product", "separation"])
    unknown = [c for c in wanted if c not in CHECKS]
    if unknown:
        raise ConfigError("verify.checks", f"unknown checks {unknown}")
    probes, deg = int(sec.get("probes", 20)), int(sec.get("max_degree", 3))
    rng = ctx.rng(index)
    triples = [tuple(random_polynomial(rng, P.n, deg, int(sec.get("max_terms", 4))) for _ in range(3))
               for _ in range(probes)]
    if "lie" in wanted and P.algebra is not None:
        rep = validate_lie(P.algebra)
        out.checks.append(CheckResult("lie", "pass" if rep.ok else "fail", str(rep.max_residual),
                                      P.n ** 3, 0.0))
    if "cocycle" in wanted and P.kind == "affine":
        _exact_check(out, "cocycle", lambda: [check_cocycle(P.algebra, TwoCocycle(P.lam))])
    if "antisymmetry" in wanted:
        _exact_check(out, "antisymmetry", lambda: [_poly_size(pbracket(F, G, P) + pbracket(G, F, P))
                                                   for F, G, _ in triples])
    if "leibniz" in wanted:
        _exact_check(out, "leibniz", lambda: [_poly_size(leibniz_check(F, G, H, P)) for F, G, H in triples])
    if "jacobi" in wanted:
        xs = Polynomial.variables(P.n)
        coord = [(xs[i], xs[j], xs[k]) for i in range(P.n) for j in range(i + 1, P.n) for k in range(j + 1, P.n)]
        _exact_check(out, "jacobi", lambda: [_poly_size(jacobiator(F, G, H, P)) for F, G, H in coord + triples])
    if "hamiltonian" in wanted:
        _exact_check(out, "hamiltonian", lambda: [
            _poly_size(pbracket(F, H, P) - hamiltonian_field(H, P).apply(F)) for F, _, H in triples])
    if "commutator" in wanted:
        def commutator():
            res = []
            for F, G, _ in triples:
                d = (hamiltonian_field(F, P).lie_bracket(hamiltonian_field(G, P))
                     - hamiltonian_field(pbracket(G, F, P), P))
                res.append(max((_poly_size(c) for c in d.components), default=Fraction(0)))
            return res
        _exact_check(out, "commutator", commutator)
    if "product" in wanted:
        def product():
            res = []
            for F, G, _ in triples:
                d = (hamiltonian_field(F * G, P) - hamiltonian_field(G, P).scale(F)
                     - hamiltonian_field(F, P).scale(G))
                res.append(max((_poly_size(c) for c in d.components), default=Fraction(0)))
            return res
        _exact_check(out, "product", product)
    if "separation" in wanted:
        from . import linalg
        from .poisson import differential
        pts = [[Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(P.n)]
               for _ in range(5)]
        xs = Polynomial.variables(P.n)
        _exact_check(out, "separation", lambda: [
            Fraction(P.n - linalg.rank([differential(x, m) for x in xs], P.n)) for m in pts])


def task_bracket(ctx: Context, out: TaskOutput, index: int) -> None:
    P = ctx.require_structure()
    pairs = ctx.section("bracket").get("pairs", [])
    values = []
    for a, (F, G) in enumerate(pairs):
        B = pbracket(ctx.poly(F, f"bracket.pairs[{a}]"), ctx.poly(G, f"bracket.pairs[{a}]"), P)
        values.append({"F": str(F), "G": str(G), "bracket": str(B), "terms": B.to_list()})
    out.results["brackets"] = values


def task_flow(ctx: Context, out: TaskOutput, index: int) -> None:
    sec = ctx.section("flow")
    P = ctx.require_structure()
    H = ctx.poly(sec.get("H", "0"), "flow.H")
    v0 = sec.get("v0")
    if not isinstance(v0, list) or len(v0) != P.n:
        raise ConfigError("flow.v0", f"need a list of {P.n} numbers")
    h, steps = float(sec.get("h", 1e-3)), int(sec.get("steps", 1000))
    if h <= 0 or steps < 0:
        raise ConfigError("flow.h", "step must be positive and steps non-negative")
    monitors = {k: ctx.poly(v, f"flow.monitors.{k}") for k, v in sec.get("monitors", {}).items()}
    traj = rk4_flow(H, P, [float(x) for x in v0], h, steps, monitors)
    tol = _tol(ctx, "casimir", 1e-10)
    for name in monitors:
        _float_check(out, "casimir", lambda name=name: [traj.drift(name)], tol)
        out.checks[-1].detail += f"; monitor {name}"
    out.results["flow"] = {"steps": steps, "h": h, "final": [float(x) for x in traj.states[-1]],
                           "drift": {k: traj.drift(k) for k in monitors}}
    if "output" in sec:
        with io.atomic_path(ctx.path(sec["output"])) as tmp:
            traj.to_csv(tmp)
        out.results["flow"]["csv"] = str(sec["output"])


def _group(ctx: Context, sec: dict, key: str) -> MatrixRep:
    return io.parse_group(sec.get("group", "so3"), f"{key}.group", ctx.algebra)


def task_holonomy(ctx: Context, out: TaskOutput, index: int) -> None:
    sec = ctx.section("holonomy")
    rep = _group(ctx, sec, "holonomy")
    g = rep.algebra
    h, s = float(sec.get("h", 1e-3)), float(sec.get("s", 1.0))
    method = sec.get("method", "rk4")
    rng = ctx.rng(index)
    import scipy.linalg

    constants = [rng.standard_normal(g.dim) for _ in range(int(sec.get("constants", 3)))]
    _float_check(out, "hol-exp", lambda: [
        float(np.max(np.abs(holonomy(TrigLoop.constant(g, c), rep, s, h, method)
                            - scipy.linalg.expm(s * rep.matrix(c))))) for c in constants],
        _tol(ctx, "hol-exp", 1e-10))
    pairs = []
    scale = float(sec.get("scale", 0.3))
    for _ in range(int(sec.get("pairs", 5))):
        xi = TrigLoop.random(rng, g, int(sec.get("loop_degree", 3)), scale)
        eta = TrigLoop.random(rng, g, int(sec.get("gauge_degree", 2)), scale, based=True)
        pairs.append((xi, GaugeLoop.from_generator(rep, eta, based=True)))
    _float_check(out, "holeq", lambda: [holonomy_equivariance_residual(xi, gl, s, h, method) for xi, gl in pairs],
                 _tol(ctx, "holeq", 1e-8))
    if "loop" in sec:
        xi = io.parse_trigloop(sec["loop"], g, "holonomy.loop")
        t, gammas = holonomy_path(xi, rep, s, h, method)
        final = gammas[-1]
        out.results["holonomy"] = {"final": (np.real(final).tolist() if not np.iscomplexobj(final)
                                             else [[str(z) for z in row] for row in final])}
        if "output" in sec:
            with io.atomic_path(ctx.path(sec["output"])) as tmp:
                write_holonomy_csv(tmp, t, gammas)
            out.results["holonomy"]["csv"] = str(sec["output"])


def task_momentum(ctx: Context, out: TaskOutput, index: int) -> None:
    """Coadjoint momentum map ``Phi = id`` for the configured linear/affine structure."""
    P = ctx.require_structure()
    if P.algebra is None:
        raise ConfigError("structure.kind", "momentum task needs a linear or affine structure")
    g = P.algebra
    omega = TwoCocycle(P.lam) if P.kind == "affine" else None
    cm = ComomentumMap(g, Polynomial.variables(P.n), omega)
    rng = ctx.rng(index)
    probes = [[Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(P.n)]
              for _ in range(int(ctx.section("momentum").get("probes", 5)))]
    hom = check_lie_hom(cm, P)
    eq = check_equivariance(cm.momentum_map(), cm, P, probes=probes)
    out.checks.append(CheckResult("momentum-hom", "pass" if hom.ok else "fail", str(len(hom.failures())),
                                  len(hom.residuals), 0.0, "count of nonzero residuals"))
    out.checks.append(CheckResult("equivariance", "pass" if eq.ok else "fail", str(len(eq.failures())),
                                  len(eq.residuals), 0.0, "count of nonzero residuals"))
    ob = lift_obstruction(Polynomial.variables(P.n), P, g)
    out.results["lift"] = ob.to_json()["residuals"][0]


def task_cotangent(ctx: Context, out: TaskOutput, index: int) -> None:
    sec = ctx.section("cotangent")
    rep = _group(ctx, sec, "cotangent")
    g = rep.algebra
    magnetic = None
    if "magnetic" in sec:
        magnetic = TwoCocycle(io.parse_matrix(sec["magnetic"], g.dim, "cotangent.magnetic"))
    B = GeneratorAlgebra(rep, magnetic)
    rng = ctx.rng(index)
    n_samples = int(sec.get("samples", 20))
    with _Timer() as t:
        samples = [random_rational_point(rng, B) for _ in range(n_samples)]
        red = reduction_check(B, samples)
    out.checks.append(CheckResult("redcond", "pass" if red.ok else "fail",
                                  str(red.kernels_equal.count(False)), n_samples, t.elapsed,
                                  "count of samples with unequal kernels"))
    import scipy.linalg

    probes = []
    for _ in range(int(sec.get("form_probes", 25))):
        p = CotangentPoint(rng.standard_normal(g.dim), scipy.linalg.expm(rep.matrix(rng.standard_normal(g.dim))))
        t1 = CotangentTangent(rng.standard_normal(g.dim), rng.standard_normal(g.dim))
        t2 = CotangentTangent(rng.standard_normal(g.dim), rng.standard_normal(g.dim))
        probes.append((p, t1, t2, rng.standard_normal(g.dim)))
    _float_check(out, "ix", lambda: [abs(ix_residual(p, X, t2, g)) for p, _, t2, X in probes],
                 _tol(ctx, "ix", 1e-8))
    _float_check(out, "omega-oracle", lambda: [abs(omega_eval(p, t1, t2, g) - omega_oracle(rep, p, t1, t2))
                                               for p, t1, t2, _ in probes], _tol(ctx, "omega-oracle", 1e-6))


TASKS: dict[str, Callable[[Context, TaskOutput, int], None]] = {
    "verify": task_verify, "bracket": task_bracket, "flow": task_flow, "holonomy": task_holonomy,
    "momentum": task_momentum, "cotangent": task_cotangent,
}


def _run_task(ctx: Context, name: str, index: int) -> TaskOutput:
    out = TaskOutput(name)
    try:
        TASKS[name](ctx, out, index)
    except ConfigError:
        raise
    except (PoissonForgeError, ValueError, ArithmeticError) as exc:
        out.error = f"{type(exc).__name__}: {exc}"
    return out


def run(cfg: dict, base: Path = Path("."), tasks: list[str] | None = None, parallel: bool = False,
        seed: int | None = None) -> dict:
    """Execute the configured tasks and assemble the report (raises :class:`ConfigError`)."""
    ctx = build_context(cfg, base, seed)
    names = list(cfg.get("tasks", [])) if tasks is None else tasks
    if parallel and len(names) > 1:
        with ThreadPoolExecutor() as pool:
            outputs = list(pool.map(lambda a: _run_task(ctx, a[1], a[0]), enumerate(names)))
    else:
        outputs = [_run_task(ctx, name, i) for i, name in enumerate(names)]
    checks, results, errors = [], {}, []
    for o in outputs:
        checks += [dict(c.to_json(), task=o.task) for c in o.checks]
        results.update(o.results)
        if o.error:
            errors.append({"task": o.task, "error": o.error})
    ok = all(c["status"] == "pass" for c in checks) and not errors
    return {"seed": ctx.seed, "rng": "PCG64", "tasks": names, "status": "pass" if ok else "fail",
            "checks": checks, "results": results, "errors": errors}


def _bundled(name: str) -> Path:
    return Path(__file__).parent / "configs" / name


def resolve_config(arg: str) -> Path:
    p = Path(arg)
    if not p.exists() and _bundled(arg).exists():
        return _bundled(arg)
    return p


def _emit(report: dict, args) -> int:
    if getattr(args, "report", None):
        io.write_json(args.report, report)
    if not getattr(args, "quiet", False):
        for c in report["checks"]:
            print(f"[{c['status'].upper():4}] {c['task']:9} {c['name']:13} max_residual={c['max_residual']}")
        for e in report["errors"]:
            print(f"[ERR ] {e['task']:9} {e['error']}")
        print(json.dumps(report, indent=2) if args.json else f"status: {report['status']}")
    return 0 if report["status"] == "pass" else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="poisson-forge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="TOML or JSON config (bundled names such as so3_kks.toml also work)")
        p.add_argument("--report", help="write the JSON report here (atomically)")
        p.add_argument("--json", action="store_true", help="print the full JSON report")
        p.add_argument("--quiet", action="store_true")
        p.add_argument("--seed", type=int, help="override the config and environment seed")

    p = sub.add_parser("verify", help="run every task listed in the config")
    common(p)
    p.add_argument("--parallel", action="store_true", help="run independent tasks concurrently")
    p = sub.add_parser("bracket", help="print {F, G} for the configured structure")
    common(p)
    p.add_argument("-F", required=True)
    p.add_argument("-G", required=True)
    for name in ("flow", "holonomy"):
        common(sub.add_parser(name, help=f"run only the {name} task"))
    p = sub.add_parser("explain", help="describe a named check")
    p.add_argument("check")

    args = parser.parse_args(argv)
    try:
        if args.command == "explain":
            print(explain(args.check))
            return 0
        path = resolve_config(args.config)
        cfg = io.load_config(path)
        if args.command == "bracket":
            ctx = build_context(cfg, path.parent, args.seed)
            P = ctx.require_structure()
            B = pbracket(ctx.poly(args.F, "-F"), ctx.poly(args.G, "-G"), P)
            print(json.dumps({"bracket": str(B), "terms": B.to_list()}) if args.json else B)
            return 0
        tasks = None if args.command == "verify" else [args.command]
        report = run(cfg, path.parent, tasks, getattr(args, "parallel", False), args.seed)
        return _emit(report, args)
    except UnknownCheck as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
