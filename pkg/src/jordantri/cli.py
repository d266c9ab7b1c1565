"""Command-line front end.

Every subcommand reads an instance file (or a built-in instance named
``@e12-e23`` or ``@e12-e21``), runs one verifier and reports. Exit codes:
0 all checks pass, 2 hypothesis violation, 3 numerical failure, 4 I/O or
malformed input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .algebra import (GeneratorSet, associative_closure, closure_defect,
                      is_engel, jordan_closure, lie_closure, lie_from_jordan,
                      lie_ideal_generated, lower_central_series)
from .core import ToleranceConfig, as_matrix, matrix_unit, opnorm
from .errors import HypothesisViolation, JordanTriError, NotInSpectrum
from .identities import (Check, IdentityReport, cartan_criterion, cartan_T,
                         check_jordan_identities, check_norm_inequalities,
                         check_trace_words)
from .instances import gen_random
from .spectral import (ad_decomposition, adproj_formula, adproj_threshold,
                       riesz_decomposition)
from .subspace import invariance_residual
from .triangularize import NotReducible, find_invariant_subspace, triangularize

EXIT_OK, EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
SCHEMA_VERSION = 1
HARD_COND_CAP = 1e4
ORACLE_TOL = 1e-12


class InstanceError(Exception):
    """Unreadable or malformed instance file."""


# ------------------------------------------------------------------ instances

def _entries(M) -> list:
    M = as_matrix(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _matrix(obj, n: int, what: str) -> np.ndarray:
    try:
        E = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{what}: entries are not numeric pairs") from exc
    if E.shape != (n, n, 2):
        raise InstanceError(f"{what}: shape {E.shape}, expected {(n, n, 2)}")
    if not np.isfinite(E).all():
        raise InstanceError(f"{what}: non-finite entry")
    return E[..., 0] + 1j * E[..., 1]


def instance_dict(gens, seed=None, model="", label="", conjugator=None) -> dict:
    gens = [as_matrix(g) for g in gens]
    meta = {"seed": seed, "model": model, "label": label}
    if conjugator is not None:
        meta["hidden_conjugator"] = _entries(conjugator)
    return {"schema_version": SCHEMA_VERSION, "dim": gens[0].shape[0],
            "generators": [_entries(g) for g in gens], "metadata": meta}


def parse_instance(obj) -> tuple:
    """(GeneratorSet, metadata) from a decoded instance file."""
    if not isinstance(obj, dict):
        raise InstanceError("instance must be a JSON object")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema_version {obj.get('schema_version')!r}")
    n = obj.get("dim")
    if not isinstance(n, int) or n < 1:
        raise InstanceError(f"dim must be a positive integer, got {n!r}")
    gens = obj.get("generators")
    if not isinstance(gens, list) or not gens:
        raise InstanceError("generators must be a nonempty list")
    mats = [_matrix(g, n, f"generator {i}") for i, g in enumerate(gens)]
    meta = dict(obj.get("metadata") or {})
    if meta.get("hidden_conjugator") is not None:
        meta["hidden_conjugator"] = _matrix(meta["hidden_conjugator"], n, "hidden_conjugator")
    return GeneratorSet(n, tuple(mats), str(meta.get("label", ""))), meta


def builtin_instance(name: str) -> dict:
    E = lambda i, j: matrix_unit(3 if name == "e12-e23" else 2, i, j)  # noqa: E731
    if name == "e12-e23":
        return instance_dict([E(1, 2), E(2, 3)], model="canned", label="e12-e23")
    if name == "e12-e21":
        return instance_dict([E(1, 2), E(2, 1)], model="canned", label="e12-e21")
    raise InstanceError(f"unknown built-in instance @{name}")


def load_instance(path: str) -> tuple:
    if path.startswith("@"):
        return parse_instance(builtin_instance(path[1:]))
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        obj = jsonio.loads(text)
    except ValueError as exc:
        raise InstanceError(f"{path} is not valid JSON: {exc}") from exc
    return parse_instance(obj)


# -------------------------------------------------------------------- results

@dataclass
class Result:
    """What a subcommand produced: a JSON-ready payload plus its checks."""

    payload: dict
    checks: list = field(default_factory=list)
    code: int = EXIT_OK
    message: str = ""

    def status_code(self) -> int:
        if self.code:
            return self.code
        return EXIT_OK if all(c.passed for c in self.checks) else EXIT_NUMERICAL


def _report(rep: IdentityReport) -> dict:
    return {"checks": rep.to_json(), "notes": list(rep.notes), "pass": rep.passed}


def _algebra_payload(A) -> dict:
    return {"kind": A.kind, "dim": A.dim, "log": [list(e) for e in A.generation_log],
            "basis": A.space.to_json()}


# ------------------------------------------------------------------- commands

def cmd_gen_random(args, cfg) -> Result:
    cap = HARD_COND_CAP if args.hard else args.cond_cap
    try:
        inst = gen_random(args.seed, args.n, args.k, cap)
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc
    r = inst.oracle_residual()
    model = f"hidden-triangular(n={args.n}, k={args.k}, cond={cap:g})"
    payload = instance_dict(inst.generators, seed=args.seed, model=model,
                            label=f"random-{args.seed}", conjugator=inst.conjugator)
    return Result(payload, [Check("hidden conjugator triangularizes", r, ORACLE_TOL)])


def cmd_close(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    fn = {"jordan": jordan_closure, "lie": lie_closure, "assoc": associative_closure}[args.kind]
    A = fn(g, cfg)
    c = Check(f"{A.kind} closure defect", closure_defect(A), cfg.residual_tol)
    return Result(_algebra_payload(A), [c])


def cmd_lie(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    J = jordan_closure(g, cfg)
    L = lie_from_jordan(J, cfg)
    series = [S.dim for S in lower_central_series(L, cfg)]
    payload = {"jordan_dim": J.dim, "lie": _algebra_payload(L),
               "lower_central_series": series, "engel": is_engel(L, cfg)}
    return Result(payload, [Check("lie closure defect", closure_defect(L), cfg.residual_tol)])


def cmd_ideal(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    idx = _indices(args.elements, len(g))
    L = lie_closure(g, cfg)
    I = lie_ideal_generated(L, [g.gens[i] for i in idx], cfg)
    payload = {"lie_dim": L.dim, "elements": idx, "ideal": _algebra_payload(I)}
    return Result(payload, [Check("ideal closure defect", closure_defect(I), cfg.residual_tol)])


def cmd_check_traces(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    J = jordan_closure(g, cfg)
    rep = check_trace_words(J, cfg, include_ideal=args.with_ideal, seed=args.seed)
    return Result({"jordan_dim": J.dim, "report": _report(rep)}, list(rep.checks))


def cmd_check_identities(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    k = len(g)
    quad = [g.gens[i % k] for i in range(4)]
    rep = check_jordan_identities(*quad)
    checks = list(rep.checks)
    pairs = []
    for i in range(k):
        for j in range(i, k):
            r = check_norm_inequalities(g.gens[i], g.gens[j])
            pairs.append({"pair": [i, j], "report": _report(r)})
            checks.extend(r.checks)
    return Result({"jordan_identities": _report(rep), "norm_inequalities": pairs}, checks)


def _generator(g, index: int) -> np.ndarray:
    if not 0 <= index < len(g):
        raise InstanceError(f"generator index {index} out of range (instance has {len(g)})")
    return g.gens[index]


def cmd_riesz(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    A = _generator(g, args.index)
    D = riesz_decomposition(A, cfg)
    res = D.residuals(A)
    checks = [Check(f"projector {k}", float(v), cfg.residual_tol) for k, v in res.items()]
    return Result({"index": args.index, "clusters": D.to_json(), "residuals": res}, checks)


def _parse_lambda(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise InstanceError(f"cannot parse lambda {text!r}") from exc


def cmd_adproj(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    A = _generator(g, args.index)
    n = A.shape[0]
    Dad = ad_decomposition(A, cfg)
    DA = riesz_decomposition(A, cfg)
    clusters = [Dad.find(_parse_lambda(args.lam))] if args.lam is not None else list(Dad.clusters)
    thr = adproj_threshold(n, cfg)
    rows, checks = [], []
    for c in clusters:
        gap = opnorm(c.projection - adproj_formula(A, c.lam, cfg, DA))
        rows.append({"lambda": c.lam, "multiplicity": c.multiplicity, "gap": gap})
        checks.append(Check(f"ad_riesz vs formula at {c.lam.real:.6g}{c.lam.imag:+.6g}i", gap, thr))
    return Result({"index": args.index, "threshold": thr, "clusters": rows}, checks)


def cmd_cartan(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    L = lie_closure(g, cfg)
    rep = cartan_criterion(L, cfg, seed=args.seed)
    traces, checks = [], list(rep.checks)
    for i, A in enumerate(g.gens):
        T = cartan_T(A, cfg)
        D = riesz_decomposition(A, cfg)
        expect = sum(c.multiplicity * abs(c.lam) ** 2 for c in D.clusters)
        got = complex(np.trace(T @ A))
        traces.append({"index": i, "trace_TA": got, "expected": expect})
        checks.append(Check(f"tr(T A_{i}) = sum mult |lambda|^2", abs(got - expect) / (1 + expect),
                            cfg.residual_tol))
    code = EXIT_HYPOTHESIS if "hypothesis violated" in rep.notes else EXIT_OK
    payload = {"lie_dim": L.dim, "criterion": _report(rep), "cartan_T": traces}
    return Result(payload, checks, code)


def cmd_triangularize(args, cfg) -> Result:
    g, meta = load_instance(args.instance)
    cert = triangularize(g, cfg)
    payload = cert.to_json()
    S0 = meta.get("hidden_conjugator")
    if S0 is not None:
        from .instances import HiddenInstance
        payload["hidden_oracle_residual"] = HiddenInstance(g.gens, S0).oracle_residual()
    return Result(payload, [Check("strict upper triangularity", cert.residual, cfg.residual_tol)])


def cmd_reduce(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    V = find_invariant_subspace(g, cfg)
    if isinstance(V, NotReducible):
        return Result(V.to_json(), [])
    r = max(invariance_residual(x, V) for x in g.gens)
    payload = {"reducible": True, "subspace": V.to_json(), "invariance_residual": r}
    return Result(payload, [Check("invariance", r, cfg.residual_tol)])


def _section(fn, args, cfg) -> tuple:
    try:
        res = fn(args, cfg)
        code = res.status_code()
        body = res.payload
    except HypothesisViolation as exc:
        code, body = EXIT_HYPOTHESIS, {"error": type(exc).__name__, "message": str(exc)}
    except JordanTriError as exc:
        code, body = EXIT_NUMERICAL, {"error": type(exc).__name__, "message": str(exc)}
    return code, body


def cmd_verify_all(args, cfg) -> Result:
    g, _ = load_instance(args.instance)
    sections = {}
    codes = []

    def run(name, fn, **extra):
        ns = argparse.Namespace(**{**vars(args), **extra})
        code, body = _section(fn, ns, cfg)
        sections[name] = {"status": _STATUS[code], "result": body}
        codes.append(code)

    run("jordan_closure", cmd_close, kind="jordan")
    run("lie", cmd_lie)
    run("ideal", cmd_ideal, elements=None)
    run("check_traces", cmd_check_traces, with_ideal=True)
    run("check_identities", cmd_check_identities)
    for i in range(len(g)):
        run(f"riesz[{i}]", cmd_riesz, index=i)
        run(f"adproj[{i}]", cmd_adproj, index=i, lam=None)
    run("cartan", cmd_cartan)
    run("triangularize", cmd_triangularize)
    run("reduce", cmd_reduce)
    code = max(codes, default=EXIT_OK)
    return Result({"sections": sections}, [], code)


_STATUS = {EXIT_OK: "pass", EXIT_HYPOTHESIS: "hypothesis_violation",
           EXIT_NUMERICAL: "numerical_failure", EXIT_IO: "io_error"}


def _indices(text, k: int) -> list:
    if text is None:
        return [0]
    try:
        idx = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InstanceError(f"cannot parse element list {text!r}") from exc
    bad = [i for i in idx if not 0 <= i < k]
    if bad or not idx:
        raise InstanceError(f"element indices {text!r} out of range for {k} generators")
    return idx


# ---------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=float, default=argparse.SUPPRESS,
                        help="relative singular-value cutoff (default 1e-10)")
    common.add_argument("--tol-cluster", type=float, default=argparse.SUPPRESS,
                        help="eigenvalue clustering tolerance (default 1e-8)")
    common.add_argument("--tol-residual", type=float, default=argparse.SUPPRESS,
                        help="pass threshold for residuals (default 1e-8)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for generation and sampling (default 0)")
    common.add_argument("--out", metavar="FILE", default=argparse.SUPPRESS,
                        help="also write the JSON report to FILE")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print the JSON report instead of a summary")

    p = argparse.ArgumentParser(prog="jordantri", parents=[common],
                                description="Matrix algebra closures, spectral projections "
                                            "and simultaneous triangularization.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_, instance=True):
        sp = sub.add_parser(name, parents=[common], help=help_, description=help_)
        if instance:
            sp.add_argument("instance", help="instance file, '-' for stdin, or @e12-e23 / @e12-e21")
        sp.set_defaults(func=fn)
        return sp

    sp = add("gen-random", cmd_gen_random, "generate a hidden-triangularization instance",
             instance=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--cond-cap", type=float, default=1e2)
    sp.add_argument("--hard", action="store_true", help=f"use cond cap {HARD_COND_CAP:g}")

    sp = add("close", cmd_close, "closure of the generators")
    sp.add_argument("--kind", choices=["jordan", "lie", "assoc"], default="jordan")
    add("lie", cmd_lie, "Lie algebra span(J + [J, J]), lower central series, Engel test")
    sp = add("ideal", cmd_ideal, "Lie ideal generated by chosen generators in their Lie closure")
    sp.add_argument("--elements", default=None, help="comma-separated generator indices (default 0)")
    sp = add("check-traces", cmd_check_traces, "traces of words in the Jordan closure")
    sp.add_argument("--with-ideal", action="store_true",
                    help="also check the trace pairing on the generated Lie ideal")
    add("check-identities", cmd_check_identities, "Jordan identities and norm inequalities")
    sp = add("riesz", cmd_riesz, "Riesz decomposition of one generator")
    sp.add_argument("--index", type=int, default=0)
    sp = add("adproj", cmd_adproj, "Riesz projections of ad(A) against the pair formula")
    sp.add_argument("--index", type=int, default=0)
    sp.add_argument("--lambda", dest="lam", default=None, help="spectral point, e.g. 1+2i")
    add("cartan", cmd_cartan, "trace-form criterion on the Lie closure and cartan T")
    add("triangularize", cmd_triangularize, "unitary simultaneous strict triangularization")
    add("reduce", cmd_reduce, "one common invariant subspace, or irreducibility")
    add("verify-all", cmd_verify_all, "every verifier on one instance")
    return p


def _summary(command: str, res: Result, code: int) -> str:
    lines = [f"{command}: {_STATUS.get(code, 'error')}"]
    if res.message:
        lines.append(res.message)
    for c in res.checks:
        lines.append(f"  {'ok ' if c.passed else 'BAD'} {c.name}: {c.residual:.3e} "
                     f"(threshold {c.threshold:.3e})")
    if command == "verify-all":
        for name, sec in res.payload["sections"].items():
            lines.append(f"  {name}: {sec['status']}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    defaults = {"seed": 0, "out": None, "json": False}
    for k, v in defaults.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        cfg = ToleranceConfig(rank_tol=getattr(args, "tol_rank", 1e-10),
                              cluster_tol=getattr(args, "tol_cluster", 1e-8),
                              residual_tol=getattr(args, "tol_residual", 1e-8))
    except ValueError as exc:
        print(f"jordantri: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        res = args.func(args, cfg)
        code = res.status_code()
    except InstanceError as exc:
        res, code = Result({"error": "InstanceError", "message": str(exc)}), EXIT_IO
    except (HypothesisViolation, NotInSpectrum) as exc:
        res, code = Result({"error": type(exc).__name__, "message": str(exc)}), EXIT_HYPOTHESIS
    except JordanTriError as exc:
        res, code = Result({"error": type(exc).__name__, "message": str(exc)}), EXIT_NUMERICAL
    if "error" in res.payload:
        res.message = res.payload["message"]

    if args.command == "gen-random" and code == EXIT_OK:
        report = res.payload
    else:
        report = {"command": args.command, "status": _STATUS[code], "exit_code": code,
                  "checks": [c.to_json() for c in res.checks], "result": res.payload}
    text = jsonio.dumps(report) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"jordantri: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
    if args.json or (args.command == "gen-random" and not args.out):
        sys.stdout.write(text)
    else:
        print(_summary(args.command, res, code))
    if code == EXIT_IO and res.message:
        print(f"jordantri: {res.message}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
