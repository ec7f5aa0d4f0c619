"""Command-line entry point: ``rigidgen <group> <action> [options]``.

Exit codes: 0 on pass or success, 1 on a verified failure (including an
exhausted search), 2 on usage, configuration or input errors.  Reports go to
stdout as ``rigidgen-report/1`` JSON (or an indented text rendering).  The
only non-deterministic value in a report is ``telemetry.elapsed_s``.
"""

from __future__ import annotations

import argparse
import math
import os
import random
import sys
import time
from fractions import Fraction

from . import design as design_mod
from . import fourier, oa, perm
from .core import (DEFAULT_BUDGET, RigidgenError, admissible_N,
                   check_boundedness, check_divisibility, expected_vector,
                   verify_isolation_family, verify_symmetry)
from .io import ParseError, dump_report, make_report, read_object, write_object
from .sampler import MODELS, SampleConfig, search

THREADS_ENV = "RIGIDGEN_THREADS"


class ConfigError(RigidgenError):
    """Rejected configuration; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return value


# ---------------------------------------------------------------- parsing

def _common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker cap (default ${THREADS_ENV} or 1)")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="cap on enumerated elements")


def _oa_params(parser, required=True):
    for name in ("q", "n", "t"):
        parser.add_argument(f"--{name}", type=int, required=required)


def _design_params(parser, required=True):
    for name in ("v", "k", "t"):
        parser.add_argument(f"--{name}", type=int, required=required)


def _any_family(parser):
    parser.add_argument("--family", choices=("oa", "design", "perm"),
                        required=True)
    for name in ("q", "n", "t", "v", "k"):
        parser.add_argument(f"--{name}", type=int)


def _search_opts(parser):
    parser.add_argument("--N", type=int,
                        help="sample size (default: smallest multiple of c0*m)")
    parser.add_argument("--trials", type=int, default=10**6)
    parser.add_argument("--model", choices=MODELS, default="bernoulli-subset")
    parser.add_argument("--out", help="write the found object here")
    parser.add_argument("--no-strict", action="store_true",
                        help="only require E[X] integral, not c0*m | N")
    parser.add_argument("--lower-scale", type=float, default=1.0)
    parser.add_argument("--upper-scale", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="rigidgen", description=__doc__.splitlines()[0])
    groups = top.add_subparsers(dest="group", required=True, parser_class=_Parser)

    g = groups.add_parser("oa").add_subparsers(dest="action", required=True,
                                               parser_class=_Parser)
    for action in ("build", "isolate", "search", "verify"):
        sp = g.add_parser(action)
        _common(sp)
        _oa_params(sp, required=action != "verify")
        if action == "isolate":
            sp.add_argument("--index", action="append",
                            help="basis index 'I:v', e.g. '1,2:1,1' (repeatable; "
                                 "default all)")
        if action == "search":
            _search_opts(sp)
        if action == "verify":
            sp.add_argument("--in", dest="input", required=True)

    g = groups.add_parser("design").add_subparsers(dest="action", required=True,
                                                   parser_class=_Parser)
    for action in ("build", "isolate", "search", "verify"):
        sp = g.add_parser(action)
        _common(sp)
        _design_params(sp, required=action != "verify")
        if action == "isolate":
            sp.add_argument("--index", action="append",
                            help="t-subset, e.g. '1,2' (repeatable; default all)")
        if action == "search":
            _search_opts(sp)
        if action == "verify":
            sp.add_argument("--in", dest="input", required=True)

    g = groups.add_parser("perm").add_subparsers(dest="action", required=True,
                                                 parser_class=_Parser)
    sp = g.add_parser("verify")
    _common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--t", type=int)
    sp.add_argument("--in", dest="input", required=True)
    sp = g.add_parser("fixture")
    _common(sp)
    sp.add_argument("--kind", choices=("cyclic", "affine", "mobius"), required=True)
    sp.add_argument("--size", type=int, required=True,
                    help="n for cyclic, field size q otherwise")
    sp.add_argument("--variant", choices=("nonzero-determinant", "unit-determinant"),
                    default="nonzero-determinant")
    sp.add_argument("--t", type=int, help="strength to certify (default 1/2/3)")
    sp.add_argument("--out")

    g = groups.add_parser("analyze").add_subparsers(dest="action", required=True,
                                                    parser_class=_Parser)
    for action in ("matrix", "lattice", "predict", "lemmas"):
        sp = g.add_parser(action)
        _common(sp)
        _any_family(sp)
        if action in ("predict", "lemmas"):
            sp.add_argument("--N", type=int, required=True)
        if action == "lemmas":
            sp.add_argument("--samples", type=int, default=20)
            sp.add_argument("--C", type=float, default=10.0)
            sp.add_argument("--variance", choices=fourier.VARIANCE_CONVENTIONS,
                            default="coarse")

    g = groups.add_parser("check").add_subparsers(dest="action", required=True,
                                                  parser_class=_Parser)
    sp = g.add_parser("conditions")
    _common(sp)
    _any_family(sp)
    sp.add_argument("--symmetry-pairs", type=int, default=8)
    sp.add_argument("--lower-scale", type=float, default=1.0)
    sp.add_argument("--upper-scale", type=float, default=1.0)
    return top


# ---------------------------------------------------------------- helpers

def _ints(text: str) -> tuple:
    text = text.strip()
    return tuple(int(s) for s in text.split(",")) if text else ()


def _instance(family: str, args):
    if family == "oa":
        p = oa.OAParams(args.q, args.n, args.t)
        return p, oa.build_oa_instance(p, args.budget)
    if family == "design":
        p = design_mod.DesignParams(args.v, args.k, args.t)
        return p, design_mod.build_design_instance(p, args.budget)
    return (args.n, args.t), perm.build_perm_spanning_instance(args.n, args.t,
                                                               args.budget)


def _require(args, names, family):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ConfigError(f"{family} needs --" + ", --".join(missing))


def _family_params(args):
    need = {"oa": ("q", "n", "t"), "design": ("v", "k", "t"),
            "perm": ("n", "t")}[args.family]
    _require(args, need, args.family)


def _merge_header(args, obj, names):
    """Fill missing flags from the file header; disagreement is an error."""
    for name in names:
        flag, header = getattr(args, name, None), obj.params[name]
        if flag is None:
            setattr(args, name, header)
        elif flag != header:
            raise ConfigError(f"--{name}={flag} disagrees with header {name}={header}")


# ---------------------------------------------------------------- commands

def _build(family, args):
    _, inst = _instance(family, args)
    div = check_divisibility(inst)
    bnd = check_boundedness(inst)
    result = dict(inst.summary(), c0_star=div.c0_star,
                  divisibility_consistent=div.consistent,
                  max_phi_norm_squared=bnd.max_norm_sq,
                  boundedness_passed=bnd.passed)
    return div.consistent and bnd.passed, result


def _isolate(family, args):
    p, inst = _instance(family, args)
    if family == "oa":
        if args.index:
            targets = []
            for spec in args.index:
                I, sep, v = spec.partition(":")
                if not sep:
                    raise ConfigError(f"--index {spec!r} must look like 'I:v'")
                targets.append((_ints(I), _ints(v)))
        else:
            targets = list(inst.index)
        bound = oa.lemma_count_bound(p)
    else:
        if not p.isolation_supported:
            raise ConfigError(f"isolation needs k > 2t (k={p.k}, t={p.t})")
        targets = [_ints(s) for s in args.index] if args.index else list(inst.index)
        bound = design_mod.lemma_count_bound(p)
    rows, ok = [], True
    for a in targets:
        fam = inst.isolation_family(a, budget=args.budget, seed=args.seed)
        rep = verify_isolation_family(inst, fam)
        row_ok = rep.certified and rep.count_ok
        ok &= row_ok
        rows.append({"target": a, "count": rep.count,
                     "required_count": rep.required_count,
                     "lemma_count_bound": bound,
                     "max_norm_squared": rep.max_norm_sq,
                     "c3_squared": inst.constants.c3_sq,
                     "targets_ok": rep.targets_ok, "disjoint_ok": rep.disjoint_ok,
                     "norms_ok": rep.norms_ok, "count_ok": rep.count_ok,
                     "complete_scan": fam.complete})
    return ok, {"family": family, "params": p.as_dict(), "modulus": inst.constants.m,
                "families": rows}


def _default_N(inst, strict: bool) -> int:
    if strict:
        return inst.constants.c0 * inst.constants.m
    return next(N for N in range(1, inst.size + 1)
                if expected_vector(inst, N).integral)


def _search(family, args, threads):
    p, inst = _instance(family, args)
    N = args.N if args.N is not None else _default_N(inst, not args.no_strict)
    cfg = SampleConfig(N=N, seed=args.seed, trials=args.trials, model=args.model,
                       threads=threads, strict_divisibility=not args.no_strict)
    res = search(inst, cfg)
    window = admissible_N(inst, args.lower_scale, args.upper_scale)
    result = {"family": family, "params": p.as_dict(), "N": N,
              "model": args.model, "trials_budget": args.trials,
              "found": res.found, "attempts": res.attempts, "trial": res.trial,
              "window": {"divisor": window.divisor,
                         "lower_bound": window.lower_bound,
                         "upper_bound": window.upper_bound,
                         "lower_scale": window.lower_scale,
                         "upper_scale": window.upper_scale,
                         "smallest_admissible": window.smallest},
              "notes": res.notes}
    if res.found:
        result["rows"] = res.subset
        if family == "oa":
            verdict = oa.verify_oa(res.subset, p)
        else:
            verdict = design_mod.verify_design(res.subset, p)
            result["lambda"] = verdict.lam
        result["verified"] = verdict.passed
        if args.out:
            extra = {"lambda": verdict.lam} if family == "design" else {}
            write_object(args.out, family, dict(p.as_dict(), **extra), res.subset)
            result["out"] = args.out
    return res.found, result


def _verify(family, args):
    obj = read_object(args.input, expected=family)
    if family == "oa":
        _merge_header(args, obj, ("q", "n", "t"))
        p = oa.OAParams(args.q, args.n, args.t)
        verdict = oa.verify_oa(obj.rows, p)
        result = {"passed": verdict.passed, "rows": verdict.rows,
                  "first_violation": verdict.first_violation}
    elif family == "design":
        _merge_header(args, obj, ("v", "k", "t"))
        p = design_mod.DesignParams(args.v, args.k, args.t)
        verdict = design_mod.verify_design(obj.rows, p)
        result = {"passed": verdict.passed, "blocks": verdict.blocks,
                  "lambda": verdict.lam, "simple": verdict.simple,
                  "first_violation": verdict.first_violation}
        declared = obj.params.get("lambda")
        if declared is not None and verdict.passed and declared != verdict.lam:
            result["passed"] = False
            result["lambda_mismatch"] = {"declared": declared, "derived": verdict.lam}
    else:
        _merge_header(args, obj, ("n", "t"))
        if not 1 <= args.t <= args.n:
            raise ConfigError("need 1 <= t <= n")
        verdict = perm.verify_t_wise(obj.rows, args.n, args.t)
        result = {"passed": verdict.passed, "size": verdict.size,
                  "first_violation": verdict.first_violation}
        p = None
    params = p.as_dict() if p is not None else {"n": args.n, "t": args.t}
    result.update(family=family, params=params, input=args.input)
    return result["passed"], result


_DEFAULT_T = {"cyclic": 1, "affine": 2, "mobius": 3}


def _fixture(args):
    if args.kind == "cyclic":
        perms = perm.cyclic_fixture(args.size)
    elif args.kind == "affine":
        perms = perm.affine_fixture(args.size)
    else:
        perms = perm.mobius_fixture(args.size, args.variant)
    n = len(perms[0])
    t = args.t if args.t is not None else min(_DEFAULT_T[args.kind], n)
    if not 1 <= t <= n:
        raise ConfigError("need 1 <= t <= n")
    verdict = perm.verify_t_wise(perms, n, t)
    result = {"kind": args.kind, "size": args.size, "points": n, "t": t,
              "permutations": len(perms), "passed": verdict.passed,
              "first_violation": verdict.first_violation}
    if args.kind == "mobius":
        result["variant"] = args.variant
    if args.out:
        write_object(args.out, "perm", {"n": n, "t": t}, perms)
        result["out"] = args.out
    return verdict.passed, result


def _analyze(args):
    _family_params(args)
    _, inst = _instance(args.family, args)
    if args.action == "matrix":
        R = fourier.correlation_matrix(inst)
        return True, {"index": list(inst.index), "R": [list(r) for r in R.entries],
                      "det_R": R.determinant(), "psd": R.is_psd()}
    if args.action == "lattice":
        L = fourier.enumerate_lattice_L(inst)
        M = fourier.lattice_M(inst)
        inside = set(L) <= set(M)
        closed = fourier.is_subgroup(L)
        return inside and closed, {"m": inst.constants.m, "L": L, "L_size": len(L),
                                   "M_size": len(M), "L_subset_M": inside,
                                   "L_subgroup": closed}
    if args.action == "predict":
        return True, fourier.analyzer_report(inst, args.N)
    return _lemmas(inst, args)


def _random_theta(rng: random.Random, dim: int, radius: float) -> list:
    v = [rng.gauss(0.0, 1.0) for _ in range(dim)]
    norm = math.sqrt(sum(x * x for x in v)) or 1.0
    r = radius * rng.random() ** (1 / dim)
    return [r * x / norm for x in v]


def _lemmas(inst, args):
    rng = random.Random(args.seed)
    N, C = args.N, args.C
    R = fourier.correlation_matrix(inst)
    radius = fourier.near_zero_radius(inst, N)
    near, near_ok = [], True
    for _ in range(args.samples):
        theta = _random_theta(rng, inst.dim, radius)
        chk = fourier.lemma_near_zero_check(inst, N, theta, C=C,
                                            variance=args.variance, R=R)
        near_ok &= chk.holds
        near.append({"theta_norm": chk.theta_norm, "abs_delta": chk.abs_delta,
                     "budget": chk.budget, "holds": chk.holds})
    result = {"N": N, "C": C, "variance": args.variance, "near_zero_radius": radius,
              "near_zero": near, "near_zero_holds": near_ok}
    ok = near_ok
    if inst.constants.c2 is not None:
        far = []
        for _ in range(args.samples):
            theta = [rng.uniform(-0.5, 0.5) for _ in range(inst.dim)]
            chk = fourier.lemma_far_from_M_check(inst, N, theta)
            far.append({"distance": chk.distance, "abs_coefficient": chk.abs_coefficient,
                        "bound": chk.bound, "holds": chk.holds})
        far_ok = all(r["holds"] is not False for r in far)
        result.update(far_from_M=far, far_from_M_holds=far_ok)
        ok &= far_ok
    taylor = fourier.taylor_grid(C=C, variance=args.variance)
    bad_exp = fourier.bound_by_exp_grid()
    result["taylor_grid"] = {"points": taylor["points"],
                             "failures": taylor["failures"],
                             "calibrated_constant": taylor["calibrated_constant"]}
    result["exp_bound_grid_failures"] = bad_exp
    ok &= not taylor["failures"] and not bad_exp
    return ok, result


def _check_conditions(args):
    _family_params(args)
    p, inst = _instance(args.family, args)
    rng = random.Random(args.seed)
    div = check_divisibility(inst)
    bnd = check_boundedness(inst)

    sym_ok, sym_rows = True, []
    mode = "exhaustive" if inst.size <= 5000 else "sample"
    for _ in range(args.symmetry_pairs):
        b1 = inst.element_at(rng.randrange(inst.size))
        b2 = inst.element_at(rng.randrange(inst.size))
        if args.family == "oa":
            w = oa.oa_symmetry_witness(p, oa.shift_between(p, b1, b2))
        elif args.family == "design":
            w = design_mod.design_symmetry_witness(
                p, design_mod.relabelling_between(p, b1, b2))
        else:
            w = perm.perm_symmetry_witness(args.n, args.t,
                                           perm.compose(perm.inverse(b1), b2))
        rep = verify_symmetry(inst, w, mode=mode, count=200, seed=args.seed)
        maps = w.pi(b1) == b2
        sym_ok &= rep.passed and maps
        sym_rows.append({"from": b1, "to": b2, "maps_pair": maps,
                         "passed": rep.passed, "checked": rep.checked})

    iso = {"supported": inst.isolation_fn is not None}
    iso_ok = True
    if iso["supported"]:
        worst_norm, min_count, failures = 0, None, []
        for a in inst.index:
            fam = inst.isolation_family(a, budget=args.budget, seed=args.seed)
            rep = verify_isolation_family(inst, fam)
            worst_norm = max(worst_norm, rep.max_norm_sq)
            min_count = rep.count if min_count is None else min(min_count, rep.count)
            if not (rep.certified and rep.count_ok):
                failures.append(a)
        iso_ok = not failures
        iso.update(targets=len(inst.index), max_norm_squared=worst_norm,
                   min_count=min_count,
                   required_count=math.ceil(Fraction(inst.size) / inst.constants.c2),
                   failures=failures, passed=iso_ok)

    consts = inst.constants
    table = [
        {"constant": "m", "declared": consts.m, "measured": None},
        {"constant": "c0", "declared": consts.c0, "measured": div.c0_star,
         "ok": div.consistent},
        {"constant": "c1^2", "declared": consts.c1_sq, "measured": bnd.max_norm_sq,
         "ok": bnd.passed},
        {"constant": "c2", "declared": consts.c2,
         "measured": iso.get("min_count"), "ok": iso.get("passed")},
        {"constant": "c3^2", "declared": consts.c3_sq,
         "measured": iso.get("max_norm_squared"), "ok": iso.get("passed")},
    ]
    window = admissible_N(inst, args.lower_scale, args.upper_scale)
    ok = div.consistent and bnd.passed and sym_ok and iso_ok
    return ok, {
        "instance": inst.summary(),
        "constants_table": table,
        "divisibility": {"c0_star": div.c0_star, "declared": div.declared_c0,
                         "passed": div.consistent},
        "boundedness": {"max_norm_squared": bnd.max_norm_sq, "c1_squared": bnd.c1_sq,
                        "argmax": bnd.argmax, "passed": bnd.passed},
        "symmetry": {"mode": mode, "pairs": sym_rows, "passed": sym_ok},
        "isolation": iso,
        "admissible_N": {"divisor": window.divisor, "lower_bound": window.lower_bound,
                         "upper_bound": window.upper_bound,
                         "smallest": window.smallest, "terms": window.terms},
    }


def _dispatch(args, threads):
    if args.group in ("oa", "design"):
        handler = {"build": _build, "isolate": _isolate, "verify": _verify}
        if args.action == "search":
            return _search(args.group, args, threads)
        return handler[args.action](args.group, args)
    if args.group == "perm":
        if args.action == "verify":
            return _verify("perm", args)
        return _fixture(args)
    if args.group == "analyze":
        return _analyze(args)
    return _check_conditions(args)


def main(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    command = " ".join(argv[:2]) or "rigidgen"
    fmt, seed = "json", None
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        fmt, seed = args.format, args.seed
        command = f"{args.group} {args.action}"
        threads = args.threads if args.threads is not None else _default_threads()
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        ok, result = _dispatch(args, threads)
        status, code, error = ("pass" if ok else "fail"), (0 if ok else 1), None
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (RigidgenError, ValueError, NotImplementedError, OSError) as exc:
        kind = type(exc).__name__
        error = {"kind": kind, "message": str(exc),
                 "line": getattr(exc, "line", None)}
        status, code, result = "error", 2, {}
        print(f"rigidgen: {kind}: {exc}", file=sys.stderr)
    report = make_report(command, status, result, error=error,
                         telemetry={"seed": seed,
                                    "elapsed_s": round(time.perf_counter() - t0, 6)})
    dump_report(report, stdout, fmt)
    return code


__all__ = ["main", "build_parser", "ConfigError", "ParseError", "THREADS_ENV"]
