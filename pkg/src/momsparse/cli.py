"""Command-line front end.

Subcommands::

    momsparse bound cp|nn  (--matrix FILE | --builtin NAME) --t T --mode M --strength S
    momsparse extract cp|nn ...same flags... [--rank-tol R] [--seed N]
    momsparse repro table1-t1|table3|table5-t1|figure3 [--a A] [--out DIR] [--jobs N]
    momsparse export-sdpa cp|nn ...same flags... --out FILE
    momsparse gen --n N --m M [--seed S] [--mk K] [--out FILE]

Exit codes: 0 success (an infeasibility certificate counts as success),
2 bad input, 3 solver returned Unknown, 4 instance infeasible by support,
5 reproduction mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import certify as cert
from . import instances as inst
from .conic import SolverOptions, export_sdpa
from .cprank import MODES as CP_MODES, cp_bound, cp_combinatorial, cp_instance, cp_program
from .momrelax import SupportInfeasibleError
from .nnrank import MODES as NN_MODES, nn_bound, nn_combinatorial, nn_instance, nn_program

SCHEMA_VERSION = 1
STRENGTHS = ("plain", "dagger", "ddagger")
EXTRACT_TOL = 1e-10

EXIT_OK, EXIT_INPUT, EXIT_UNKNOWN, EXIT_SUPPORT, EXIT_MISMATCH = 0, 2, 3, 4, 5

ROW_FIELDS = ("instance", "family", "t", "mode", "strength", "status", "value", "time_s",
              "blocks", "nonneg", "constraints", "iterations")


class InputError(ValueError):
    pass


def load_data(name: str):
    return json.loads(resources.files("momsparse").joinpath("data", name).read_text())


def _sig(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "-"
    return format(v, ".6g")


def clean_json(obj):
    """Replace non-finite floats by ``None`` and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_json(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dump_json(rep) -> str:
    return json.dumps(clean_json(rep), indent=1, allow_nan=False)


# -- solving ---------------------------------------------------------------

def _options(tol_gap=None, tol_feas=None, max_iters=None, default_tol=None) -> SolverOptions:
    opts = SolverOptions.from_env()
    if default_tol is not None:
        if "MS_TOL_GAP" not in os.environ:
            opts.tol_gap = default_tol
        if "MS_TOL_FEAS" not in os.environ:
            opts.tol_feas = default_tol
    for k, v in (("tol_gap", tol_gap), ("tol_feas", tol_feas), ("max_iters", max_iters)):
        if v is not None:
            setattr(opts, k, v)
    return opts


def solve_bound(family: str, M, t: int, mode: str, strength: str, opts: SolverOptions):
    if family == "cp":
        return cp_bound(M, t, mode, strength, opts=opts)
    return nn_bound(M, t, mode, strength, opts=opts)


def _row(name: str, family: str, t: int, mode: str, strength: str, res=None,
         status: Optional[str] = None, elapsed: float = 0.0) -> Dict[str, object]:
    row: Dict[str, object] = {"instance": name, "family": family, "t": t, "mode": mode,
                              "strength": strength}
    if res is None:
        row.update(status=status, value=None, time_s=elapsed, blocks=[], nonneg=0,
                   constraints=0, iterations=0)
        return row
    v = float(res.value)
    row.update(status=res.status, value=v if math.isfinite(v) else None, time_s=res.wall_time,
               blocks=[int(d) for d in res.blocks],
               nonneg=int(res.program_stats.get("nonneg", 0)),
               constraints=int(res.program_stats.get("constraints", 0)),
               iterations=int(res.program_stats.get("iterations", 0)))
    if res.solution is not None and res.solution.residuals:
        row["residuals"] = {k: float(res.solution.residuals[k])
                            for k in ("pres", "dres", "gap") if k in res.solution.residuals}
    return row


def run_cell(family: str, name: str, t: int, mode: str, strength: str,
             solver: Dict[str, object]) -> Dict[str, object]:
    """One repro cell; a module-level function so worker processes can run it."""
    kind, M = inst.builtin(name)
    opts = _options(**solver)
    t0 = time.perf_counter()
    try:
        res = solve_bound(family, M, t, mode, strength, opts)
    except SupportInfeasibleError:
        return _row(name, family, t, mode, strength, status="SupportInfeasible",
                    elapsed=time.perf_counter() - t0)
    return _row(name, family, t, mode, strength, res)


def check_expect(row: Dict[str, object], expect: Dict[str, object]) -> bool:
    if "status" in expect:
        return row["status"] == expect["status"]
    if row["status"] != "Optimal" or row["value"] is None:
        return False
    v = float(row["value"])
    ok = True
    if "value" in expect:
        ok &= abs(v - float(expect["value"])) <= float(expect.get("tol", 0.0))
    if "max" in expect:
        ok &= v <= float(expect["max"])
    if "below" in expect:
        ok &= v < float(expect["below"])
    return bool(ok)


# -- input ------------------------------------------------------------------

def read_input(args) -> tuple:
    """Return ``(name, matrix, source)`` from ``--matrix`` or ``--builtin``."""
    if args.builtin:
        try:
            kind, M = inst.builtin(args.builtin)
        except (KeyError, ValueError) as exc:
            raise InputError(exc.args[0]) from None
        if kind != args.family:
            raise InputError(f"{args.builtin} is a {kind} instance, not {args.family}")
        return args.builtin, M, "builtin"
    try:
        with open(args.matrix, encoding="utf-8") as fh:
            M = inst.read_matrix(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {args.matrix}: {exc}") from None
    except ValueError as exc:
        raise InputError(f"{args.matrix}: {exc}") from None
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    try:
        if args.family == "cp":
            cp_instance(M)
        else:
            nn_instance(M)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return os.path.basename(args.matrix), M, args.matrix


def _check_mode(args) -> None:
    modes = CP_MODES if args.family == "cp" else NN_MODES
    if args.mode not in modes:
        raise InputError(f"mode {args.mode!r} is not available for {args.family}")


def _report(argv: Sequence[str], rows: List[dict], t0: float, instance=None, solver=None,
            **extra) -> Dict[str, object]:
    rep: Dict[str, object] = {"schema_version": SCHEMA_VERSION, "command": list(argv)}
    rep["instance"] = instance
    if solver is not None:
        rep["solver"] = {"tol_gap": solver.tol_gap, "tol_feas": solver.tol_feas,
                         "max_iters": solver.max_iters}
    rep["rows"] = rows
    rep.update(extra)
    rep["totals"] = {"wall_time_s": time.perf_counter() - t0}
    return rep


def rows_csv(rows: List[dict]) -> str:
    """CSV with the same values as the JSON rows (floats written with repr)."""
    buf = io.StringIO()
    cols = list(ROW_FIELDS)
    if any("a" in r for r in rows):
        cols.insert(1, "a")
    if any("pass" in r for r in rows):
        cols.append("pass")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        out = []
        for c in cols:
            v = r.get(c)
            if c == "blocks":
                v = " ".join(str(d) for d in v)
            elif v is None:
                v = ""
            elif isinstance(v, float):
                v = repr(v)
            out.append(v)
        w.writerow(out)
    return buf.getvalue()


def _emit(args, rep: Dict[str, object], text: str) -> None:
    if getattr(args, "json", False):
        print(dump_json(rep))
    elif getattr(args, "csv", False):
        sys.stdout.write(rows_csv(rep["rows"]))
    else:
        print(text)


def _row_text(r: dict) -> str:
    return (f"{r['instance']:>10} t={r['t']} {r['mode']:<5} {r['strength']:<7} "
            f"{r['status']:<16} value={_sig(r['value'])} time={_sig(r['time_s'])}s")


# -- commands ---------------------------------------------------------------

def cmd_bound(args, argv) -> int:
    t0 = time.perf_counter()
    _check_mode(args)
    name, M, source = read_input(args)
    opts = _options(args.tol_gap, args.tol_feas, args.max_iters)
    try:
        res = solve_bound(args.family, M, args.t, args.mode, args.strength, opts)
    except SupportInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    row = _row(name, args.family, args.t, args.mode, args.strength, res)
    combo = cp_combinatorial(M) if args.family == "cp" else nn_combinatorial(M)
    combo = {k: (float(v) if isinstance(v, (float, np.floating)) else int(v))
             for k, v in combo.items()}
    rep = _report(argv, [row], t0, {"name": name, "family": args.family,
                                    "shape": list(M.shape), "source": source}, opts,
                  combinatorial=combo)
    text = _row_text(row) + "\n" + "  ".join(f"{k}={_sig(v)}" for k, v in combo.items())
    _emit(args, rep, text)
    return EXIT_UNKNOWN if res.status == "Unknown" else EXIT_OK


def cmd_extract(args, argv) -> int:
    t0 = time.perf_counter()
    _check_mode(args)
    name, M, source = read_input(args)
    opts = _options(args.tol_gap, args.tol_feas, args.max_iters, default_tol=EXTRACT_TOL)
    try:
        res = solve_bound(args.family, M, args.t, args.mode, args.strength, opts)
    except SupportInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    row = _row(name, args.family, args.t, args.mode, args.strength, res)
    ext = None
    if res.status == "Optimal":
        c = cert.certify(res, M, args.t, args.family, tol_ratio=args.rank_tol, seed=args.seed)
        ext = {"flat": bool(c["flat"]), "atoms": int(c["atoms"]), "residual": c["residual"],
               "rank_tol": args.rank_tol, "blocks": c["flatness"]["blocks"],
               "measures": [m.to_dict() for m in c["measures"]]}
        if "reason" in c:
            ext["reason"] = c["reason"]
        if "value_equals_atoms" in c:
            ext["value_equals_atoms"] = c["value_equals_atoms"]
        if args.factors and c["measures"]:
            _write_factors(args.factors, c["measures"], args.family, M)
    rep = _report(argv, [row], t0, {"name": name, "family": args.family,
                                    "shape": list(M.shape), "source": source}, opts,
                  extraction=ext)
    text = _row_text(row)
    if ext is not None:
        text += (f"\nflat={str(ext['flat']).lower()} atoms={ext['atoms']} "
                 f"residual={_sig(ext['residual'])}")
        if "reason" in ext:
            text += f" ({ext['reason']})"
    _emit(args, rep, text)
    return EXIT_UNKNOWN if res.status == "Unknown" else EXIT_OK


def _write_factors(path: str, measures, family: str, M) -> None:
    """Factors as rows: ``sqrt(w) x`` for cp, ``[w a, b]`` for nn."""
    rows = []
    for m in measures:
        for p, w in zip(m.points, m.weights):
            if family == "cp":
                rows.append(np.sqrt(w) * p)
            else:
                k = M.shape[0]
                rows.append(np.concatenate([w * p[:k], p[k:]]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(inst.write_matrix(np.array(rows)))


def cmd_export(args, argv) -> int:
    _check_mode(args)
    name, M, source = read_input(args)
    build = cp_program if args.family == "cp" else nn_program
    try:
        prog, _, _ = build(M, args.t, args.mode, args.strength)
    except SupportInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    text = export_sdpa(prog)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        st = prog.stats()
        print(f"wrote {args.out}: {st['constraints']} constraints, blocks {prog.block_dims}"
              + (f" + {prog.nonneg_count} nonneg" if prog.nonneg_count else ""))
    return EXIT_OK


def cmd_gen(args, argv) -> int:
    try:
        cfg = inst.GeneratorConfig(args.n, args.m, args.seed, args.mk)
        rc = inst.gen_random_cp(cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = inst.write_matrix(rc.A)
    side = json.dumps(rc.sidecar(), indent=1)
    if args.out in (None, "-"):
        sys.stdout.write(text)
        print(side, file=sys.stderr)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(side + "\n")
    return EXIT_OK


def _suite_cells(suite: str, a: Optional[float]) -> List[dict]:
    exp = load_data("expected.json")[suite]
    if suite != "figure3":
        return [dict(c, family=exp["family"]) for c in exp["cells"]]
    if a is not None:
        grid = [a]
    else:
        k = int(round(1.0 / exp["grid_step"]))
        grid = [i / k for i in range(k + 1)]
    cells = []
    for av in grid:
        anchor = exp["anchors"].get(_anchor_key(av), {})
        for mode in exp["modes"]:
            cells.append({"instance": f"S({av:g},1)", "t": exp["t"], "mode": mode,
                          "strength": exp["strength"], "family": exp["family"], "a": av,
                          "expect": anchor.get(mode, {"status": "Optimal"})})
    return cells


def _anchor_key(a: float) -> str:
    return format(a, "g")


def cmd_repro(args, argv) -> int:
    t0 = time.perf_counter()
    if args.a is not None and args.suite != "figure3":
        raise InputError("--a only applies to figure3")
    if args.a is not None and not (0.0 <= args.a <= 1.0):
        raise InputError("--a must lie in [0, 1]")
    cells = _suite_cells(args.suite, args.a)
    solver = {"tol_gap": args.tol_gap, "tol_feas": args.tol_feas, "max_iters": args.max_iters}
    jobs = args.jobs or os.cpu_count() or 1
    calls = [(c["family"], c["instance"], c["t"], c["mode"], c["strength"], solver) for c in cells]
    if jobs > 1 and len(calls) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(run_cell, *c) for c in calls]
            rows = [f.result() for f in futs]
    else:
        rows = [run_cell(*c) for c in calls]
    failed = 0
    for c, r in zip(cells, rows):
        if "a" in c:
            r["a"] = c["a"]
        r["expected"] = c["expect"]
        r["pass"] = check_expect(r, c["expect"])
        failed += not r["pass"]
    rep = _report(argv, rows, t0, None, _options(**solver), suite=args.suite,
                  passed=failed == 0)
    rep["totals"].update(cells=len(rows), failed=failed)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{args.suite}.json"), "w", encoding="utf-8") as fh:
            fh.write(dump_json(rep) + "\n")
        with open(os.path.join(args.out, f"{args.suite}.csv"), "w", encoding="utf-8") as fh:
            fh.write(rows_csv(rows))
    lines = [("PASS " if r["pass"] else "FAIL ") + _row_text(r) for r in rows]
    lines.append(f"{args.suite}: {len(rows) - failed}/{len(rows)} cells pass "
                 f"in {_sig(rep['totals']['wall_time_s'])}s")
    _emit(args, rep, "\n".join(lines))
    return EXIT_OK if failed == 0 else EXIT_MISMATCH


# -- parser -----------------------------------------------------------------

def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-gap", type=float, help="relative duality gap tolerance (MS_TOL_GAP)")
    p.add_argument("--tol-feas", type=float, help="feasibility tolerance (MS_TOL_FEAS)")
    p.add_argument("--max-iters", type=_positive_int, help="iteration cap (MS_MAX_ITERS)")


def _instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("family", choices=("cp", "nn"))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="matrix text file ('rows cols' header, then rows)")
    src.add_argument("--builtin", help="built-in instance, e.g. ex1, edm(5), S(1,1)")
    p.add_argument("--t", type=_positive_int, default=1)
    p.add_argument("--mode", choices=("dense", "isp", "wisp"), default="dense")
    p.add_argument("--strength", choices=STRENGTHS, default="plain")
    _solver_flags(p)


def _output_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true", help="print the JSON report")
    g.add_argument("--csv", action="store_true", help="print result rows as CSV")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="momsparse",
                                 description="Moment relaxation bounds on cp-rank and nonnegative rank.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="compute one bound")
    _instance_flags(p)
    _output_flags(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("extract", help="bound, flatness test, atom extraction")
    _instance_flags(p)
    _output_flags(p)
    p.add_argument("--rank-tol", type=float, default=cert.RANK_TOL)
    p.add_argument("--seed", type=int, default=0, help="seed of the random operator combination")
    p.add_argument("--factors", help="write recovered factors to this matrix file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("repro", help="run a bundled reproduction suite")
    p.add_argument("suite", choices=("table1-t1", "table3", "table5-t1", "figure3"))
    p.add_argument("--a", type=float, help="single value of a for figure3")
    p.add_argument("--out", help="directory for the JSON and CSV reports")
    p.add_argument("--jobs", type=_positive_int, help="worker processes (default: all cores)")
    _solver_flags(p)
    _output_flags(p)
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("export-sdpa", help="write the relaxation as SDPA sparse format")
    _instance_flags(p)
    p.add_argument("--out", help="output .dat-s file (default: stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("gen", help="random sparse cp matrix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True, help="number of edges")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mk", type=_positive_int, default=2, help="factors per cover clique")
    p.add_argument("--out", help="matrix file; a .json sidecar is written next to it")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except SupportInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
