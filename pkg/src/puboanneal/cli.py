"""Command-line front end: file-based pipelines over the library modules.

Commands compose through files: ``generate`` emits DIMACS, ``encode`` and
``reduce`` emit JSON problem files, ``gap``/``scan-lambda``/``scan-driving``
consume any of them, and ``ensemble``/``fit``/``speedup`` chain through CSV
and JSON reports.  Every output embeds the run configuration and contains
no timestamps, so re-running a command reproduces its files byte for byte.

Exit codes distinguish failure classes for scripted callers: 2 usage,
3 size limit, 4 malformed input, 5 eigensolver nonconvergence, 6 generation
budget exhausted, 7 empty normalization class, 1 anything else.  Failures
emit one-line JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .circuits import (expand_zzz_to_rzz, overhead_ratio,
                       synth_cnot_from_rzz, synth_zzz, verify_circuit,
                       zzz_target)
from .encodings import EncodedProblem, encode_sat, resource_counts
from .errors import (ConvergenceError, FormatError, GenerationError,
                     NormalizationError, SizeLimitError, ToolkitError)
from .experiments import (FitResult, correlation_study, fit_exponential,
                          generate_instance, run_ensemble, speedup,
                          stats_from_samples, write_ensemble_csv)
from .polynomial import (MultilinearPolynomial, NormKind, bool_to_spin,
                         normalize)
from .quadratize import QuadratizationResult, assemble_cost, quadratize
from .sat import (CnfFormula, critical_clause_count, planted_sidecar,
                  read_dimacs, write_dimacs)
from .spectral import (DEFAULT_MAX_QUBITS, AnnealSpec, driving_scan,
                       lambda_scan, sweep)

_EXIT_CODES = ((SizeLimitError, 3), (FormatError, 4), (ConvergenceError, 5),
               (GenerationError, 6), (NormalizationError, 7))
_MAX_QUBITS_ENV = "PUBOANNEAL_MAX_QUBITS"


# ---------------------------------------------------------------- plumbing

def _config_of(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "points_out", "pairs_out", "circuit_out",
            "planted_out"}
    cfg = {"tool": "puboanneal", "version": __version__,
           "subcommand": args.subcommand}
    for key, val in sorted(vars(args).items()):
        if key in skip or key == "subcommand" or val is None:
            continue
        cfg[key] = list(val) if isinstance(val, tuple) else val
    return cfg


def _config_line(cfg: Mapping) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_json(path: str, payload: Mapping) -> None:
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _read_json_file(path: str) -> Mapping:
    with open(path) as fh:
        try:
            return json.load(fh)
        except ValueError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}")


def _load_problem(path: str):
    """Sniff a problem file: DIMACS CNF, encoding JSON, or reduction JSON.

    Returns ("cnf", CnfFormula) | ("encoding", MultilinearPolynomial) |
    ("quadratization", QuadratizationResult).
    """
    with open(path) as fh:
        text = fh.read()
    head = text.lstrip()[:1]
    if head != "{":
        return "cnf", read_dimacs(text)
    raw = json.loads(text)
    kind = raw.get("kind")
    if kind == "pubo-encoding":
        return "encoding", MultilinearPolynomial.from_json_dict(
            raw["polynomial"])
    if kind == "quadratization":
        return "quadratization", QuadratizationResult.from_json_dict(
            raw["quadratization"])
    raise FormatError(f"{path}: unrecognized JSON problem file "
                      f"(kind={kind!r})")


def _resolve_m(args: argparse.Namespace, n: int) -> int | None:
    if getattr(args, "m", None) is not None:
        return args.m
    if getattr(args, "m_rule", None) == "critical":
        return critical_clause_count(n)
    return None


def _parse_values(expr: str, flag: str) -> list[float]:
    try:
        vals = [float(tok) for tok in expr.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"{flag}: expected comma-separated floats, "
                         f"got {expr!r}")
    if not vals:
        raise ValueError(f"{flag}: empty list")
    return vals


def _grid_values(args, values_flag: str, lo_flag: str, hi_flag: str,
                 steps_flag: str) -> list[float]:
    expr = getattr(args, values_flag)
    lo = getattr(args, lo_flag)
    hi = getattr(args, hi_flag)
    steps = getattr(args, steps_flag)
    if expr is not None:
        return _parse_values(expr, "--" + values_flag.replace("_", "-"))
    if lo is None or hi is None or steps is None:
        raise ValueError(
            f"need --{values_flag.replace('_', '-')} or all of "
            f"--{lo_flag.replace('_', '-')}/--{hi_flag.replace('_', '-')}/"
            f"--{steps_flag.replace('_', '-')}")
    if steps < 2 or hi <= lo:
        raise ValueError("scan range needs steps >= 2 and max > min")
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def _cost_from(source, form: str, lam: float):
    """Build the normalized cost Hamiltonian along the requested pipeline.

    Returns (cost, norm_kind, n_ancillas).  The PUBO path falls back
    through coefficient classes like the ensemble runner; the QUBO path is
    strict so an instance without quadratic couplings is a real error.
    """
    kind_tag, payload = source
    if form == "qubo":
        if kind_tag == "quadratization":
            q = payload
        else:
            poly = payload if kind_tag == "encoding" else (
                encode_sat(payload).polynomial)
            q = quadratize(poly)
        return assemble_cost(q, lam), NormKind.QUBO.value, q.n_ancillas
    if kind_tag == "quadratization":
        raise ValueError("a reduction file is already quadratic; "
                         "use --form qubo")
    poly = payload if kind_tag == "encoding" else encode_sat(payload).polynomial
    h = bool_to_spin(poly)
    for kind in (NormKind.PUBO, NormKind.QUBO, NormKind.LOCAL_ONLY):
        try:
            return normalize(h, kind), kind.value, 0
        except NormalizationError:
            continue
    raise NormalizationError("cost Hamiltonian has no nonzero couplings")


def _csv_text(cfg: Mapping, header: Sequence[str],
              rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {_config_line(cfg)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ---------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    n = args.n
    f = generate_instance(args.gen, n, seed=args.seed, m=_resolve_m(args, n),
                          require_unique=args.require_unique)
    cfg = _config_of(args)
    comments = [f"config: {_config_line(cfg)}"]
    _write_text(args.out, write_dimacs(f, comments=comments))
    if args.planted_out:
        if f.planted is None:
            raise ValueError("generator produced no planted assignment")
        _write_text(args.planted_out, planted_sidecar(f))
    return 0


def cmd_encode(args) -> int:
    kind, payload = _load_problem(args.input)
    if kind != "cnf":
        raise ValueError("encode expects a DIMACS CNF input")
    enc: EncodedProblem = encode_sat(payload)
    _write_json(args.out, {
        "config": _config_of(args),
        "kind": "pubo-encoding",
        "provenance": enc.provenance,
        "declared_degree": enc.declared_degree,
        "n_vars": enc.polynomial.n_vars,
        "polynomial": enc.polynomial.to_json_dict(),
    })
    return 0


def cmd_reduce(args) -> int:
    kind, payload = _load_problem(args.input)
    if kind == "quadratization":
        raise ValueError("input is already a reduction file")
    poly = payload if kind == "encoding" else encode_sat(payload).polynomial
    q = quadratize(poly)
    _write_json(args.out, {
        "config": _config_of(args),
        "kind": "quadratization",
        "n_original": q.n_original,
        "n_ancillas": q.n_ancillas,
        "quadratization": q.to_json_dict(),
    })
    return 0


def cmd_gap(args) -> int:
    source = _load_problem(args.input)
    cost, norm_kind, n_anc = _cost_from(source, args.form, args.lam)
    res = sweep(AnnealSpec(cost=cost, hx_over_j=args.hx_over_j,
                           grid=args.grid, solver=args.solver,
                           max_qubits=args.max_qubits))
    cfg = _config_of(args)
    _write_json(args.out, {
        "config": cfg,
        "kind": "gap-summary",
        "formulation": args.form,
        "norm_kind": norm_kind,
        "n_spins": res.n_spins,
        "n_ancillas": n_anc,
        "min_gap": res.min_gap,
        "s_min": res.s_min,
        "v_over_j": res.v_over_j,
        "t_times_j": res.t_times_j,
        "solver": res.solver,
        "warnings": list(res.warnings),
    })
    if args.points_out:
        rows = [[_fmt(p.s), _fmt(p.e0), _fmt(p.e1), p.degeneracy_1,
                 _fmt(p.v_element)] for p in res.points]
        _write_text(args.points_out, _csv_text(
            cfg, ["s", "e0", "e1", "degeneracy_1", "v_element"], rows))
    return 0


def cmd_scan_lambda(args) -> int:
    kind, payload = _load_problem(args.input)
    if kind == "quadratization":
        q = payload
    else:
        poly = payload if kind == "encoding" else (
            encode_sat(payload).polynomial)
        q = quadratize(poly)
    lambdas = _grid_values(args, "lambdas", "lam_min", "lam_max",
                           "lam_steps")
    points = lambda_scan(q, lambdas, hx_over_j=args.hx_over_j,
                         include_sweep=not args.no_sweep, grid=args.grid,
                         solver=args.solver, max_qubits=args.max_qubits)
    rows = [[_fmt(p.lam), _fmt(p.min_gap) if p.min_gap is not None else "",
             _fmt(p.s_min) if p.s_min is not None else "",
             int(p.ground_feasible), p.n_spins, _fmt(p.scale_j)]
            for p in points]
    _write_text(args.out, _csv_text(
        _config_of(args),
        ["lambda", "min_gap", "s_min", "ground_feasible", "n_spins",
         "scale_J"], rows))
    return 0


def cmd_scan_driving(args) -> int:
    source = _load_problem(args.input)
    cost, _, _ = _cost_from(source, args.form, args.lam)
    hx_values = _grid_values(args, "hx_values", "hx_min", "hx_max",
                             "hx_steps")
    points = driving_scan(cost, hx_values, grid=args.grid,
                          solver=args.solver, max_qubits=args.max_qubits)
    rows = [[_fmt(p.hx_over_j), _fmt(p.min_gap), _fmt(p.s_min),
             _fmt(p.v_over_j), _fmt(p.t_times_j), _fmt(p.g_c),
             _fmt(p.delta_c), _fmt(p.predicted_gap)] for p in points]
    _write_text(args.out, _csv_text(
        _config_of(args),
        ["hx_over_J", "min_gap", "s_min", "V_over_J", "T_times_J", "g_c",
         "delta_c", "predicted_gap"], rows))
    return 0


def cmd_ensemble(args) -> int:
    stats = run_ensemble(args.gen, args.n, count=args.count,
                         formulation=args.form, lam=args.lam,
                         hx_over_j=args.hx_over_j, seed=args.seed,
                         m=_resolve_m(args, args.n),
                         require_unique=args.require_unique,
                         grid=args.grid, solver=args.solver,
                         max_qubits=args.max_qubits, jobs=args.jobs)
    buf = io.StringIO()
    buf.write(f"# config: {_config_line(_config_of(args))}\n")
    write_ensemble_csv([stats], buf)
    _write_text(args.out, buf.getvalue())
    if stats.failures:
        for rec in stats.failures:
            print(f"warning: instance {rec.index} failed: {rec.error}",
                  file=sys.stderr)
    return 0


def _read_ensemble_csv(paths: Sequence[str]):
    groups: dict[tuple, dict[str, list[float]]] = {}
    for path in paths:
        with open(path) as fh:
            rows = [r for r in csv.reader(
                ln for ln in fh if not ln.startswith("#"))]
        if not rows or rows[0][:3] != ["generator", "N", "formulation"]:
            raise FormatError(f"{path}: not an ensemble CSV")
        for row in rows[1:]:
            try:
                gen, n, form = row[0], int(row[1]), row[2]
                gap, v = float(row[4]), float(row[5])
            except (IndexError, ValueError) as exc:
                raise FormatError(f"{path}: bad row {row!r}: {exc}")
            cell = groups.setdefault((gen, form, n),
                                     {"gaps": [], "vs": []})
            cell["gaps"].append(gap)
            cell["vs"].append(v)
    return groups


def cmd_fit(args) -> int:
    groups = _read_ensemble_csv(args.input)
    keys = {(gen, form) for gen, form, _ in groups}
    if len(keys) != 1:
        raise ValueError(
            f"fit expects one (generator, formulation), found {sorted(keys)}")
    (gen, form), = keys
    stats = [stats_from_samples(gen, n, form, cell["gaps"], cell["vs"])
             for (_, _, n), cell in sorted(groups.items(),
                                           key=lambda kv: kv[0][2])]
    exclude = ([int(tok) for tok in args.exclude_n.split(",") if tok]
               if args.exclude_n else [])
    fit = fit_exponential(stats, exclude=exclude, n_boot=args.n_boot,
                          boot_seed=args.boot_seed)
    _write_json(args.out, {
        "config": _config_of(args),
        "kind": "fit",
        "generator": gen,
        "formulation": form,
        "epsilon_over_j": fit.epsilon_over_j,
        "alpha": fit.alpha,
        "epsilon_err": fit.epsilon_err,
        "alpha_err": fit.alpha_err,
        "n_values": list(fit.n_values),
        "mean_v": fit.mean_v,
    })
    return 0


def _fit_from_json(path: str) -> FitResult:
    raw = _read_json_file(path)
    if raw.get("kind") != "fit":
        raise FormatError(f"{path}: not a fit report")
    return FitResult(
        epsilon_over_j=float(raw["epsilon_over_j"]),
        alpha=float(raw["alpha"]),
        epsilon_err=float(raw["epsilon_err"]),
        alpha_err=float(raw["alpha_err"]),
        n_values=tuple(int(x) for x in raw["n_values"]),
        mean_v=float(raw["mean_v"]))


def cmd_speedup(args) -> int:
    fit_p = _fit_from_json(args.fit_p)
    fit_q = _fit_from_json(args.fit_q)
    est = speedup(fit_p, fit_q, vq_over_vp=args.vqvp,
                  j3_over_j2=args.j3j2, n=args.n)
    _write_json(args.out, {
        "config": _config_of(args),
        "kind": "speedup",
        **est.to_json_dict(),
    })
    return 0


def cmd_synth_verify(args) -> int:
    theta = args.theta
    zzz = synth_zzz(theta)
    zzz_report = verify_circuit(zzz, zzz_target(theta), "ZZZ from CNOTs")
    cnot = synth_cnot_from_rzz()
    expanded, stats = expand_zzz_to_rzz(theta)
    exp_report = verify_circuit(expanded, zzz_target(theta), "ZZZ from Rzz")
    payload = {
        "config": _config_of(args),
        "kind": "synthesis-verification",
        "theta": theta,
        "zzz": zzz_report.to_json_dict(),
        "cnot": {
            "chosen": cnot.source,
            "reports": [r.to_json_dict() for r in cnot.reports],
        },
        "expansion": {
            "report": exp_report.to_json_dict(),
            "counts": dict(sorted(stats.counts.items())),
            "two_qubit_count": stats.two_qubit_count,
            "single_qubit_count": stats.single_qubit_count,
            "overhead_ratio": overhead_ratio(stats),
        },
    }
    if not (zzz_report.passed and exp_report.passed):
        raise ToolkitError("synthesis verification failed: "
                           + json.dumps(payload["expansion"]["report"]))
    _write_json(args.out, payload)
    if args.circuit_out:
        _write_text(args.circuit_out,
                    f"# config: {_config_line(_config_of(args))}\n"
                    + expanded.to_text())
    return 0


def cmd_resources(args) -> int:
    payload = {"config": _config_of(args), "kind": "resources"}
    if args.input:
        kind, payload_in = _load_problem(args.input)
        if kind != "cnf":
            raise ValueError("resources expects a DIMACS CNF input")
        f: CnfFormula = payload_in
        n, m = f.n_vars, len(f.clauses)
        q = quadratize(encode_sat(f).polynomial)
        payload["ancillas_exact"] = q.n_ancillas
        payload["qubo_spins_exact"] = q.n_vars
    else:
        if args.n is None:
            raise ValueError("resources needs --in or --n")
        n = args.n
        m = _resolve_m(args, n)
        if m is None:
            raise ValueError("resources needs --m or --m-rule with --n")
    rc = resource_counts(n, m)
    payload.update({"n": n, "m": m, "pubo_qubits": rc.pubo,
                    "slack_qubo_qubits_max": rc.slack_qubo_max,
                    "mis_qubits": rc.mis, "ilp_qubits": rc.ilp})
    _write_json(args.out, payload)
    return 0


def cmd_correlate(args) -> int:
    n = args.n
    m = _resolve_m(args, n)
    if m is None:
        raise ValueError("correlate needs --m or --m-rule")
    res = correlation_study(n, m, args.count, seed=args.seed,
                            hx_over_j=args.hx_over_j, jobs=args.jobs)
    lo, hi = res.r_interval(0.95)
    hist = np.asarray(res.hist2d)
    _write_json(args.out, {
        "config": _config_of(args),
        "kind": "correlation",
        "count": res.count,
        "pearson_r": res.pearson_r,
        "abs_r_ci95": [lo, hi],
        "term_count_range": [min(res.term_counts), max(res.term_counts)],
        "hist2d": [list(map(int, row)) for row in res.hist2d],
        "term_edges": list(res.term_edges),
        "gap_edges": list(res.gap_edges),
        "term_marginal": [int(x) for x in hist.sum(axis=1)],
        "gap_marginal": [int(x) for x in hist.sum(axis=0)],
    })
    if args.pairs_out:
        rows = list(zip(res.term_counts, map(_fmt, res.gaps)))
        _write_text(args.pairs_out, _csv_text(
            _config_of(args), ["n_cubic_terms", "min_gap"], rows))
    return 0


# ----------------------------------------------------------------- parser

def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=101,
                   help="sweep grid points (default 101)")
    p.add_argument("--solver", choices=("auto", "dense", "iterative"),
                   default="auto")
    p.add_argument("--max-qubits", type=int,
                   default=int(os.environ.get(_MAX_QUBITS_ENV,
                                              DEFAULT_MAX_QUBITS)),
                   help=f"memory cap on spin count (env {_MAX_QUBITS_ENV})")


def _add_m_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--m", type=int, help="explicit clause count")
    group.add_argument("--m-rule", choices=("critical",),
                       help="critical: M = round(4.24 N)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="puboanneal",
        description="PUBO/QUBO annealing-spectrum toolkit")
    parser.add_argument("--version", action="version",
                        version=f"puboanneal {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=func, subcommand=name)
        p.add_argument("--out", default="-", help="output path (- = stdout)")
        return p

    p = add("generate", cmd_generate, help="draw a 3-SAT instance (DIMACS)")
    p.add_argument("--gen", required=True,
                   choices=("toughsat", "uniquept1", "uniquept4"))
    p.add_argument("--n", type=int, required=True)
    _add_m_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--require-unique", action="store_true",
                   help="redraw until the instance has a unique solution")
    p.add_argument("--planted-out", help="write planted assignment JSON")

    p = add("encode", cmd_encode, help="CNF -> PUBO penalty polynomial")
    p.add_argument("--in", dest="input", required=True)

    p = add("reduce", cmd_reduce, help="PUBO -> QUBO with penalty ancillas")
    p.add_argument("--in", dest="input", required=True)

    p = add("gap", cmd_gap, help="annealing sweep: minimum gap, V, T")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--form", choices=("pubo", "qubo"), default="pubo")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--hx-over-j", type=float, default=1.0)
    p.add_argument("--points-out", help="write the per-s spectrum CSV")
    _add_solver_flags(p)

    p = add("scan-lambda", cmd_scan_lambda,
            help="gap versus penalty strength for a reduction")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lambdas", help="comma-separated values")
    p.add_argument("--lam-min", type=float)
    p.add_argument("--lam-max", type=float)
    p.add_argument("--lam-steps", type=int)
    p.add_argument("--hx-over-j", type=float, default=1.0)
    p.add_argument("--no-sweep", action="store_true",
                   help="feasibility/spectrum only; skip the sweeps")
    _add_solver_flags(p)

    p = add("scan-driving", cmd_scan_driving,
            help="gap and T versus transverse-field strength")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--form", choices=("pubo", "qubo"), default="pubo")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--hx-values", help="comma-separated values")
    p.add_argument("--hx-min", type=float)
    p.add_argument("--hx-max", type=float)
    p.add_argument("--hx-steps", type=int)
    _add_solver_flags(p)

    p = add("ensemble", cmd_ensemble,
            help="sweep an instance ensemble to CSV")
    p.add_argument("--gen", required=True,
                   choices=("toughsat", "uniquept1", "uniquept4"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--form", choices=("pubo", "qubo"), default="pubo")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--hx-over-j", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    _add_m_flags(p)
    p.add_argument("--no-require-unique", dest="require_unique",
                   action="store_false",
                   help="keep instances with degenerate solutions")
    p.add_argument("--jobs", type=int, default=1)
    _add_solver_flags(p)

    p = add("fit", cmd_fit, help="exponential gap fit over ensemble CSVs")
    p.add_argument("--in", dest="input", required=True, nargs="+")
    p.add_argument("--exclude-n", help="comma-separated N values to drop")
    p.add_argument("--n-boot", type=int, default=1000)
    p.add_argument("--boot-seed", type=int, default=0)

    p = add("speedup", cmd_speedup,
            help="QUBO/PUBO adiabaticity-time ratio from two fits")
    p.add_argument("--fit-p", required=True, help="PUBO fit report")
    p.add_argument("--fit-q", required=True, help="QUBO fit report")
    p.add_argument("--j3j2", type=float, required=True,
                   help="three- to two-body rate ratio")
    p.add_argument("--vqvp", type=float, required=True,
                   help="driving-element ratio V_Q/V_P")
    p.add_argument("--n", type=int, required=True)

    p = add("synth-verify", cmd_synth_verify,
            help="verify ZZZ and CNOT-from-Rzz syntheses")
    p.add_argument("--theta", type=float, default=math.pi / 3)
    p.add_argument("--circuit-out", help="write the expanded circuit text")

    p = add("resources", cmd_resources,
            help="qubit counts of the alternative encodings")
    p.add_argument("--in", dest="input")
    p.add_argument("--n", type=int)
    _add_m_flags(p)

    p = add("correlate", cmd_correlate,
            help="minimum gap vs cubic-term count over an ensemble")
    p.add_argument("--n", type=int, required=True)
    _add_m_flags(p)
    p.add_argument("--count", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hx-over-j", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--pairs-out", help="write the raw (terms, gap) CSV")

    return parser


def _fail(exc: Exception, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                      "code": code}, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        for klass, code in _EXIT_CODES:
            if isinstance(exc, klass):
                return _fail(exc, code)
        return _fail(exc, 1)
    except ValueError as exc:
        return _fail(exc, 2)
    except OSError as exc:
        return _fail(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
