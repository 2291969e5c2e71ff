"""Command-line front door.

Exit codes: 0 success, 1 numerical failure, 2 validation error, 3 experiment
verdict failure.  Errors go to stderr as single-line JSON.  Target constants
may be written symbolically ("sqrt(16/15)", "8/(3pi)") to avoid hand-rounding
drift; the tiny evaluator supports + - * / sqrt ln pi with implicit
multiplication.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import spectral
from .errors import NumericalError, ValidationError
from .linalg import (as_matrix, flatness_ratio, operator_norm, read_matrix_csv,
                     trace_norm, write_matrix_csv)
from .norms import (ConvexDecomposition, DualWitness, FactorizationPair,
                    SignPair, bell_functional_from_svd, classical_lower_bound,
                    classical_upper_bound, gamma2_bracket, gamma2_oracle,
                    infty_to_one_exact, infty_to_one_heuristic,
                    quantum_classical_gap)
from .sampling import ENSEMBLE_KINDS, EnsembleSpec, SeedSpec
from .experiments import (ExperimentConfig, TrialRecord, _SCENARIO_TABLE,
                          default_config, run_experiment, summarize_records)

SCHEMA_VERSION = "1"
OUT_ENV = "RANDCORR_OUT"
_CERT_TOL = 1e-9


# --- symbolic constant parser ------------------------------------------------

class _Tokens:
    def __init__(self, text: str):
        self.toks = self._lex(text)
        self.pos = 0

    @staticmethod
    def _lex(text: str) -> list:
        out = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
            elif ch in "+-*/()":
                out.append(ch)
                i += 1
            elif ch.isdigit() or ch == ".":
                j = i
                while j < len(text) and (text[j].isdigit() or text[j] in ".eE"
                                         or (text[j] in "+-" and text[j - 1] in "eE")):
                    j += 1
                out.append(float(text[i:j]))
                i = j
            elif ch.isalpha():
                j = i
                while j < len(text) and text[j].isalpha():
                    j += 1
                out.append(text[i:j])
                i = j
            else:
                raise ValidationError(f"bad character {ch!r} in expression")
        return out

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def pop(self):
        tok = self.peek()
        self.pos += 1
        return tok


def parse_scalar(text: str) -> float:
    """Evaluate a constant expression over + - * / sqrt ln pi."""
    toks = _Tokens(text)

    def expr() -> float:
        val = term()
        while toks.peek() in ("+", "-"):
            op = toks.pop()
            rhs = term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term() -> float:
        val = unary()
        while True:
            nxt = toks.peek()
            if nxt in ("*", "/"):
                op = toks.pop()
                rhs = unary()
                val = val * rhs if op == "*" else val / rhs
            elif isinstance(nxt, float) or nxt == "(" or (
                    isinstance(nxt, str) and nxt.isalpha()):
                val = val * unary()  # implicit multiplication: "3pi"
            else:
                return val

    def unary() -> float:
        if toks.peek() == "-":
            toks.pop()
            return -unary()
        return atom()

    def atom() -> float:
        tok = toks.pop()
        if isinstance(tok, float):
            return tok
        if tok == "pi":
            return math.pi
        if tok in ("sqrt", "ln"):
            if toks.pop() != "(":
                raise ValidationError(f"{tok} needs parentheses")
            val = expr()
            if toks.pop() != ")":
                raise ValidationError("unbalanced parentheses")
            return math.sqrt(val) if tok == "sqrt" else math.log(val)
        if tok == "(":
            val = expr()
            if toks.pop() != ")":
                raise ValidationError("unbalanced parentheses")
            return val
        raise ValidationError(f"unexpected token {tok!r}")

    val = expr()
    if toks.peek() is not None:
        raise ValidationError(f"trailing input in expression: {text!r}")
    return val


# --- report plumbing ---------------------------------------------------------

def _report(kind: str, config: dict, results: dict, matrix=None,
            certificates=None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "config": config,
           "results": results}
    if matrix is not None:
        doc["matrix"] = np.asarray(matrix).tolist()
    if certificates:
        doc["certificates"] = certificates
    return doc


def _emit(doc: dict, args, headline: str) -> None:
    print(headline)
    out = args.out
    if out is None and os.environ.get(OUT_ENV):
        seed = getattr(args, "seed", 0) or 0
        out = os.path.join(os.environ[OUT_ENV], f"{doc['kind']}-seed{seed}.json")
    if out:
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        with open(out, "w", encoding="ascii") as fh:
            fh.write(json.dumps(doc, sort_keys=True, indent=2))
            fh.write("\n")


def _certificate(kind: str, claimed: float, payload: dict) -> dict:
    return {"claims": kind, "value": claimed, "certificate": payload}


# --- subcommand handlers -----------------------------------------------------

def _cmd_sample(args) -> int:
    spectrum = None
    if args.spectrum:
        spectrum = [parse_scalar(tok) for tok in args.spectrum.split(",")]
    spec = EnsembleSpec(kind=args.kind, n=args.n, m=args.m, spectrum=spectrum)
    mat = spec.sample(SeedSpec(args.seed, args.trial))
    if args.out is None:
        raise ValidationError("sample requires --out for the matrix CSV")
    write_matrix_csv(args.out, mat)
    print(f"wrote {mat.shape[0]}x{mat.shape[1]} matrix to {args.out}")
    return 0


def _cmd_norm(args) -> int:
    mat = read_matrix_csv(args.matrix)
    config = {"subcommand": "norm", "matrix": args.matrix, "which": args.which,
              "restarts": args.restarts, "seed": args.seed}
    certs = []
    if args.which == "infty-to-one":
        value, pair = infty_to_one_exact(mat)
        certs.append(_certificate("infty_to_one_lower", value, pair.to_dict()))
    elif args.which == "infty-to-one-heuristic":
        value, pair = infty_to_one_heuristic(mat, args.restarts,
                                             SeedSpec(args.seed, 0))
        certs.append(_certificate("infty_to_one_lower", value, pair.to_dict()))
    elif args.which == "trace":
        value = trace_norm(mat)
    elif args.which == "operator":
        value = operator_norm(mat)
    else:
        value = flatness_ratio(mat)
    doc = _report("norm", config, {"value": value}, matrix=mat,
                  certificates=certs or None)
    _emit(doc, args, format(value, ".12g"))
    return 0


def _cmd_gamma2(args) -> int:
    mat = read_matrix_csv(args.matrix)
    bracket = gamma2_bracket(mat)
    config = {"subcommand": "gamma2", "matrix": args.matrix,
              "oracle": args.oracle, "tol": args.tol}
    results = {"lower": bracket.lower, "upper": bracket.upper}
    certs = [
        _certificate("gamma2_lower", bracket.lower,
                     bracket.lower_certificate.to_dict()),
        _certificate("gamma2_upper", bracket.upper,
                     bracket.upper_certificate.to_dict()),
    ]
    if args.oracle:
        results["oracle"] = gamma2_oracle(mat, args.tol)
    doc = _report("gamma2", config, results, matrix=mat, certificates=certs)
    _emit(doc, args, f"gamma2 in [{bracket.lower:.12g}, {bracket.upper:.12g}]")
    return 0


def _cmd_classical(args) -> int:
    mat = read_matrix_csv(args.matrix)
    bell = bell_functional_from_svd(mat, seed=SeedSpec(args.seed, 0))
    lower = classical_lower_bound(mat, bell)
    dec = classical_upper_bound(mat, max_atoms=args.max_atoms, tol=args.tol,
                                seed=SeedSpec(args.seed, 0))
    config = {"subcommand": "classical", "matrix": args.matrix,
              "max_atoms": args.max_atoms, "tol": args.tol, "seed": args.seed}
    results = {"lower": lower, "upper": dec.weight_sum(),
               "converged": dec.converged, "certified": dec.certified,
               "residual": dec.residual}
    certs = [
        _certificate("classical_lower", lower, bell.to_dict()),
        _certificate("classical_upper", dec.weight_sum(), dec.to_dict()),
    ]
    doc = _report("classical", config, results, matrix=mat, certificates=certs)
    _emit(doc, args, f"projective norm in [{lower:.12g}, {dec.weight_sum():.12g}]")
    return 0


def _cmd_gap(args) -> int:
    mat = read_matrix_csv(args.matrix)
    seed = SeedSpec(args.seed, 0)
    bell = bell_functional_from_svd(mat, heuristic_restarts=args.restarts,
                                    seed=seed)
    bracket = gamma2_bracket(mat)
    gap = quantum_classical_gap(mat, heuristic_restarts=args.restarts, seed=seed)
    config = {"subcommand": "gap", "matrix": args.matrix,
              "restarts": args.restarts, "seed": args.seed}
    results = {"gap": gap, "bell_norm": bell.eps_one_norm,
               "bell_norm_exact": bell.exact,
               "gamma2_lower": bracket.lower, "gamma2_upper": bracket.upper}
    certs = [
        _certificate("bell_functional", bell.eps_one_norm, bell.to_dict()),
        _certificate("gamma2_lower", bracket.lower,
                     bracket.lower_certificate.to_dict()),
        _certificate("gamma2_upper", bracket.upper,
                     bracket.upper_certificate.to_dict()),
    ]
    doc = _report("gap", config, results, matrix=mat, certificates=certs)
    _emit(doc, args, f"quantum-classical gap estimate {gap:.12g}"
          + ("" if bell.exact else " (heuristic Bell norm, not certified)"))
    return 0


def _cmd_spectral(args) -> int:
    alpha = parse_scalar(args.alpha)
    law = spectral.density(alpha, grid_points=args.grid_points)
    config = {"subcommand": "spectral", "alpha": alpha,
              "grid_points": args.grid_points}
    results = {"support_upper": law.support_upper, "c_alpha": law.c_alpha,
               "atom_mass": law.atom_mass, "total_mass": law.total_mass(),
               "first_moment": law.first_moment()}
    if args.csv:
        law.to_csv(args.csv)
        results["csv"] = args.csv
    if args.ks_n:
        if not args.ks_m:
            raise ValidationError("--ks-n requires --ks-m")
        emp = spectral.empirical_spectrum(args.ks_n, args.ks_m,
                                          SeedSpec(args.seed, 0))
        results["ks_distance"] = spectral.ks_distance(emp, law)
    doc = _report("spectral", config, results)
    _emit(doc, args, f"alpha={alpha:g}: support_upper={law.support_upper:.6g} "
                     f"C_alpha={law.c_alpha:.6g}")
    return 0


def _cmd_threshold(args) -> int:
    gap_constant = parse_scalar(args.gap)
    value = spectral.alpha_threshold(gap_constant, tol=args.tol)
    config = {"subcommand": "threshold", "gap_constant": gap_constant,
              "tol": args.tol}
    doc = _report("threshold", config, {"alpha0": value})
    _emit(doc, args, f"alpha0 = {value:.4f}")
    return 0


def _cmd_experiment(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="ascii") as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
    else:
        if not args.scenario:
            raise ValidationError("experiment needs --scenario or --config")
        cfg = default_config(args.scenario, master_seed=args.seed)
        if args.n:
            cfg = ExperimentConfig(scenario=cfg.scenario, sizes=args.n,
                                   trials=args.trials or cfg.trials,
                                   master_seed=args.seed)
        elif args.trials:
            cfg = ExperimentConfig(scenario=cfg.scenario, sizes=cfg.sizes,
                                   trials=args.trials, master_seed=args.seed)
    report = run_experiment(cfg, threads=args.threads)
    doc = report.to_dict(include_timing=args.timings)
    lines = [f"scenario {cfg.scenario}: "
             + ("all verdicts passed" if report.passed() else "VERDICT FAILURE")]
    for v in report.verdicts:
        lines.append(f"  [{'PASS' if v.passed else 'FAIL'}] {v.name}: "
                     f"value={v.value:.6g} threshold={v.threshold:.6g}")
    out = args.out
    if out is None and os.environ.get(OUT_ENV):
        out = os.path.join(os.environ[OUT_ENV],
                           f"experiment-{cfg.scenario}-seed{cfg.master_seed}.json")
    if out:
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        with open(out, "w", encoding="ascii") as fh:
            if args.format == "csv":
                fh.write(report.to_csv())
            else:
                fh.write(json.dumps(doc, sort_keys=True, indent=2))
                fh.write("\n")
    print("\n".join(lines))
    return 0 if report.passed() else 3


def _verify_single(doc: dict) -> list:
    failures = []
    mat = as_matrix(doc["matrix"]) if "matrix" in doc else None
    for i, cert in enumerate(doc.get("certificates", [])):
        claimed = float(cert["value"])
        payload = cert["certificate"]
        kind = payload.get("type")
        label = f"certificate {i} ({cert['claims']})"
        try:
            if kind == "sign_pair":
                got = SignPair.from_dict(payload).pairing(mat)
            elif kind == "dual_witness":
                witness = DualWitness.from_dict(payload)
                n = witness.a.shape[0]
                if np.linalg.norm(witness.a @ witness.a.T - np.eye(n)) > 1e-6:
                    failures.append(f"{label}: witness not orthogonal")
                    continue
                got = witness.value(mat)
            elif kind == "factorization":
                pair = FactorizationPair.from_dict(payload)
                if pair.residual(mat) > 1e-6:
                    failures.append(f"{label}: factorization does not reproduce the matrix")
                    continue
                got = pair.value()
            elif kind == "convex_decomposition":
                dec = ConvexDecomposition.from_dict(payload)
                if dec.reconstruction_residual(mat) > max(1e-6, 2 * dec.residual):
                    failures.append(f"{label}: decomposition does not reconstruct the matrix")
                    continue
                got = dec.weight_sum()
            elif kind == "bell_functional":
                a = as_matrix(payload["a"], square=True)
                n = a.shape[0]
                if payload.get("exact"):
                    norm, _ = infty_to_one_exact(a)
                else:
                    op = float(np.linalg.svd(a, compute_uv=False)[0])
                    norm = float(min(n, n * op))
                if cert["claims"] == "classical_lower":
                    got = float((mat * a).sum()) / norm
                else:
                    got = norm
            else:
                failures.append(f"{label}: unknown certificate type {kind!r}")
                continue
        except (ValidationError, NumericalError) as exc:
            failures.append(f"{label}: re-evaluation failed: {exc}")
            continue
        if abs(got - claimed) > _CERT_TOL * max(1.0, abs(claimed)):
            failures.append(f"{label}: re-evaluates to {got!r}, claimed {claimed!r}")
    return failures


def _verify_experiment(doc: dict) -> list:
    failures = []
    cfg = ExperimentConfig.from_dict(doc["config"])
    trials = [TrialRecord.from_dict(t) for t in doc["trials"]]
    fresh = summarize_records(trials)
    stored = doc["summaries"]
    if len(fresh) != len(stored):
        failures.append("summary count mismatch")
        return failures
    for a, b in zip(fresh, stored):
        for key in ("mean", "std", "q05", "q50", "q95"):
            if abs(a[key] - b[key]) > 1e-12 * max(1.0, abs(a[key])):
                failures.append(f"summary {a['size']}/{a['stat']}/{key} mismatch")
    _, verdict_fn = _SCENARIO_TABLE[cfg.scenario]
    fresh_verdicts = verdict_fn(cfg, trials, fresh)
    for new, old in zip(fresh_verdicts, doc["verdicts"]):
        if bool(new.passed) != bool(old["passed"]):
            failures.append(f"verdict {new.name} flipped on re-evaluation")
    return failures


def _cmd_verify(args) -> int:
    with open(args.report, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {doc.get('schema_version')!r}")
    if doc.get("kind") == "experiment":
        failures = _verify_experiment(doc)
    else:
        failures = _verify_single(doc)
    if failures:
        for f in failures:
            print(f"FAIL {f}")
        return 1
    print("all certificates verified")
    return 0


# --- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randcorr",
        description="Random correlation matrices: quantum/classical norms, "
                    "spectral laws, seeded experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="report/output path")

    p = sub.add_parser("sample", help="draw one matrix from an ensemble")
    p.add_argument("--kind", required=True, choices=ENSEMBLE_KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--spectrum", default=None,
                   help="comma-separated spectrum for bi_invariant")
    p.add_argument("--trial", type=int, default=0)
    common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("norm", help="matrix norms")
    p.add_argument("--matrix", required=True)
    p.add_argument("--which", default="infty-to-one",
                   choices=("infty-to-one", "infty-to-one-heuristic", "trace",
                            "operator", "flatness"))
    p.add_argument("--restarts", type=int, default=50)
    common(p)
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("gamma2", help="quantum-norm bracket (and small-n oracle)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--tol", type=float, default=1e-4)
    common(p)
    p.set_defaults(func=_cmd_gamma2)

    p = sub.add_parser("classical", help="projective-norm bracket")
    p.add_argument("--matrix", required=True)
    p.add_argument("--max-atoms", type=int, default=400)
    p.add_argument("--tol", type=float, default=1e-9)
    common(p)
    p.set_defaults(func=_cmd_classical)

    p = sub.add_parser("gap", help="classical/quantum norm ratio estimate")
    p.add_argument("--matrix", required=True)
    p.add_argument("--restarts", type=int, default=50)
    common(p)
    p.set_defaults(func=_cmd_gap)

    p = sub.add_parser("spectral", help="limiting law of the Gaussian product")
    p.add_argument("--alpha", required=True, help="aspect ratio m/n (expression)")
    p.add_argument("--grid-points", type=int, default=4000)
    p.add_argument("--csv", default=None, help="write (x, density) CSV here")
    p.add_argument("--ks-n", type=int, default=None)
    p.add_argument("--ks-m", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_spectral)

    p = sub.add_parser("threshold", help="non-locality aspect-ratio threshold")
    p.add_argument("--gap", required=True,
                   help='gap constant, e.g. "sqrt(16/15)"')
    p.add_argument("--tol", type=float, default=1e-4)
    common(p)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("experiment", help="run a seeded Monte Carlo scenario")
    p.add_argument("--scenario", default=None)
    p.add_argument("--config", default=None, help="full JSON config file")
    p.add_argument("--n", type=int, nargs="*", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock in the report (breaks byte-identity)")
    common(p)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("verify-certificate", help="re-evaluate a report's certificates")
    p.add_argument("report")
    common(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}),
              file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}),
              file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
