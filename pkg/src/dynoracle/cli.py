"""Command-line front end: ``dynoracle {solve,check,eta-search,fig2}``.

Settings come from built-in defaults, then an optional flat JSON file
(``--config``), then explicit flags. Exit codes: 0 on success (including a
run that stops at the iteration cap), 1 on usage or input errors, 2 when a
run diverges or the problem violates the rank assumption.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .analysis import (
    NotCertifiableError,
    SearchError,
    certify_assumption2_quadratic,
    default_search_range,
    eta1_search,
    generalized_inputs_from_certificate,
    small_gain_check,
    theorem1_eta1_bound,
    theorem1_gains,
    theorem2_eta1_bound,
    theorem2_gains,
)
from .oracles import EXACT, PRESETS, gd_params, nesterov_params, preset_params
from .problems import RankDeficientError, load_problem, random_quadratic_instance
from .solvers import SolverConfig, fit_rate, inexact_gradient_run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2

FIG2_KAPPAS = (1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0)
THEOREM_SAFETY = 0.99


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    """Flat run description; JSON config keys use these field names."""

    problem: str | None = None
    n: int = 10
    m: int = 10
    kappa: float = 4.0
    seed: int = 0
    preset: str = "gd"
    eta1: str = "search"
    eta2: float | None = None
    max_iters: int = 10000
    tol: float = 1e-10
    out: str | None = None
    lo: float | None = None
    hi: float | None = None
    kappas: str | None = None
    trials: int = 5
    workers: int = 1

    def validate(self):
        if self.preset not in PRESETS:
            raise UsageError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        if self.eta1 not in ("search", "theorem1"):
            try:
                v = float(self.eta1)
            except ValueError:
                raise UsageError(f"--eta1 must be a number, 'search' or 'theorem1', got {self.eta1!r}") from None
            if not v > 0:
                raise UsageError("--eta1 must be positive")
        if self.eta2 is not None and not float(self.eta2) > 0:
            raise UsageError("--eta2 must be positive")
        if int(self.max_iters) < 1 or not float(self.tol) > 0:
            raise UsageError("--max-iters must be >= 1 and --tol positive")
        if int(self.trials) < 1:
            raise UsageError("--trials must be >= 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that only explicit flags override the config file
    common.add_argument("--config", help="JSON file with RunSpec fields")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--preset", help=f"oracle preset: {', '.join(PRESETS)}")
    common.add_argument("--eta1", help="primal step: a number, 'search' or 'theorem1'")
    common.add_argument("--eta2", type=float, help="oracle step (default: preset value)")
    common.add_argument("--max-iters", dest="max_iters", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--problem", help="problem JSON file instead of a generated instance")
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--kappa", type=float)
    common.add_argument("--lo", type=float, help="lower end of the eta1 search range")
    common.add_argument("--hi", type=float, help="upper end of the eta1 search range")

    parser = _Parser(prog="dynoracle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="run the primal loop with an oracle")
    sub.add_parser("check", parents=[common], help="report constants, bounds and certificates")
    sub.add_parser("eta-search", parents=[common], help="search the primal step size")
    fig2 = sub.add_parser("fig2", parents=[common], help="GD vs Nesterov oracle rates over kappa")
    fig2.add_argument("--kappas", help="comma-separated condition numbers")
    fig2.add_argument("--trials", type=int)
    fig2.add_argument("--workers", type=int, help="worker processes (0: one per CPU)")
    return parser


def resolve_spec(args: argparse.Namespace) -> RunSpec:
    spec = RunSpec()
    if args.command == "fig2":
        spec.n = spec.m = 20
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        known = {f.name for f in fields(RunSpec)}
        for key, value in doc.items():
            key = key.replace("-", "_")
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            setattr(spec, key, value)
    for f in fields(RunSpec):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(spec, f.name, value)
    if isinstance(spec.kappas, (list, tuple)):
        spec.kappas = ",".join(str(k) for k in spec.kappas)
    spec.eta1 = str(spec.eta1)
    spec.validate()
    return spec


def _load(spec: RunSpec):
    if spec.problem:
        try:
            return load_problem(spec.problem)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read problem {spec.problem}: {exc}") from None
    try:
        return random_quadratic_instance(int(spec.n), int(spec.m), float(spec.kappa), int(spec.seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _oracle(spec: RunSpec, prob):
    g = prob.g
    return preset_params(spec.preset, g.mu, g.beta, spec.eta2)


def _theorem_eta1(prob, oracle) -> float:
    c = prob.constants
    if oracle == EXACT:
        return 2.0 / (c.mu_p + c.beta_p)
    if oracle.is_gradient_descent:
        return THEOREM_SAFETY * theorem1_eta1_bound(c, oracle.eta2)
    cert = certify_assumption2_quadratic(oracle, c.mu_g, c.beta_g)
    return THEOREM_SAFETY * theorem2_eta1_bound(generalized_inputs_from_certificate(cert, c))


def _search_range(spec, c):
    lo, hi = default_search_range(c)
    return (float(spec.lo) if spec.lo is not None else lo,
            float(spec.hi) if spec.hi is not None else hi)


def _resolve_eta1(spec: RunSpec, prob, oracle) -> float:
    if spec.eta1 == "theorem1":
        return _theorem_eta1(prob, oracle)
    if spec.eta1 == "search":
        lo, hi = _search_range(spec, prob.constants)
        if oracle == EXACT:
            return 2.0 / (prob.constants.mu_p + prob.constants.beta_p)
        return eta1_search(prob, oracle, lo, hi).eta1
    return float(spec.eta1)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _say(msg: str, spec: RunSpec):
    # the summary goes to stderr when stdout carries the CSV
    print(msg, file=sys.stdout if spec.out else sys.stderr)


def cmd_solve(spec: RunSpec) -> int:
    prob = _load(spec)
    oracle = _oracle(spec, prob)
    eta1 = _resolve_eta1(spec, prob, oracle)
    cfg = SolverConfig(max_iters=int(spec.max_iters), tol=float(spec.tol))
    trace = inexact_gradient_run(prob, eta1, oracle, cfg)
    _emit(trace.to_csv(), spec.out)
    try:
        rate = f"{fit_rate(trace).rho:.6f}"
    except ValueError:
        rate = "n/a (too few points)"
    _say(f"preset={spec.preset} eta1={eta1:.6g} status={trace.status} "
         f"iterations={trace.iterations} rate={rate}", spec)
    return EXIT_FAIL if trace.status == "diverged" else EXIT_OK


def cmd_check(spec: RunSpec) -> int:
    prob = _load(spec)
    c = prob.constants
    print("constants:")
    for k, v in c.as_dict().items():
        print(f"  {k} = {v:.10g}")
    g = prob.g
    gd = gd_params(g.mu, g.beta, spec.eta2)
    try:
        b1 = theorem1_eta1_bound(c, gd.eta2)
        print(f"gd oracle eta2 = {gd.eta2:.10g}: eta1 bound = {b1:.10g}")
    except ValueError as exc:
        b1 = None
        print(f"gd oracle eta1 bound: n/a ({exc})")
    oracle = _oracle(spec, prob) if spec.preset != EXACT else gd
    try:
        cert = certify_assumption2_quadratic(oracle, c.mu_g, c.beta_g)
    except NotCertifiableError as exc:
        print(f"certificate ({oracle.name}): {exc}")
        return EXIT_OK
    print(f"certificate ({oracle.name}): rho2 = {cert.rho2:.10g}, cond(P) = {cert.cond_P():.6g}")
    if oracle.is_gradient_descent and b1 is not None:
        eta1 = float(spec.eta1) if spec.eta1 not in ("search", "theorem1") else THEOREM_SAFETY * b1
        G = theorem1_gains(c, eta1, oracle.eta2)
    else:
        inp = generalized_inputs_from_certificate(cert, c)
        b2 = theorem2_eta1_bound(inp)
        print(f"generalized eta1 bound = {b2:.10g} (c_xi = {inp.c_xi:.6g}, c_phi = {inp.c_phi:.6g})")
        eta1 = float(spec.eta1) if spec.eta1 not in ("search", "theorem1") else THEOREM_SAFETY * b2
        G = theorem2_gains(inp, eta1)
    verdict = "pass" if small_gain_check(G) else "fail"
    print(f"gains at eta1 = {eta1:.10g}: g11 = {G.g11:.10g}, g12 = {G.g12:.10g}, "
          f"g21 = {G.g21:.10g}, g22 = {G.g22:.10g}; small-gain {verdict}")
    return EXIT_OK


def cmd_eta_search(spec: RunSpec) -> int:
    prob = _load(spec)
    oracle = _oracle(spec, prob)
    if oracle == EXACT:
        raise UsageError("eta-search needs an inexact oracle preset")
    lo, hi = _search_range(spec, prob.constants)
    res = eta1_search(prob, oracle, lo, hi)
    _emit(f"method,eta1_best,rho_best\n{spec.preset},{res.eta1:.17g},{res.rho:.17g}\n", spec.out)
    _say(f"preset={spec.preset} eta1_best={res.eta1:.6g} rho_best={res.rho:.6f}", spec)
    return EXIT_OK


def _parse_kappas(text) -> list[float]:
    if text is None:
        return list(FIG2_KAPPAS)
    try:
        ks = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--kappas must be a comma list of numbers, got {text!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise UsageError("--kappas must be nonempty and each >= 1")
    return ks


def trial_seed(seed: int, i: int, t: int) -> int:
    return int(np.random.SeedSequence([seed, i, t]).generate_state(1)[0])


def _fig2_cell(args):
    n, m, kappa, seed = args
    prob = random_quadratic_instance(n, m, kappa, seed)
    c = prob.constants
    lo, hi = default_search_range(c)
    out = {}
    arms = {
        "gd": (gd_params(c.mu_g, c.beta_g, 1.0 / c.beta_g), gd_params(c.mu_g, c.beta_g)),
        "nesterov": (nesterov_params(c.mu_g, c.beta_g, max_kappa=None),) * 2,
    }
    for name, (like, preset) in arms.items():
        try:
            r = eta1_search(prob, like, lo, hi)
            best = (r.eta1, r.rho)
        except SearchError:
            best = (math.nan, math.inf)
        if preset is like:
            rp = best[1]
        else:
            try:
                rp = eta1_search(prob, preset, lo, hi).rho
            except SearchError:
                rp = math.inf
        out[name] = (best[0], best[1], rp)
    return out


def fig2_table(kappas, trials: int, seed: int, n: int = 20, m: int = 20, workers: int = 1):
    """Median best rates per ``(kappa, method)``, in input order.

    Both arms use ``eta2 = 1/beta_g``; ``rho_best_preset_eta2`` repeats the
    search with each preset's default ``eta2``.
    """
    jobs = [(n, m, float(k), trial_seed(seed, i, t)) for i, k in enumerate(kappas) for t in range(trials)]
    if workers == 1:
        results = [_fig2_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=None if workers == 0 else workers) as ex:
            results = list(ex.map(_fig2_cell, jobs))
    rows = []
    for i, k in enumerate(kappas):
        cell = results[i * trials:(i + 1) * trials]
        for method in ("gd", "nesterov"):
            vals = np.array([r[method] for r in cell])
            med = np.median(vals, axis=0)
            rows.append({"kappa": float(k), "method": method, "eta1_best": float(med[0]),
                         "rho_best": float(med[1]), "rho_best_preset_eta2": float(med[2])})
    return rows


def fig2_csv(rows) -> str:
    lines = ["kappa,method,eta1_best,rho_best,rho_best_preset_eta2"]
    for r in rows:
        lines.append(f"{r['kappa']:.17g},{r['method']},{r['eta1_best']:.17g},"
                     f"{r['rho_best']:.17g},{r['rho_best_preset_eta2']:.17g}")
    return "\n".join(lines) + "\n"


def cmd_fig2(spec: RunSpec) -> int:
    kappas = _parse_kappas(spec.kappas)
    workers = int(spec.workers)
    if workers < 0:
        raise UsageError("--workers must be >= 0")
    rows = fig2_table(kappas, int(spec.trials), int(spec.seed), int(spec.n), int(spec.m), workers)
    _emit(fig2_csv(rows), spec.out)
    for r in rows:
        _say(f"kappa={r['kappa']:g} {r['method']:<9} rho_best={r['rho_best']:.6f}", spec)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "eta-search": cmd_eta_search, "fig2": cmd_fig2}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = resolve_spec(args)
        return COMMANDS[args.command](spec)
    except UsageError as exc:
        print(f"dynoracle: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except RankDeficientError as exc:
        print(f"dynoracle: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (SearchError, NotCertifiableError) as exc:
        print(f"dynoracle: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
