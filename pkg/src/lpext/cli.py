"""Config-driven command line entry point.

Usage::

    lpext <subcommand> config.json

The config is one JSON object.  Unknown keys are rejected.  Exponents and
region vertices may be strings such as ``"5/3"`` to stay exact.  Outputs go
to ``output_dir`` (overridden by ``LPEXT_OUTPUT_DIR``); ``LPEXT_THREADS``
overrides ``solver.threads``.  Reports are JSON with sorted keys and embed
the resolved config, so identical inputs give byte-identical reports.

Exit status: 0 on success, 1 on precondition or config errors, 2 on
numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import io
from .bubbles import bubble_train, decompose, localize
from .errors import (ConfigError, InsufficientResolutionError, LpextError, NumericalError,
                     PreconditionError)
from .extremizer import (INITS, ExtremizerResult, SolverConfig, brute_force_norm, el_residual,
                         estimate_norm, functional)
from .grid import TORUS, WINDOW, Grid, GridFunction, lp_norm
from .measure import CUSTOM, FAMILIES, MeasureSpec
from .operator import ConvOperator, find_positivity_radius, kernel_origin, kernel_power
from .riesz import ExponentPair, RieszRegion, as_number, bootstrap_sequence
from .verify import build_report, smoothing_gain, smoothness_profile

OUTPUT_DIR_ENV = "LPEXT_OUTPUT_DIR"
THREADS_ENV = "LPEXT_THREADS"

SUBCOMMANDS = ("norm", "solve", "verify", "decompose", "localize", "bootstrap", "kernel", "oracle")

_TOP_KEYS = {"measure", "grid", "pair", "region", "solver", "options", "output_dir", "seed"}
_MEASURE_KEYS = {"family", "t", "radius", "offset", "eps", "table", "alpha_hint", "support_radius"}
_GRID_KEYS = {"dim", "n", "domain", "length"}
_PAIR_KEYS = {"p", "q"}
_SOLVER_KEYS = {"max_iter", "rel_tol", "restarts", "init", "initial", "threads"}
_OPTION_KEYS = {
    "norm": {"oracle", "oracle_restarts"},
    "solve": {"n_sectors", "jensen_exponents", "lower_bound_N", "window", "alpha"},
    "verify": {"input", "n_sectors", "jensen_exponents", "lower_bound_N", "window"},
    "decompose": {"input", "synthetic", "epsilons"},
    "localize": {"input", "synthetic", "eta", "norm_estimate", "eps_exponent"},
    "bootstrap": {"tol", "max_iter"},
    "kernel": {"N", "R", "N_max"},
    "oracle": {"restarts"},
}
_SYNTH_KEYS = {"centers", "masses", "width"}
_WINDOW_KEYS = {"center", "radius"}

# grids up to this many points per axis also get the brute-force cross-check
ORACLE_MAX_N = 8


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


@dataclass
class RunConfig:
    subcommand: str
    measure: dict
    grid: dict
    pair: Optional[dict]
    region: Optional[list]
    solver: dict
    options: dict
    output_dir: str
    seed: int
    base_dir: Path = field(default=Path("."), repr=False)

    def resolved(self) -> dict:
        """The config as used, with defaults filled in (embedded in reports)."""
        return {
            "subcommand": self.subcommand,
            "measure": self.measure,
            "grid": self.grid,
            "pair": self.pair,
            "region": self.region,
            "solver": self.solver,
            "options": self.options,
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    # -- typed views ---------------------------------------------------------

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def make_grid(self) -> Grid:
        g = self.grid
        if g["domain"] == TORUS:
            return Grid.torus(g["dim"], g["n"])
        return Grid.window(g["dim"], g["n"], g["length"])

    def make_measure(self) -> MeasureSpec:
        m = dict(self.measure)
        fam = m.pop("family")
        if fam == CUSTOM:
            m["table"] = io.load(self.path(m["table"])).values
        return MeasureSpec(fam, **m)

    def make_pair(self) -> ExponentPair:
        if self.pair is None:
            raise ConfigError(f"subcommand {self.subcommand!r} needs an exponent pair")
        return ExponentPair(as_number(self.pair["p"]), as_number(self.pair["q"]))

    def make_region(self) -> Optional[RieszRegion]:
        if self.region is None:
            return None
        return RieszRegion(self.region)

    def make_solver(self, pair: ExponentPair) -> SolverConfig:
        s = dict(self.solver)
        initial = s.pop("initial")
        init_f = io.load(self.path(initial)) if initial is not None else None
        return SolverConfig(pair, initial=init_f, seed=self.seed, **s)


def _number_field(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ConfigError(f"{where} must be a number or a fraction string")
    try:
        x = as_number(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: cannot parse {v!r}") from exc
    return str(x) if isinstance(x, Fraction) else x


def parse_config(raw: dict, subcommand: str, base_dir: Path = Path(".")) -> RunConfig:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    _check_keys(raw, _TOP_KEYS, "config")

    measure = raw.get("measure", {"family": "uniform"})
    _check_keys(measure, _MEASURE_KEYS, "measure")
    if measure.get("family") not in FAMILIES:
        raise ConfigError(f"measure.family must be one of {', '.join(FAMILIES)}")
    measure = dict(measure)

    grid = dict(raw.get("grid", {}))
    _check_keys(grid, _GRID_KEYS, "grid")
    grid.setdefault("dim", 1)
    grid.setdefault("n", 64)
    grid.setdefault("domain", TORUS)
    grid.setdefault("length", 1.0)
    if grid["domain"] not in (TORUS, WINDOW):
        raise ConfigError("grid.domain must be 'torus' or 'window'")

    pair = raw.get("pair")
    if pair is not None:
        _check_keys(pair, _PAIR_KEYS, "pair")
        if set(pair) != _PAIR_KEYS:
            raise ConfigError("pair needs both p and q")
        pair = {k: _number_field(pair[k], f"pair.{k}") for k in ("p", "q")}

    region = raw.get("region")
    if region is not None:
        if not isinstance(region, list) or not all(isinstance(v, list) and len(v) == 2 for v in region):
            raise ConfigError("region must be a list of [x, y] vertices")
        region = [[_number_field(c, "region vertex") for c in v] for v in region]

    solver = dict(raw.get("solver", {}))
    _check_keys(solver, _SOLVER_KEYS, "solver")
    solver.setdefault("max_iter", 5000)
    solver.setdefault("rel_tol", 1e-8)
    solver.setdefault("restarts", 4)
    solver.setdefault("init", "constant")
    solver.setdefault("initial", None)
    solver.setdefault("threads", 1)
    if solver["init"] not in INITS:
        raise ConfigError(f"solver.init must be one of {', '.join(INITS)}")
    env_threads = os.environ.get(THREADS_ENV)
    if env_threads:
        try:
            solver["threads"] = int(env_threads)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from exc

    options = dict(raw.get("options", {}))
    _check_keys(options, _OPTION_KEYS[subcommand], f"options for {subcommand}")
    if "window" in options and options["window"] is not None:
        _check_keys(options["window"], _WINDOW_KEYS, "options.window")
    if "synthetic" in options and options["synthetic"] is not None:
        _check_keys(options["synthetic"], _SYNTH_KEYS, "options.synthetic")

    output_dir = os.environ.get(OUTPUT_DIR_ENV) or raw.get("output_dir", "lpext-out")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    return RunConfig(subcommand, measure, grid, pair, region, solver, options,
                     str(output_dir), seed, Path(base_dir))


def load_config(path, subcommand: str) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw, subcommand, path.parent)


# -- serialization ------------------------------------------------------------


def jsonable(v: Any) -> Any:
    """Plain JSON values; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [jsonable(v.real), jsonable(v.imag)]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def dumps_report(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def _write_report(cfg: RunConfig, out: Path, name: str, body: dict) -> Path:
    body = dict(body)
    body["config"] = cfg.resolved()
    path = out / name
    path.write_text(dumps_report(body), newline="\n")
    return path


# -- subcommands --------------------------------------------------------------


def _setup(cfg: RunConfig):
    grid = cfg.make_grid()
    op = ConvOperator(cfg.make_measure(), grid)
    return grid, op


def _solve_summary(res) -> dict:
    return {
        "phi": res.phi,
        "norm_estimate": res.norm_estimate,
        "el_residual": res.el_residual,
        "converged": res.converged,
        "iterations": res.iterations,
        "restart": res.restart,
        "max_decrease": res.max_decrease,
    }


def _window(opts):
    w = opts.get("window")
    if w is None:
        return None
    return (np.atleast_1d(np.asarray(w["center"], dtype=float)), float(w["radius"]))


def _verify_body(cfg, op, pair, res, out: Path) -> dict:
    opts = cfg.options
    rep = build_report(op, pair, res, cfg.make_region(),
                       n_sectors=int(opts.get("n_sectors", 8)),
                       jensen_exponents=tuple(opts.get("jensen_exponents", (1.5, 2.0, 3.0))),
                       lower_bound_N=int(opts.get("lower_bound_N", 1)),
                       window=_window(opts))
    body = rep.to_dict()
    try:
        fit = smoothness_profile(res.f)[1]
        io.write_series(out / "shells.csv", ["k", "count", "maximum"],
                        [(s.k, s.count, s.maximum) for s in fit.shells])
    except InsufficientResolutionError:
        pass
    return body


def cmd_norm(cfg: RunConfig, out: Path) -> dict:
    grid, op = _setup(cfg)
    pair = cfg.make_pair()
    phi, res = estimate_norm(op, pair, cfg.make_solver(pair))
    body = {"norm_estimate": phi, "result": _solve_summary(res)}
    want = cfg.options.get("oracle", "auto")
    tiny = grid.n <= ORACLE_MAX_N and grid.dim <= 2
    if want is True or (want == "auto" and tiny):
        oracle = brute_force_norm(op, pair, int(cfg.options.get("oracle_restarts", 16)), cfg.seed)
        body["oracle"] = {"brute_force_norm": oracle,
                          "relative_difference": abs(oracle - phi) / max(abs(oracle), 1e-300)}
    io.write_series(out / "history.csv", ["k", "phi", "step"], res.history)
    return body


def cmd_solve(cfg: RunConfig, out: Path) -> dict:
    grid, op = _setup(cfg)
    pair = cfg.make_pair()
    solver = cfg.make_solver(pair)
    phi, res = estimate_norm(op, pair, solver)
    body = {"norm_estimate": phi, "result": _solve_summary(res),
            "verify": _verify_body(cfg, op, pair, res, out)}
    alpha = cfg.options.get("alpha")
    region = cfg.make_region()
    if alpha is not None and region is not None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
        f0 = GridFunction(grid, rng.random(grid.shape) + 1e-3)
        sg = smoothing_gain(op, pair, region, f0 * (1 / lp_norm(f0, pair.pf)), float(alpha))
        body["smoothing"] = {"before": sg.before, "after": sg.after, "kappa": sg.kappa,
                             "gain": sg.gain, "passes": sg.passes}
    io.write_series(out / "history.csv", ["k", "phi", "step"], res.history)
    io.save(res.f, out / "extremizer.gfn")
    (out / "extremizer.csv").write_text(io.to_csv(res.f), newline="")
    return body


def cmd_verify(cfg: RunConfig, out: Path) -> dict:
    grid, op = _setup(cfg)
    pair = cfg.make_pair()
    if "input" not in cfg.options:
        raise ConfigError("verify needs options.input (a stored grid function)")
    f = io.load(cfg.path(cfg.options["input"]))
    op.check(f)
    f = f * (1 / lp_norm(f, pair.pf))
    phi = functional(op, pair, f)
    resid = el_residual(op, pair, f, phi)
    res = ExtremizerResult(f, phi, phi, resid, [(0, phi, 0.0)], False)
    return {"phi": phi, "verify": _verify_body(cfg, op, pair, res, out)}


def _input_function(cfg: RunConfig, grid: Grid, pair: ExponentPair) -> GridFunction:
    opts = cfg.options
    if opts.get("input") is not None:
        f = io.load(cfg.path(opts["input"]))
        if f.grid != grid:
            raise ConfigError(f"input lives on {f.grid}, config grid is {grid}")
        return f
    syn = opts.get("synthetic")
    if syn is None:
        raise ConfigError(f"{cfg.subcommand} needs options.input or options.synthetic")
    centers = syn["centers"]
    masses = syn.get("masses", [1.0] * len(centers))
    if len(masses) != len(centers):
        raise ConfigError("synthetic.masses must match synthetic.centers")
    return bubble_train(grid, centers, masses, pair.pf, float(syn.get("width", 1.0)))


def cmd_decompose(cfg: RunConfig, out: Path) -> dict:
    grid, op = _setup(cfg)
    pair = cfg.make_pair()
    f = _input_function(cfg, grid, pair)
    f = f * (1 / lp_norm(f, pair.pf))
    eps_list = cfg.options.get("epsilons")
    if not eps_list:
        raise ConfigError("decompose needs a nonempty options.epsilons list")
    runs, rows = [], []
    for eps in eps_list:
        dec = decompose(op, pair, f, float(eps))
        err = float(np.abs(dec.reconstruct().values - f.values).max())
        m = dec.manifest()
        m["reconstruction_error"] = err
        runs.append(m)
        rows.append((dec.epsilon, dec.N, dec.mass_constant if dec.N else math.nan,
                     dec.count_constant, err))
    io.write_series(out / "bubble_counts.csv",
                    ["epsilon", "N", "mass_constant", "count_constant", "reconstruction_error"], rows)
    masses = [c for r in runs for c in ([r["mass_constant"]] if r["N"] else [])]
    return {"runs": runs, "run_mass_constant": min(masses) if masses else None}


def cmd_localize(cfg: RunConfig, out: Path) -> dict:
    grid, op = _setup(cfg)
    pair = cfg.make_pair()
    f = _input_function(cfg, grid, pair)
    opts = cfg.options
    A = opts.get("norm_estimate")
    if A is None:
        A = estimate_norm(op, pair, cfg.make_solver(pair))[0]
    loc = localize(op, pair, f, float(opts.get("eta", 0.01)), float(A),
                   float(opts.get("eps_exponent", 0.5)))
    return {"norm_estimate": A, "x0": loc.x0, "R": loc.R, "nominal_R": loc.nominal_R,
            "tail_mass": loc.tail_mass, "A_mass": loc.A_mass, "B_mass": loc.B_mass,
            "remainder_norm": loc.remainder_norm, "components": loc.components,
            "decomposition": loc.decomposition.manifest()}


def cmd_bootstrap(cfg: RunConfig, out: Path) -> dict:
    pair = cfg.make_pair()
    region = cfg.make_region()
    if region is None:
        raise ConfigError("bootstrap needs a region")
    seq = bootstrap_sequence(region, pair, float(cfg.options.get("tol", 1e-9)),
                             int(cfg.options.get("max_iter", 200)))
    rows = [(k, t, math.inf if t == 0 else 1 / t) for k, t in enumerate(seq)]
    io.write_series(out / "bootstrap.csv", ["k", "t_k", "s_k"], rows)
    return {"t": [float(t) for t in seq], "t_exact": [str(t) if isinstance(t, Fraction) else None
                                                     for t in seq],
            "steps": len(seq) - 1, "final": float(seq[-1])}


def cmd_kernel(cfg: RunConfig, out: Path) -> dict:
    grid, op = _setup(cfg)
    opts = cfg.options
    body = {}
    if opts.get("R") is not None:
        N, c = find_positivity_radius(op, float(opts["R"]), int(opts.get("N_max", 64)))
        body.update(N=N, c_R=c, R=float(opts["R"]))
    else:
        N = int(opts.get("N", 1))
        body["N"] = N
    K = kernel_power(op, N)
    body["K_origin"] = kernel_origin(op, N)
    io.save(K, out / "kernel.gfn")
    (out / "kernel.csv").write_text(io.to_csv(K), newline="")
    return body


def cmd_oracle(cfg: RunConfig, out: Path) -> dict:
    grid, op = _setup(cfg)
    pair = cfg.make_pair()
    return {"brute_force_norm": brute_force_norm(op, pair, int(cfg.options.get("restarts", 16)),
                                                 cfg.seed)}


_COMMANDS = {
    "norm": cmd_norm, "solve": cmd_solve, "verify": cmd_verify, "decompose": cmd_decompose,
    "localize": cmd_localize, "bootstrap": cmd_bootstrap, "kernel": cmd_kernel,
    "oracle": cmd_oracle,
}


def execute(cfg: RunConfig) -> Path:
    """Run a parsed config; returns the report path."""
    out = cfg.path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from exc
    body = _COMMANDS[cfg.subcommand](cfg, out)
    return _write_report(cfg, out, f"{cfg.subcommand}.json", body)


def run(subcommand: str, config_path) -> int:
    """Run ``subcommand`` on the config file; returns the exit status."""
    try:
        cfg = load_config(config_path, subcommand)
        path = execute(cfg)
    except NumericalError as exc:
        print(f"lpext {subcommand}: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (PreconditionError, LpextError) as exc:
        print(f"lpext {subcommand}: {exc}", file=sys.stderr)
        return 1
    except (KeyError, TypeError, ValueError) as exc:
        print(f"lpext {subcommand}: bad config value: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lpext", description=__doc__.split("\n\n")[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("config", help="path to a JSON run config")
    args = parser.parse_args(argv)
    return run(args.subcommand, args.config)
