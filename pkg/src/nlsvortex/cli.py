"""Batch front end: solve, verify, and sweep commands with bit-stable artifacts.

    nlsvortex solve-log-zero        alpha=1 beta=1 n=1 omega=0.2 R=20 N=4000
    nlsvortex solve-log-plateau     alpha=1 beta=1 n=1 omega=0.1 R=40
    nlsvortex solve-sat-constrained s=1 gamma=3 n=1 P0=4.18879 R=20
    nlsvortex verify
    nlsvortex sweep command=solve-log-zero param=omega values=0.05,0.1,0.2 seeds=0,1 ...

Arguments are key=value tokens; ``spec=FILE`` loads the same keys from a
flat key=value text file first (command-line tokens override it).  Output
files land in ``out=DIR``, else ``$NLSVORTEX_OUTDIR``, else the working
directory.  Floats are emitted with 17 significant digits so artifacts
round-trip and rerunning an identical spec reproduces them byte for byte.

Exit status: 0 success, 2 parameter validation failure, 3 non-convergence
(or a failed verify check), 4 I/O failure.
"""

import math
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import check_omega_in_bound, omega_bound, verification_suite
from .energy import ode_residual
from .errors import ParameterError, SolverError
from .grid import make_grid
from .model import (log_plateau_problem, log_zero_problem, saturable_power_problem)
from .solver import (RandomInit, SolverConfig, minimize_constrained,
                     minimize_unconstrained)

USAGE = __doc__

RESULT_FIELDS = ("model", "n", "omega", "energy", "power", "grad_norm",
                 "el_residual_norm", "iterations", "converged", "decay_rate",
                 "bound_lower", "bound_check", "seed")

_COMMON_KEYS = {"R", "N", "grading", "ratio", "out", "seed", "max_iters",
                "grad_tol", "init", "spec"}
_COMMAND_KEYS = {
    "solve-log-zero": _COMMON_KEYS | {"alpha", "beta", "n", "omega", "mu"},
    "solve-log-plateau": _COMMON_KEYS | {"alpha", "beta", "n", "omega"},
    "solve-sat-constrained": _COMMON_KEYS | {"s", "gamma", "n", "P0"},
    "verify": {"out", "seed", "spec"},
    "sweep": None,  # validated per base command
}
_DEFAULT_R = {"solve-log-zero": 20.0, "solve-log-plateau": 40.0,
              "solve-sat-constrained": 20.0}


def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _parse_tokens(tokens):
    kv = {}
    for tok in tokens:
        if "=" not in tok:
            raise ParameterError(f"arguments are key=value pairs; got {tok!r}")
        key, _, val = tok.partition("=")
        kv[key.strip()] = val.strip()
    if "spec" in kv:
        text = Path(kv.pop("spec")).read_text()
        file_kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParameterError(f"spec file lines are key=value; got {line!r}")
            key, _, val = line.partition("=")
            file_kv[key.strip()] = val.strip()
        file_kv.update(kv)
        kv = file_kv
    return kv


def _check_keys(command, kv):
    allowed = _COMMAND_KEYS[command]
    if allowed is None:
        return
    unknown = set(kv) - allowed
    if unknown:
        raise ParameterError(f"unknown key(s) for {command}: {', '.join(sorted(unknown))}")


def _f(kv, key, default=None):
    if key not in kv:
        if default is None:
            raise ParameterError(f"missing required key {key}")
        return default
    try:
        return float(kv[key])
    except ValueError:
        raise ParameterError(f"{key} must be a number; got {kv[key]!r}") from None


def _i(kv, key, default=None):
    if key not in kv:
        if default is None:
            raise ParameterError(f"missing required key {key}")
        return default
    try:
        return int(kv[key])
    except ValueError:
        raise ParameterError(f"{key} must be an integer; got {kv[key]!r}") from None


def _outdir(kv):
    path = Path(kv.get("out") or os.environ.get("NLSVORTEX_OUTDIR") or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _build_grid(kv, command):
    R = _f(kv, "R", _DEFAULT_R[command])
    n = _i(kv, "N", 4000)
    grading = kv.get("grading", "uniform")
    ratio = _f(kv, "ratio", 1.0)
    return make_grid(R, n, grading, ratio)


def _build_config(kv):
    cfg = SolverConfig(max_iters=_i(kv, "max_iters", 2000),
                       grad_tol=_f(kv, "grad_tol", 1e-8))
    if kv.get("init") == "random":
        cfg.init = RandomInit(seed=_i(kv, "seed", 0), amplitude=1.0)
    elif kv.get("init") not in (None, "default"):
        raise ParameterError(f"init must be 'default' or 'random'; got {kv['init']!r}")
    return cfg


def _solve(command, kv):
    """Run one solve; returns (fields dict, report, problem)."""
    seed = _i(kv, "seed", 0)
    grid = _build_grid(kv, command)
    cfg = _build_config(kv)
    if command == "solve-log-zero":
        problem = log_zero_problem(_f(kv, "alpha"), _f(kv, "beta"), _i(kv, "n"),
                                   _f(kv, "omega"), grid.R,
                                   mu=_f(kv, "mu", -1.0) if "mu" in kv else None)
        report = minimize_unconstrained(problem, grid, cfg)
        model = "logarithmic"
        bound = None
    elif command == "solve-log-plateau":
        problem = log_plateau_problem(_f(kv, "alpha"), _f(kv, "beta"), _i(kv, "n"),
                                      _f(kv, "omega"), grid.R)
        report = minimize_unconstrained(problem, grid, cfg)
        model = "logarithmic"
        bound = None
    elif command == "solve-sat-constrained":
        s, gamma, n, power = _f(kv, "s"), _f(kv, "gamma"), _i(kv, "n"), _f(kv, "P0")
        problem = saturable_power_problem(s, gamma, n, power, grid.R)
        report = minimize_constrained(problem, grid, cfg)
        model = "saturable"
        bound = omega_bound(s, gamma, n, power)
    else:
        raise ParameterError(f"unknown solve command {command!r}")

    fields = {
        "model": model,
        "n": problem.n,
        "omega": report.omega,
        "energy": report.energy,
        "power": report.power,
        "grad_norm": report.grad_norm,
        "el_residual_norm": report.el_residual_norm,
        "iterations": report.iterations,
        "converged": report.converged,
        "decay_rate": report.decay.rate if report.decay is not None else None,
        "bound_lower": bound.lower if bound is not None else None,
        "bound_check": check_omega_in_bound(report, bound) if bound is not None else None,
        "seed": seed,
    }
    return fields, report, problem


def _result_text(fields):
    return "".join(f"{key}={_fmt(fields[key])}\n" for key in RESULT_FIELDS)


def _profile_text(problem, report):
    res = ode_residual(problem, report.profile,
                       None if problem.omega is not None else report.omega)
    lines = ["r,u,residual"]
    r = report.profile.grid.nodes
    u = report.profile.values
    for i in range(r.shape[0]):
        lines.append(f"{r[i]:.17g},{u[i]:.17g},{res[i]:.17g}")
    return "\n".join(lines) + "\n"


def _run_solve(command, kv):
    try:
        fields, report, problem = _solve(command, kv)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    outdir = _outdir(kv)
    (outdir / "result.txt").write_text(_result_text(fields))
    (outdir / "profile.csv").write_text(_profile_text(problem, report))
    print(_result_text(fields), end="")
    return 0 if report.converged else 3


def _run_verify(kv):
    results = verification_suite(seed=_i(kv, "seed", 20240809))
    lines = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        lines.append(f"{status} {res.name}: {res.detail}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if kv.get("out") or os.environ.get("NLSVORTEX_OUTDIR"):
        (_outdir(kv) / "verify.txt").write_text(text)
    return 0 if all(r.passed for r in results) else 3


_SWEEP_ONLY = {"command", "param", "values", "seeds", "out", "spec"}


def _run_sweep(kv):
    try:
        base_cmd = kv.get("command")
        if base_cmd not in _DEFAULT_R:
            raise ParameterError("sweep needs command=solve-log-zero|"
                                 "solve-log-plateau|solve-sat-constrained")
        param = kv.get("param")
        if not param:
            raise ParameterError("sweep needs param=<swept key>")
        if "values" not in kv:
            raise ParameterError("sweep needs values=v1,v2,...")
        values = [v.strip() for v in kv["values"].split(",") if v.strip()]
        seeds = [int(s) for s in kv.get("seeds", "0").split(",") if s.strip()]
        base = {k: v for k, v in kv.items() if k not in _SWEEP_ONLY}
        if param in base:
            raise ParameterError(f"swept parameter {param} must not also be fixed")
        _check_keys(base_cmd, dict(base, **{param: "0"}))
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    rows = []
    best = None
    for value in values:
        for seed in seeds:
            row_kv = dict(base)
            row_kv[param] = value
            row_kv["seed"] = str(seed)
            note = ""
            try:
                fields, report, problem = _solve(base_cmd, row_kv)
            except ParameterError as exc:
                note = str(exc)
                fields = {key: None for key in RESULT_FIELDS}
                fields["model"] = "saturable" if base_cmd == "solve-sat-constrained" \
                    else "logarithmic"
                fields["converged"] = False
                fields["seed"] = seed
                if param != "n" and "n" in row_kv:
                    fields["n"] = int(row_kv["n"])
                if param == "omega":
                    fields["omega"] = float(value)
            else:
                if fields["converged"] and (best is None or fields["energy"] < best[0]):
                    best = (fields["energy"], value, dict(fields))
            rows.append((value, seed, fields, note))

    header = "sweep_param,sweep_value,seed," + ",".join(RESULT_FIELDS) + ",note"
    lines = [header]
    for value, seed, fields, note in rows:
        cells = [param, value, str(seed)]
        cells += [_fmt(fields[key]) for key in RESULT_FIELDS]
        cells.append(note.replace(",", ";"))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"

    outdir = _outdir(kv)
    (outdir / "sweep.csv").write_text(text)
    if best is not None:
        summary = f"sweep_param={param}\nsweep_value={best[1]}\n" + _result_text(best[2])
    else:
        summary = f"sweep_param={param}\nconverged_rows=0\n"
    (outdir / "sweep_best.txt").write_text(summary)
    print(text, end="")
    return 0


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help", "help"):
        print(USAGE)
        return 0 if argv else 2
    command, tokens = argv[0], argv[1:]
    try:
        kv = _parse_tokens(tokens)
        if command in ("solve-log-zero", "solve-log-plateau", "solve-sat-constrained"):
            _check_keys(command, kv)
            return _run_solve(command, kv)
        if command == "verify":
            _check_keys(command, kv)
            return _run_verify(kv)
        if command == "sweep":
            return _run_sweep(kv)
        raise ParameterError(f"unknown command {command!r}")
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
