"""Command-line driver: trajectory runs, witness runs, sweeps, oracle checks.

Subcommands: simulate | witness | sweep | oracle. Options come from flags, a
JSON config file (--config, or the TEPWITNESS_CONFIG environment variable),
or both; flags win. Every output embeds the fully resolved configuration so
artifacts are self-describing, and files are written atomically.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 oracle check failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
import tempfile

import numpy as np

from .channels import AmplitudeDamping, ChannelModel, Dephasing, GeneralizedAmplitudeDamping
from .dilation import oracle_checks
from .errors import NumericalError, OracleCheckError
from .witness import (
    InitialStateParam,
    OptimizerConfig,
    TimeGrid,
    bell_param,
    evaluate_candidate,
    generate_initial,
    nonmarkovianity_measure,
    trajectory,
)

ENV_CONFIG = "TEPWITNESS_CONFIG"

CSV_COLUMNS = ("t", "tep", "tepr", "mutual", "classical", "discord",
               "entropy_exchange", "channel_scalar")

MODEL_PARAMS = {
    "dephasing": ("s", "omega_c"),
    "ad": ("lambda", "gamma0"),
    "gad": ("omega",),
}

_COMMON_KEYS = {
    "model", "s", "omega_c", "lambda", "gamma0", "omega", "t_max", "steps",
    "initial", "alpha", "basis", "seed", "out", "format", "jobs",
    "search_domain",
}
_KNOWN_KEYS = {
    "simulate": set(_COMMON_KEYS),
    "witness": set(_COMMON_KEYS),
    "oracle": set(_COMMON_KEYS) | {"times"},
    "sweep": set(_COMMON_KEYS) | {"sweep"},
}

_SWEEP_KEYS = {"param", "start", "stop", "count", "spacing", "command"}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tepwitness",
        description="Entropy-production trajectories and non-Markovianity "
                    "witness for qubit channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--model", choices=sorted(MODEL_PARAMS))
        p.add_argument("--s", type=float, help="dephasing spectral exponent")
        p.add_argument("--omega-c", type=float, dest="omega_c",
                       help="dephasing cutoff frequency")
        p.add_argument("--lambda", type=float, dest="lam",
                       help="damping spectral width")
        p.add_argument("--gamma0", type=float, help="damping resonant rate")
        p.add_argument("--omega", type=float,
                       help="generalized-damping mixing frequency")
        p.add_argument("--t-max", type=float, dest="t_max")
        p.add_argument("--steps", type=int)
        p.add_argument("--initial", choices=["bell", "schmidt", "optimize"])
        p.add_argument("--alpha", type=float,
                       help="Schmidt angle in [0, pi/4] for --initial schmidt")
        p.add_argument("--basis",
                       help="three comma-separated apparatus Euler angles")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--jobs", type=int)
        p.add_argument("--search-domain", dest="search_domain",
                       choices=["max-entangled", "full"],
                       help="initial-state domain for the witness search")

    p_sim = sub.add_parser("simulate", help="write a trajectory table")
    add_common(p_sim)

    p_wit = sub.add_parser("witness", help="compute the witness measure")
    add_common(p_wit)

    p_orc = sub.add_parser("oracle", help="run the dilation identity checks")
    add_common(p_orc)
    p_orc.add_argument("--times", help="comma-separated check times")

    p_swp = sub.add_parser("sweep", help="run a command over a parameter range")
    add_common(p_swp)
    p_swp.add_argument("--sweep-param", dest="sweep_param")
    p_swp.add_argument("--sweep-start", dest="sweep_start", type=float)
    p_swp.add_argument("--sweep-stop", dest="sweep_stop", type=float)
    p_swp.add_argument("--sweep-count", dest="sweep_count", type=int)
    p_swp.add_argument("--sweep-spacing", dest="sweep_spacing",
                       choices=["linear", "log"])
    p_swp.add_argument("--sweep-command", dest="sweep_command",
                       choices=["simulate", "witness"])
    return parser


def _load_config_file(path: str, command: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a single JSON object")
    unknown = set(data) - _KNOWN_KEYS[command]
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "sweep" in data:
        if not isinstance(data["sweep"], dict):
            raise ConfigError("sweep section must be an object")
        bad = set(data["sweep"]) - _SWEEP_KEYS
        if bad:
            raise ConfigError(f"unknown sweep keys: {sorted(bad)}")
    return data


def _parse_basis(value) -> tuple[float, float, float]:
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 3:
        raise ConfigError(f"basis needs exactly 3 angles, got {value!r}")
    try:
        return tuple(float(v) for v in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"basis angles must be numbers, got {value!r}") from exc


def _parse_times(value) -> list[float]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    else:
        parts = list(value)
    try:
        times = [float(v) for v in parts]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"times must be numbers, got {value!r}") from exc
    if not times or any(t < 0 for t in times):
        raise ConfigError("times must be a non-empty list of t >= 0")
    return times


_FLAG_TO_KEY = {
    "model": "model", "s": "s", "omega_c": "omega_c", "lam": "lambda",
    "gamma0": "gamma0", "omega": "omega", "t_max": "t_max", "steps": "steps",
    "initial": "initial", "alpha": "alpha", "basis": "basis", "seed": "seed",
    "out": "out", "format": "format", "jobs": "jobs",
    "search_domain": "search_domain", "times": "times",
}


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge config file and flags into one validated, JSON-ready dict."""
    command = args.command
    cfg: dict = {}

    path = args.config or os.environ.get(ENV_CONFIG)
    if path:
        cfg.update(_load_config_file(path, command))

    for attr, key in _FLAG_TO_KEY.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg[key] = value

    if command == "sweep":
        sweep = dict(cfg.get("sweep", {}))
        for attr, key in [
            ("sweep_param", "param"), ("sweep_start", "start"),
            ("sweep_stop", "stop"), ("sweep_count", "count"),
            ("sweep_spacing", "spacing"), ("sweep_command", "command"),
        ]:
            value = getattr(args, attr, None)
            if value is not None:
                sweep[key] = value
        cfg["sweep"] = sweep

    return validate_config(command, cfg)


def validate_config(command: str, cfg: dict) -> dict:
    unknown = set(cfg) - _KNOWN_KEYS[command]
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    model_name = cfg.get("model")
    if model_name not in MODEL_PARAMS:
        raise ConfigError(f"model must be one of {sorted(MODEL_PARAMS)}, "
                          f"got {model_name!r}")

    needed = MODEL_PARAMS[model_name]
    for key in needed:
        if key not in cfg:
            raise ConfigError(f"model {model_name!r} requires parameter {key!r}")
        try:
            cfg[key] = float(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {key!r} must be a number") from exc
    foreign = [
        k for params in MODEL_PARAMS.values() for k in params
        if k in cfg and k not in needed
    ]
    if foreign:
        raise ConfigError(f"parameters {sorted(set(foreign))} do not belong to "
                          f"model {model_name!r}")

    defaults = {
        "steps": 800,
        "initial": "bell",
        "alpha": math.pi / 4.0,
        "basis": (0.0, 0.0, 0.0),
        "seed": 0,
        "format": "csv",
        "jobs": 1,
        "search_domain": "max-entangled",
        "out": None,
    }
    for key, val in defaults.items():
        cfg.setdefault(key, val)

    if "t_max" not in cfg:
        cfg["t_max"] = _default_t_max(model_name, cfg)
    cfg["t_max"] = float(cfg["t_max"])
    if cfg["t_max"] <= 0:
        raise ConfigError(f"t_max must be > 0, got {cfg['t_max']}")

    try:
        cfg["steps"] = int(cfg["steps"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("steps must be an integer") from exc
    if cfg["steps"] < 16:
        raise ConfigError(f"steps must be >= 16, got {cfg['steps']}")

    if cfg["initial"] not in ("bell", "schmidt", "optimize"):
        raise ConfigError(f"initial must be bell|schmidt|optimize, "
                          f"got {cfg['initial']!r}")
    cfg["alpha"] = float(cfg["alpha"])
    if not 0.0 <= cfg["alpha"] <= math.pi / 4.0 + 1e-12:
        raise ConfigError(f"alpha must lie in [0, pi/4], got {cfg['alpha']}")
    cfg["basis"] = list(_parse_basis(cfg["basis"]))

    cfg["seed"] = int(cfg["seed"])
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg['format']!r}")
    cfg["jobs"] = int(cfg["jobs"])
    if cfg["jobs"] < 1:
        raise ConfigError(f"jobs must be >= 1, got {cfg['jobs']}")
    if cfg["search_domain"] not in ("max-entangled", "full"):
        raise ConfigError(f"search_domain must be max-entangled or full")

    if command == "simulate" and cfg["initial"] == "optimize":
        raise ConfigError("simulate needs a fixed initial state "
                          "(bell or schmidt), not optimize")

    if command == "oracle":
        if "times" in cfg:
            cfg["times"] = _parse_times(cfg["times"])
        else:
            t_max = cfg["t_max"]
            cfg["times"] = [t_max * k / 10.0 for k in range(1, 11)]

    if command == "sweep":
        sweep = cfg.get("sweep") or {}
        missing = {"param", "start", "stop", "count"} - set(sweep)
        if missing:
            raise ConfigError(f"sweep requires keys {sorted(missing)}")
        sweep.setdefault("spacing", "linear")
        sweep.setdefault("command", "witness")
        if sweep["command"] not in ("simulate", "witness"):
            raise ConfigError("sweep command must be simulate or witness")
        if sweep["param"] not in needed:
            raise ConfigError(f"swept parameter {sweep['param']!r} does not "
                              f"exist on model {model_name!r}")
        sweep["start"] = float(sweep["start"])
        sweep["stop"] = float(sweep["stop"])
        sweep["count"] = int(sweep["count"])
        if sweep["count"] < 2:
            raise ConfigError(f"sweep count must be >= 2, got {sweep['count']}")
        if sweep["spacing"] not in ("linear", "log"):
            raise ConfigError("sweep spacing must be linear or log")
        if sweep["spacing"] == "log" and (sweep["start"] <= 0 or sweep["stop"] <= 0):
            raise ConfigError("log spacing needs positive start and stop")
        cfg["sweep"] = sweep
        if sweep["command"] == "simulate" and not cfg["out"]:
            raise ConfigError("sweep over simulate needs --out DIRECTORY")

    return cfg


def _default_t_max(model_name: str, cfg: dict) -> float:
    if model_name == "dephasing":
        return 3.0 / cfg["omega_c"]
    if model_name == "ad":
        return 40.0 / cfg["gamma0"]
    return 3.0


def build_model(cfg: dict) -> ChannelModel:
    try:
        if cfg["model"] == "dephasing":
            return Dephasing(s=cfg["s"], omega_c=cfg["omega_c"])
        if cfg["model"] == "ad":
            return AmplitudeDamping(lam=cfg["lambda"], gamma0=cfg["gamma0"])
        return GeneralizedAmplitudeDamping(omega=cfg["omega"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _initial_param(cfg: dict) -> InitialStateParam:
    if cfg["initial"] == "bell":
        return bell_param()
    try:
        return InitialStateParam(alpha=cfg["alpha"], basis=tuple(cfg["basis"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _config_for_output(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items())}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def run_simulate(cfg: dict) -> int:
    model = build_model(cfg)
    grid = TimeGrid(t_max=cfg["t_max"], steps=cfg["steps"])
    psi = generate_initial(_initial_param(cfg))
    records = trajectory(model, psi, grid, compute_discord=True)

    if cfg["format"] == "csv":
        lines = ["# " + json.dumps(_config_for_output(cfg), sort_keys=True)]
        lines.append(",".join(CSV_COLUMNS))
        for r in records:
            lines.append(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS))
        payload = "\n".join(lines) + "\n"
    else:
        doc = {
            "config": _config_for_output(cfg),
            "columns": list(CSV_COLUMNS),
            "records": [
                {c: getattr(r, c) for c in CSV_COLUMNS} for r in records
            ],
        }
        payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"

    if cfg["out"]:
        _atomic_write(cfg["out"], payload)
    else:
        sys.stdout.write(payload)
    return 0


def _witness_document(cfg: dict) -> dict:
    model = build_model(cfg)
    grid = TimeGrid(t_max=cfg["t_max"], steps=cfg["steps"])
    if cfg["initial"] == "optimize":
        opt = OptimizerConfig(seed=cfg["seed"], domain=cfg["search_domain"])
        result = nonmarkovianity_measure(model, grid, opt)
        best = result.best_initial
        doc = {
            "measure": result.measure,
            "signed_integral": result.signed_integral,
            "intervals": [[a, b] for a, b in result.intervals],
            "best_initial": {"alpha": best.alpha, "basis": list(best.basis)},
            "warning": result.warning,
        }
    else:
        param = _initial_param(cfg)
        signed, intervals = evaluate_candidate(model, param, grid)
        doc = {
            "measure": abs(signed),
            "signed_integral": signed,
            "intervals": [[a, b] for a, b in intervals],
            "best_initial": {"alpha": param.alpha, "basis": list(param.basis)},
            "warning": False,
        }
    doc["seed"] = cfg["seed"]
    doc["grid"] = {"t_max": cfg["t_max"], "steps": cfg["steps"]}
    doc["config"] = _config_for_output(cfg)
    return doc


def run_witness(cfg: dict) -> int:
    payload = json.dumps(_witness_document(cfg), sort_keys=True, indent=2) + "\n"
    if cfg["out"]:
        _atomic_write(cfg["out"], payload)
    else:
        sys.stdout.write(payload)
    return 0


def run_oracle(cfg: dict) -> int:
    model = build_model(cfg)
    if cfg["initial"] == "optimize":
        raise ConfigError("oracle needs a fixed initial state (bell or schmidt)")
    psi = generate_initial(_initial_param(cfg))

    reports = []
    for t in cfg["times"]:
        reports.append(oracle_checks(psi, model, t, raise_on_failure=False))

    names = list(reports[0].residuals)
    header = ["t", "env_dim"] + names + ["status"]
    rows = [header]
    for rep in reports:
        rows.append(
            [_fmt(rep.t), str(rep.env_dim)]
            + [f"{rep.residuals[n]:.3e}" for n in names]
            + ["ok" if rep.passed else "FAIL"]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    table = "\n".join(
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
        for row in rows
    )
    sys.stdout.write(table + "\n")

    if cfg["out"]:
        doc = {
            "config": _config_for_output(cfg),
            "reports": [
                {"t": rep.t, "env_dim": rep.env_dim, "passed": rep.passed,
                 "mutual_ae": rep.mutual_ae, "residuals": rep.residuals}
                for rep in reports
            ],
        }
        _atomic_write(cfg["out"], json.dumps(doc, sort_keys=True, indent=2) + "\n")

    for rep in reports:
        if not rep.passed:
            name, residual = rep.worst()
            raise OracleCheckError(name, residual, rep.t)
    return 0


def _sweep_values(sweep: dict) -> list[float]:
    if sweep["spacing"] == "log":
        vals = np.geomspace(sweep["start"], sweep["stop"], sweep["count"])
    else:
        vals = np.linspace(sweep["start"], sweep["stop"], sweep["count"])
    return [float(v) for v in vals]


def _sweep_point(base_cfg: dict, value: float) -> dict:
    cfg = dict(base_cfg)
    sweep = cfg.pop("sweep")
    cfg[sweep["param"]] = value
    cfg = validate_config(sweep["command"], cfg)
    if sweep["command"] == "witness":
        doc = _witness_document(cfg)
        return {"param": sweep["param"], "value": value,
                "measure": doc["measure"], "intervals": doc["intervals"],
                "signed_integral": doc["signed_integral"]}
    out_dir = base_cfg["out"]
    cfg["out"] = os.path.join(out_dir, f"{sweep['param']}_{value:.9g}.csv")
    run_simulate(cfg)
    return {"param": sweep["param"], "value": value, "out": cfg["out"]}


def run_sweep(cfg: dict) -> int:
    sweep = cfg["sweep"]
    values = _sweep_values(sweep)
    base = dict(cfg)
    if sweep["command"] == "simulate" and cfg["out"]:
        os.makedirs(cfg["out"], exist_ok=True)

    if cfg["jobs"] > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            results = list(pool.map(_sweep_point, [base] * len(values), values))
    else:
        results = [_sweep_point(base, v) for v in values]

    doc = {"config": _config_for_output(cfg), "points": results}
    payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if sweep["command"] == "witness" and cfg["out"]:
        _atomic_write(cfg["out"], payload)
    elif sweep["command"] == "simulate" and cfg["out"]:
        _atomic_write(os.path.join(cfg["out"], "sweep.json"), payload)
    else:
        sys.stdout.write(payload)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_DISPATCH = {
    "simulate": run_simulate,
    "witness": run_witness,
    "oracle": run_oracle,
    "sweep": run_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _DISPATCH[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OracleCheckError as exc:
        print(f"oracle check failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
