"""Command-line front end.

Every subcommand reads an optional flat ``key = value`` config file
(``--config``); command-line flags override file values. The effective
configuration is echoed as a block that can be saved and fed back with
``--config`` to reproduce the run.

Exit codes: 0 success, 2 invalid input, 3 analysis failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from vomap import analytic, empirical, experiments
from vomap.errors import AnalysisError, CapacityError, DomainError, PoleError
from vomap.simulator import MapConfig, OrderSchedule, simulate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ANALYSIS = 3


class ConfigError(DomainError):
    """Malformed or unknown entry in a config file or flag."""


def _float_list(text: str) -> list[float]:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return [float(t) for t in items]


def _int_list(text: str) -> list[int]:
    values = _float_list(text)
    if any(v != int(v) for v in values):
        raise ValueError("expected integers")
    return [int(v) for v in values]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def inner(text: str):
        return None if text.strip().lower() in ("", "none") else parse(text)
    return inner


#: Config schema: key -> parser. Anything else is rejected.
SCHEMA: dict[str, Callable[[str], Any]] = {
    "alphas": _float_list,
    "r": float,
    "r_min": float,
    "r_max": float,
    "x0": float,
    "horizon": _int,
    "horizon_cap": _int,
    "tol": float,
    "seed": _int,
    "output": str,
    "memory_window": _optional(_int),
    "divergence_threshold": _optional(float),
    "cycle_tol": float,
    "w": complex,
    "regularized": _bool,
    "periods": _int_list,
    "n_samples": _int,
    "n_configs": _int,
}

DEFAULTS: dict[str, Any] = {
    "x0": 0.1,
    "horizon": 1000,
    "horizon_cap": empirical.HORIZON_CAP,
    "tol": 1e-3,
    "seed": 0,
    "r_min": experiments.R_UNSTABLE,
    "r_max": experiments.R_STABLE,
    "memory_window": None,
    "divergence_threshold": None,
    "cycle_tol": 1e-6,
    "regularized": False,
    "periods": [3, 5, 7],
    "n_samples": 1000,
    "n_configs": 10,
}

#: Keys each subcommand consumes, in the order they are echoed.
KEYS = {
    "simulate": ["alphas", "r", "x0", "horizon", "memory_window",
                 "divergence_threshold", "cycle_tol", "output"],
    "bound": ["alphas"],
    "threshold": ["alphas", "r_min", "r_max", "tol", "x0", "horizon", "horizon_cap"],
    "char": ["alphas", "r", "w", "regularized"],
    "sweep-analytic": ["n_samples", "seed", "output"],
    "sweep-empirical": ["periods", "n_configs", "horizon", "horizon_cap", "tol", "seed",
                        "output"],
}

SUBCOMMAND_DEFAULTS = {
    "threshold": {"horizon": empirical.DEFAULT_HORIZON},
    "sweep-empirical": {"horizon": empirical.DEFAULT_HORIZON,
                        "output": "sweep_empirical.csv"},
    "sweep-analytic": {"output": "sweep_t3.csv"},
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            out[key] = SCHEMA[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return out


def load_config(path) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def _render(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    return str(value)


def format_config(command: str, cfg: dict[str, Any]) -> str:
    lines = [f"{key} = {_render(cfg[key])}" for key in KEYS[command] if key in cfg]
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join(missing))


def _schedule(cfg) -> OrderSchedule:
    _require(cfg, "alphas")
    return OrderSchedule(tuple(cfg["alphas"]))


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg, out) -> int:
    _require(cfg, "r")
    schedule = _schedule(cfg)
    if cfg.get("output"):
        traj = experiments.timeseries_export(
            schedule, cfg["r"], cfg["x0"], cfg["horizon"], cfg["output"],
            memory_window=cfg["memory_window"],
            divergence_threshold=cfg["divergence_threshold"],
            cycle_tol=cfg["cycle_tol"],
        )
    else:
        config = MapConfig(r=cfg["r"], x0=cfg["x0"], horizon=cfg["horizon"],
                           memory_window=cfg["memory_window"],
                           divergence_threshold=cfg["divergence_threshold"],
                           cycle_tol=cfg["cycle_tol"])
        traj = simulate(config, schedule)
    print(f"status: {traj.status}", file=out)
    print(f"steps computed: {traj.steps_computed}", file=out)
    print(f"final value: {_fmt(traj.final_value)}", file=out)
    if traj.cycle is not None:
        print("cycle: (" + ", ".join(_fmt(c) for c in traj.cycle) + ")", file=out)
    memory = "full" if cfg["memory_window"] is None else \
        f"window {cfg['memory_window']} (approximate)"
    print(f"memory: {memory}", file=out)
    if cfg.get("output"):
        print(f"wrote {cfg['output']}", file=out)
    return EXIT_OK


def cmd_bound(cfg, out) -> int:
    schedule = _schedule(cfg)
    a = schedule.alphas
    if schedule.period == 1:
        interval = analytic.bound_T2(a[0], a[0])
    elif schedule.period == 2:
        interval = analytic.bound_T2(*a)
    elif schedule.period == 3:
        interval = analytic.bound_T3(*a)
    else:
        interval = analytic.mean_order_bound(schedule)
    print(f"stable region: {interval}", file=out)
    print(f"method: {interval.method}", file=out)
    if interval.det_residual is not None:
        print(f"determinant residual: {interval.det_residual:.3g}", file=out)
    if interval.ambiguous:
        print("warning: candidate roots closer than "
              f"{analytic.ROOT_SEPARATION_TOL:g}", file=out)
    heuristic = analytic.mean_order_bound(schedule)
    print(f"mean-order heuristic: {heuristic}", file=out)
    if schedule.period > 3:
        cands = analytic.boundary_candidates(schedule)["z=-1"]
        shown = ", ".join(_fmt(c) for c in cands) if cands else "none"
        print(f"z=-1 boundary candidates (experimental): {shown}", file=out)
    return EXIT_OK


def cmd_threshold(cfg, out) -> int:
    schedule = _schedule(cfg)
    config = empirical.bisect_config(x0=cfg["x0"], horizon=cfg["horizon"])
    est = empirical.threshold_bisect(schedule, cfg["r_min"], cfg["r_max"], tol=cfg["tol"],
                                     horizon=cfg["horizon"], config=config,
                                     horizon_cap=cfg["horizon_cap"])
    print(f"threshold: {_fmt(est.r_star)}", file=out)
    print(f"bracket: ({_fmt(est.bracket[0])}, {_fmt(est.bracket[1])})", file=out)
    print(f"confidence: {est.confidence}", file=out)
    print(f"horizon used: {est.horizon_used}", file=out)
    if schedule.period == 2:
        print(f"analytic: {_fmt(analytic.bound_T2(*schedule.alphas).r_left)}", file=out)
    elif schedule.period == 3:
        print(f"analytic: {_fmt(analytic.bound_T3(*schedule.alphas).r_left)}", file=out)
    print(f"mean-order heuristic: {_fmt(analytic.mean_order_bound(schedule).r_left)}",
          file=out)
    return EXIT_OK


def cmd_char(cfg, out) -> int:
    _require(cfg, "r", "w")
    schedule = _schedule(cfg)
    if cfg["regularized"]:
        if schedule.period != 2:
            raise ConfigError("regularized evaluation exists only for period 2")
        ev = analytic.char_fn_T2(cfg["w"], cfg["r"], *schedule.alphas, regularized=True)
    else:
        ev = analytic.char_matrix(cfg["w"], cfg["r"], schedule)
    v = ev.value
    print(f"value: {v.real:.6g}{v.imag:+.6g}j", file=out)
    print(f"|value|: {abs(v):.6g}", file=out)
    if ev.experimental:
        print(f"note: experimental (period > {analytic.VERIFIED_MAX_PERIOD})", file=out)
    return EXIT_OK


def cmd_sweep_analytic(cfg, out) -> int:
    sweep = experiments.sweep_T3_analytic(cfg["n_samples"], cfg["seed"])
    sweep.to_csv(cfg["output"])
    failed = int(sweep.failed.sum())
    print(f"rows: {len(sweep)}", file=out)
    print(f"failed determinant checks: {failed}", file=out)
    if len(sweep):
        gap = np.nanmax(np.abs(sweep.r_left - sweep.heuristic))
        print(f"max |r_left - heuristic|: {_fmt(gap)}", file=out)
    print(f"wrote {cfg['output']}", file=out)
    return EXIT_OK


def cmd_sweep_empirical(cfg, out) -> int:
    sweep = experiments.sweep_empirical(cfg["periods"], cfg["n_configs"], cfg["horizon"],
                                        cfg["seed"], cfg["tol"], cfg["horizon_cap"])
    sweep.to_csv(cfg["output"])
    print(f"rows: {len(sweep.rows)}", file=out)
    limited = sum(r.confidence != "Resolved" for r in sweep.rows)
    print(f"horizon-limited or failed rows: {limited}", file=out)
    print(f"wrote {cfg['output']}", file=out)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "bound": cmd_bound,
    "threshold": cmd_threshold,
    "char": cmd_char,
    "sweep-analytic": cmd_sweep_analytic,
    "sweep-empirical": cmd_sweep_empirical,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vomap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, keys in KEYS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--save-config", help="write the effective config to this path")
        for key in keys:
            flag = "--" + key.replace("_", "-")
            if key == "regularized":
                p.add_argument(flag, dest=key, action="store_const", const="true",
                               default=None)
            else:
                p.add_argument(flag, dest=key, default=None)
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, config file, and flags (in increasing priority)."""
    cfg = dict(DEFAULTS)
    cfg.update(SUBCOMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        cfg.update(load_config(args.config))
    for key in KEYS[args.command]:
        raw = getattr(args, key, None)
        if raw is None:
            continue
        try:
            cfg[key] = SCHEMA[key](raw)
        except ValueError as exc:
            raise ConfigError(f"--{key.replace('_', '-')}: {exc}") from None
    return cfg


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        cfg = resolve(args)
        block = format_config(args.command, cfg)
        print("# effective config", file=out)
        out.write(block)
        if args.save_config:
            Path(args.save_config).write_text(block, encoding="utf-8")
        return COMMANDS[args.command](cfg, out)
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except (DomainError, CapacityError, PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
