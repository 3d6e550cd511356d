"""Command-line front end: config parsing, run dispatch, CSV emission, and a
JSON run manifest.

One subcommand per experiment class (`spontaneous`, `echo`, `thermal`,
`envelopes`, `validate`, `schedule`).  Runs are configured through a flat
`key=value` file plus mirroring `--key value` flags; flags override the file,
the file overrides built-in defaults, and the `CAVITAS_SEED` environment
variable sits between the two for the seed only.  Series output is CSV with a
fixed header; every series run also writes `<out>.manifest.json` recording the
fully resolved configuration, tool version, seed, timestamps, and output file
list, which together suffice to reproduce the run.

Exit codes: 0 success, 1 run or validation failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import CavitasError, ConfigurationError, DomainError
from .exact_dynamics import RabiSeries
from .mesoscopic import revival_schedule
from .protocols import ExperimentConfig, SystemConfig, run_experiment, validate
from .su2 import SpinQuantum

#: Recognized configuration keys, in canonical (file and manifest) order.
CONFIG_KEYS = (
    "mode",
    "n_atoms",
    "nbar",
    "g_over_gamma",
    "g_khz",
    "n_th",
    "c",
    "cutoff",
    "t_pi_us",
    "gamma_tp",
    "n0",
    "trajectories",
    "phi_max",
    "phi_steps",
    "seed",
    "out",
)

_INT_KEYS = frozenset({"n_atoms", "cutoff", "trajectories", "phi_steps", "seed"})
_FLOAT_KEYS = frozenset(
    {"nbar", "g_over_gamma", "g_khz", "n_th", "c", "t_pi_us", "gamma_tp", "n0", "phi_max"}
)
_SYSTEM_KEYS = frozenset({"n_atoms", "nbar", "g_over_gamma", "g_khz", "n_th", "c", "cutoff"})

#: Subcommand name -> ExperimentConfig mode.
_COMMAND_MODES = {
    "spontaneous": "spontaneous",
    "echo": "echo",
    "thermal": "thermal",
    "envelopes": "envelopes-only",
    "validate": "validate",
}

CSV_HEADER = "phi,t_us,P,P_stderr,P_upper,P_lower,flight_limit"


def coerce_value(key: str, text: str):
    """Parse one raw config value; the error names the offending key."""
    if key in _INT_KEYS:
        try:
            return int(text)
        except ValueError:
            raise ConfigurationError(f"key {key!r}: expected an integer, got {text!r}") from None
    if key in _FLOAT_KEYS:
        try:
            value = float(text)
        except ValueError:
            raise ConfigurationError(f"key {key!r}: expected a number, got {text!r}") from None
        if math.isnan(value):
            raise ConfigurationError(f"key {key!r}: nan is not a valid value")
        return value
    return text


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat key=value file with # comments; later duplicates win.

    Unknown keys and malformed lines are configuration errors; an unreadable
    file is an I/O error.
    """
    text = Path(path).read_text(encoding="utf-8")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
        if not value:
            raise ConfigurationError(f"{path}:{lineno}: empty value for key {key!r}")
        values[key] = value
    return values


def build_config(values: dict) -> ExperimentConfig:
    """Assemble the typed configuration; dataclass validation applies."""
    system = SystemConfig(**{k: v for k, v in values.items() if k in _SYSTEM_KEYS})
    extra = {k: v for k, v in values.items() if k not in _SYSTEM_KEYS and k != "out"}
    return ExperimentConfig(system=system, **extra)


# --- outputs -------------------------------------------------------------------


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def emit_series(series: RabiSeries, path: str | Path) -> None:
    """Write one series as CSV: fixed header, 12 significant digits, rows in
    sample order.  The flight_limit column is a 0/1 marker, 1 on every row
    whose phase lies beyond the atom flight bound."""
    n = series.phi.size
    stderr = series.P_stderr if series.P_stderr is not None else np.zeros(n)
    upper = series.P_upper if series.P_upper is not None else np.full(n, math.nan)
    lower = series.P_lower if series.P_lower is not None else np.full(n, math.nan)
    bound = series.flight_phi if series.flight_phi is not None else math.inf
    lines = [CSV_HEADER]
    for i in range(n):
        marker = "1" if series.phi[i] > bound else "0"
        lines.append(
            ",".join(
                (
                    _fmt(series.phi[i]),
                    _fmt(series.t[i]),
                    _fmt(series.P[i]),
                    _fmt(stderr[i]),
                    _fmt(upper[i]),
                    _fmt(lower[i]),
                    marker,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility sidecar: resolved config echo, tool version, master
    seed, start and end timestamps, and the output file list."""

    config: dict
    version: str
    master_seed: int
    started: str
    finished: str
    outputs: list[str]

    def to_json(self) -> str:
        body = {
            "config": _jsonable(self.config),
            "version": self.version,
            "master_seed": self.master_seed,
            "started": self.started,
            "finished": self.finished,
            "outputs": list(self.outputs),
        }
        return json.dumps(body, indent=2) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def _config_echo(config: ExperimentConfig, out: str) -> dict:
    system = config.system
    return {
        "mode": config.mode,
        "n_atoms": system.n_atoms,
        "nbar": system.nbar,
        "g_over_gamma": system.g_over_gamma,
        "g_khz": system.g_khz,
        "n_th": system.n_th,
        "c": system.c,
        "cutoff": system.cutoff,
        "t_pi_us": config.t_pi_us,
        "gamma_tp": config.gamma_tp,
        "n0": config.n0,
        "trajectories": config.trajectories,
        "phi_max": config.phi_max,
        "phi_steps": config.phi_steps,
        "seed": config.seed,
        "out": out,
    }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def render_schedule(spin: SpinQuantum) -> str:
    """Revival positions in (0, 2 pi] as a fixed-width table."""
    rows = [f"revival schedule for {spin.n_atoms} atom(s), phi in (0, 2 pi]"]
    rows.append(f"{'phi':>10}  {'phi/2pi':>8}  {'gcd':>3}  {'pairs':>5}  {'replica':>7}  separations")
    for event in revival_schedule(spin):
        rows.append(
            f"{event.phi:>10.6f}  {event.phi / (2.0 * math.pi):>8.4f}  {event.gcd:>3d}"
            f"  {event.pairs:>5d}  {'yes' if event.replica else 'no':>7}"
            f"  {','.join(str(s) for s in event.subset)}"
        )
    return "\n".join(rows)


# --- argument parsing and dispatch ---------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitas",
        description="Collective-spin cavity dynamics: exact evolution, analytic "
        "envelopes, dissipative trajectory ensembles, echo and thermal protocols.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "spontaneous": "free evolution from all atoms excited and a coherent field",
        "echo": "same, with an instantaneous reversal pulse at t_pi_us",
        "thermal": "field thermalization stage, then spontaneous or echo evolution",
        "envelopes": "analytic signal and envelopes only, no trajectories",
        "validate": "run the built-in self-check bundle and report pass/fail",
        "schedule": "print the revival schedule table for n_atoms",
    }
    for name in ("spontaneous", "echo", "thermal", "envelopes", "validate", "schedule"):
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--config", metavar="FILE", help="flat key=value config file (# comments)")
        for key in CONFIG_KEYS:
            if key == "mode":
                continue
            sp.add_argument(f"--{key}", metavar="V", help=f"override config key {key}")
    return parser


def _gather(args: argparse.Namespace) -> dict[str, str]:
    """Raw string values after precedence: defaults < file < env seed < flags."""
    values: dict[str, str] = {}
    if args.config is not None:
        values.update(read_config_file(args.config))
    env_seed = os.environ.get("CAVITAS_SEED")
    if env_seed is not None:
        values["seed"] = env_seed.strip()
    for key in CONFIG_KEYS:
        if key == "mode":
            continue
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _dispatch(args: argparse.Namespace) -> int:
    raw = _gather(args)
    if "mode" in raw and raw["mode"] not in _COMMAND_MODES.values():
        raise ConfigurationError(
            f"key 'mode': expected one of {sorted(_COMMAND_MODES.values())}, got {raw['mode']!r}"
        )
    typed = {key: coerce_value(key, raw[key]) for key in CONFIG_KEYS if key in raw}

    if args.command == "schedule":
        print(render_schedule(SpinQuantum(typed.get("n_atoms", 1))))
        return 0

    # The subcommand is the mode; a conflicting mode key in the file loses.
    typed["mode"] = _COMMAND_MODES[args.command]
    out = typed.pop("out", None)
    config = build_config(typed)

    if config.mode == "validate":
        report = validate(config)
        print(report.render())
        return 0 if report.passed else 1

    started = _now()
    series = run_experiment(config)
    out_path = str(out) if out is not None else f"{args.command}.csv"
    emit_series(series, out_path)
    manifest = RunManifest(
        config=_config_echo(config, out_path),
        version=__version__,
        master_seed=config.seed,
        started=started,
        finished=_now(),
        outputs=[out_path],
    )
    manifest_path = out_path + ".manifest.json"
    manifest.write(manifest_path)
    print(f"wrote {out_path} ({series.phi.size} rows) and {manifest_path}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"cavitas: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cavitas: i/o error: {exc}", file=sys.stderr)
        return 3
    except CavitasError as exc:
        print(f"cavitas: run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
