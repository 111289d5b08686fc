"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical-integrity
error, 4 convergence/coverage failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import (
    ConfigurationError,
    ConvergenceError,
    NumericalIntegrityError,
    WedgeEchoError,
)
from .config import PRESETS, RunConfig, load_preset
from .runner import reproduce_figure, run_scan

_SUBCOMMANDS = (
    "sos",
    "lyapunov",
    "bounce-stats",
    "spectrum",
    "echo",
    "echo-scan",
    "ldos",
    "classical-echo",
    "figure",
    "presets",
)

_LEG_MAP = {
    "sos": {"legs": ["classical"], "figure": "fig1"},
    "lyapunov": {"legs": ["classical"]},
    "bounce-stats": {"legs": ["classical"]},
    "classical-echo": {"legs": ["classical"]},
    "spectrum": {"legs": ["quantum"]},
    "echo": {"legs": ["quantum"]},
    "echo-scan": {"legs": ["quantum"]},
    "ldos": {"legs": ["perturbative"]},
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wedge-echo",
        description="Echo spectroscopy in gravitational wedge billiards",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        sp = sub.add_parser(name)
        if name == "figure":
            sp.add_argument("figure_id", choices=["fig1", "fig2", "fig3", "fig4"])
        if name != "presets":
            sp.add_argument("--config", help="JSON run configuration file")
            sp.add_argument("--preset", help="named preset configuration")
            sp.add_argument("--seed", type=int, help="override the master seed")
            sp.add_argument("--out", help="output directory")
    return p


def _config_from_args(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigurationError("give either --config or --preset, not both")
    if args.config:
        cfg = RunConfig.from_file(args.config)
    elif args.preset:
        cfg = load_preset(args.preset)
    else:
        raise ConfigurationError("a --config file or --preset name is required")
    raw = cfg.raw
    if args.seed is not None:
        raw["seed"] = int(args.seed)
    if args.out:
        raw["out_dir"] = args.out
    overrides = _LEG_MAP.get(args.command)
    if overrides:
        raw.setdefault("legs", overrides["legs"])
        raw["legs"] = overrides["legs"]
        if "figure" in overrides and raw.get("figure") is None:
            raw["figure"] = overrides["figure"]
    if args.command == "echo-scan" and "tau_fixed" not in raw.get("quantum", {}):
        raise ConfigurationError("echo-scan needs quantum.tau_fixed in the config")
    return RunConfig(raw=raw)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            print(json.dumps(sorted(PRESETS), indent=2))
            return 0
        if args.command == "figure":
            overrides = {}
            if args.seed is not None:
                overrides["seed"] = int(args.seed)
            if args.config:
                overrides.update(RunConfig.from_file(args.config).raw)
            manifest = reproduce_figure(
                args.figure_id, overrides or None, out_dir=args.out
            )
        else:
            cfg = _config_from_args(args)
            manifest = run_scan(cfg, out_dir=args.out)
        if manifest.errors:
            for leg, msg in manifest.errors.items():
                print(f"[{leg}] {msg}", file=sys.stderr)
            msg = " ".join(manifest.errors.values())
            if "NumericalIntegrityError" in msg:
                return 3
            if "ConvergenceError" in msg or "CoverageError" in msg:
                return 4
            return 2
        print(f"wrote {len(manifest.files)} files; "
              f"manifest config hash {manifest.config_hash[:12]}")
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalIntegrityError as exc:
        print(f"numerical-integrity error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 4
    except WedgeEchoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
