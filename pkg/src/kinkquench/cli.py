"""Command line entry point.

    kinkquench run CONFIG
    kinkquench preset NAME [--override key=value ...]
    kinkquench list-presets

Errors go to stderr as one JSON object per line; the exit code is 0 on
success, 2 for bad configs, 3 for capability limits and 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import __version__
from .errors import CapabilityError, ConfigError
from .scenario import PRESETS, load_config, parse_override, preset_config, run_scenario

EXIT_CONFIG = 2
EXIT_CAPABILITY = 3
EXIT_FAILURE = 1


def _emit_error(kind: str, message: str, **extra) -> None:
    print(json.dumps({"level": "error", "kind": kind, "message": message, **extra}), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinkquench",
        description="Quench dynamics of long-range transverse-field Ising chains.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config file (TOML or JSON)")
    run.add_argument("config")
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    preset = sub.add_parser("preset", help="run a named preset")
    preset.add_argument("name")
    preset.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    sub.add_parser("list-presets", help="print preset names and settings")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-presets":
        for name, cfg in PRESETS.items():
            print(f"{name}\t{json.dumps(cfg, sort_keys=True)}")
        return 0
    try:
        overrides = dict(parse_override(o) for o in args.override)
        if args.command == "run":
            cfg = load_config(args.config)
            cfg.update(overrides)
        else:
            cfg = preset_config(args.name, overrides)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ResourceWarning)
            bundle = run_scenario(cfg)
        for w in caught:
            print(json.dumps({"level": "warning", "message": str(w.message)}), file=sys.stderr)
    except ConfigError as exc:
        _emit_error("config", str(exc))
        return EXIT_CONFIG
    except CapabilityError as exc:
        _emit_error("capability", str(exc))
        return EXIT_CAPABILITY
    except Exception as exc:  # noqa: BLE001 - reported as structured error
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_FAILURE
    print(bundle.output_dir / "manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
