"""Command-line entry point: ``cohsim <scenario> [--config FILE] [--out DIR] [--seed N] ...``.

Exit codes: 0 success, 1 domain or parse error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import SCENARIOS, parse_config
from .errors import CohsimError
from .scenarios import run_scenario

log = logging.getLogger("cohsim")

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2

# flag dest -> (config section or None, key)
OVERRIDES = {
    "xi": ("optics", "xi_deg"),
    "theta": ("optics", "theta_deg"),
    "phi": ("optics", "phi_deg"),
    "tau": ("optics", "tau"),
    "delta_f": ("optics", "delta_f"),
    "sigma": ("ensemble", "c"),
    "span": ("ensemble", "span_sigmas"),
    "n_points": ("ensemble", "n_points"),
    "tau_start": ("scan", "tau_start"),
    "tau_stop": ("scan", "tau_stop"),
    "tau_points": ("scan", "tau_points"),
    "phi_points": ("scan", "phi_points"),
    "angle_step": ("scan", "angle_step_deg"),
    "draws": ("scan", "draws"),
    "rate": ("source", "singles_rate"),
    "pair_fraction": ("source", "pair_fraction"),
    "duration": ("source", "duration"),
    "window": ("source", "window"),
    "workers": ("source", "workers"),
    "format": ("output", "format"),
    "angles": (None, "angles_deg"),
    "seed": (None, "seed"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cohsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cohsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON scenario config")
    common.add_argument("--out", type=Path, help="output directory (default: config output.path)")
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("-v", "--verbose", action="store_true")
    g = common.add_argument_group("optics (angles in degrees, tau in units of 1/sigma)")
    g.add_argument("--xi", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--phi", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--delta-f", type=float)
    g = common.add_argument_group("ensemble")
    g.add_argument("--sigma", type=float, help="Gaussian width c (sigma when a=1)")
    g.add_argument("--span", type=float, help="grid half-width in sigmas")
    g.add_argument("--n-points", type=int)
    g = common.add_argument_group("scan")
    g.add_argument("--tau-start", type=float)
    g.add_argument("--tau-stop", type=float)
    g.add_argument("--tau-points", type=int)
    g.add_argument("--phi-points", type=int)
    g.add_argument("--angle-step", type=float)
    g.add_argument("--draws", type=int)

    for name in SCENARIOS:
        p = sub.add_parser(name, parents=[common], help=f"run the {name} scenario")
        if name == "chsh":
            p.add_argument("--angles", type=float, nargs=4, metavar=("A", "A_PRIME", "B", "B_PRIME"))
        if name == "montecarlo":
            g = p.add_argument_group("source")
            g.add_argument("--rate", type=float, help="source events per unit lab time")
            g.add_argument("--pair-fraction", type=float)
            g.add_argument("--duration", type=float, help="lab time per delay point")
            g.add_argument("--window", type=float, help="coincidence window")
            g.add_argument("--workers", type=int)

    p = sub.add_parser("replay", help="re-run the configuration stored in a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    data = {}
    if args.config is not None:
        data = json.loads(args.config.read_text())
        if not isinstance(data, dict):
            raise CohsimError("config file must hold a JSON object")
    if data.get("scenario", args.command) != args.command:
        raise CohsimError(f"config scenario {data['scenario']!r} does not match subcommand {args.command!r}")
    data["scenario"] = args.command
    for dest, (section, key) in OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if section is None:
            data[key] = value
        else:
            data.setdefault(section, {})[key] = value
    return data


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "replay":
            manifest = json.loads(args.manifest.read_text())
            cfg = parse_config(manifest["config"])
            out = args.out
        else:
            cfg = parse_config(_merge(args))
            out = args.out
        paths, manifest = run_scenario(cfg, out)
    except (CohsimError, json.JSONDecodeError, KeyError) as exc:
        print(f"cohsim: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"cohsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        log.info("wrote %s", path)
    print(paths[-1].parent)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
