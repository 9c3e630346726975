"""
Command line front door: ``prscope <subcommand> [flags]``.

Exit status is 0 when the report passes, 1 when its check fails and 2 on
usage or input errors. A JSON report is written whenever a check ran.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from pydantic import ValidationError

from prscope import __version__
from prscope._commands import Command
from prscope.core.errors import PrscopeError
from prscope.parsing import ConfigRun, read_run_values
from prscope.parsing._utils import ComplexUtils, SeedUtils
from prscope.pretty_print import PrettyPrinter

if TYPE_CHECKING:
    from collections.abc import Sequence

    from prscope.core.statevec import StateVector

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# flags a subcommand may take, by ConfigRun field
FLAGS: dict[str, dict[str, Any]] = {
    "n": {"type": int, "help": "qubits per copy"},
    "d": {"type": int, "help": "subspace dimension"},
    "d_values": {"type": int, "nargs": "+", "help": "subspace dimensions to compare"},
    "t": {"type": int, "help": "number of copies (moment order)"},
    "k": {"type": int, "help": "marginal size, or independence order for kwise-verify"},
    "m": {"type": int, "help": "field degree of the k-wise family"},
    "depth": {"type": int, "help": "depth of generated brickwork circuits"},
    "samples": {"type": int, "help": "sampled states"},
    "trials": {"type": int, "help": "Monte Carlo trials per arm"},
    "pairs": {"type": int, "help": "sampled state pairs"},
    "subsets": {"type": int, "help": "inspected subsets"},
    "copies": {"type": int, "help": "measured copies (default d+1)"},
    "circuits": {"type": int, "help": "random circuits to audit"},
    "delta": {"type": float, "help": "trace norm threshold"},
    "outputs": {"type": int, "nargs": "+", "help": "watched output wires (default all)"},
    "ensemble": {"help": "state ensemble: haar, stabilizer, subspace-kwise, subspace-random, subspace-ambient or JSON"},
    "ensemble_b": {"help": "second state ensemble, same forms as --ensemble"},
    "unitary": {"help": "unitary ensemble: haar, clifford or JSON"},
    "circuit": {"type": Path, "help": "circuit file (JSON or YAML)"},
    "postprocess": {"choices": ["none", "lindep"], "help": "classical statistic of the measured copies"},
    "expect": {"choices": ["indistinguishable", "distinguishable"], "help": "outcome that passes"},
    "within_block": {"action": "store_true", "help": "draw every subset inside one block"},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prscope", description="Numerical checks of quantum pseudorandomness.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name, command in Command.registry.items():
        sub = subparsers.add_parser(
            name,
            help=command.summary,
            description=f"{command.summary}.\n\nchecks: {command.checks}\nreference: {command.reference}",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            argument_default=argparse.SUPPRESS,
        )
        for key in command.flags:
            default = command.defaults.get(key)
            options = dict(FLAGS[key])
            if default is not None:
                options["help"] = f"{options['help']} (default {default})"
            sub.add_argument(f"--{key.replace('_', '-')}", dest=key, **options)
        sub.add_argument("--config", type=Path, help="YAML run configuration; flags override its values")
        sub.add_argument("--seed", type=int, help="master seed (default 0)")
        sub.add_argument("--out", type=Path, help=f"JSON report (default {name}.json)")
        sub.add_argument("--csv", type=Path, help="per-trial CSV records")
        sub.add_argument("--dump", type=Path, help="write one sampled state as [re, im] pairs")
        sub.add_argument("--threads", type=int, help="worker threads; never changes results")
        sub.add_argument("--shards", type=int, help="random stream shards (default 1)")
        sub.add_argument("--quiet", action="store_true", help="no summary on standard output")
        sub.add_argument("-v", "--verbose", action="count", help="-v for info, -vv for debug logging")
    return parser


def resolve_config(arguments: dict[str, Any]) -> ConfigRun:
    """Subcommand defaults, then the config file, then explicit flags."""
    subcommand = arguments["subcommand"]
    values = dict(Command.registry[subcommand].defaults)
    if (config_file := arguments.pop("config", None)) is not None:
        file_values = read_run_values(config_file)
        if file_values.get("subcommand", subcommand) != subcommand:
            msg = f"{config_file} configures {file_values['subcommand']!r}, not {subcommand!r}"
            raise PrscopeError(msg)
        values |= file_values
    values |= arguments
    return ConfigRun.model_validate(values)


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    msg = f"{type(obj).__name__} is not JSON serializable"
    raise TypeError(msg)


def write_report(path: Path, config: ConfigRun, report: Any) -> None:
    document = {
        "subcommand": config.subcommand,
        "params": config.params(),
        "report": report.as_json_dict(),
        "timestamp": datetime.datetime.now(datetime.UTC).isoformat(),
    }
    path.write_text(json.dumps(document, sort_keys=True, indent=2, default=_json_default) + "\n")
    logger.info("report written to %s", path)


def write_csv(path: Path, report: Any) -> None:
    """One row per trial and statistic; keys of the form ``arm.statistic`` name their arm."""
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["trial_index", "arm", "statistic", "value"])
        for key, values in getattr(report, "per_trial", {}).items():
            arm, _, statistic = key.rpartition(".")
            for index, value in enumerate(np.asarray(values, dtype=np.float64)):
                writer.writerow([index, arm or "ensemble", statistic, repr(float(value))])


def write_state(path: Path, psi: StateVector) -> None:
    """A fixed-list ensemble holding ``psi``, readable back through ``--ensemble``."""
    path.write_text(json.dumps({"variant": "fixed_list", "states": [ComplexUtils.to_pairs(psi.amps)]}) + "\n")


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _one_line(exc: Exception) -> str:
    return "; ".join(line.strip() for line in str(exc).splitlines() if line.strip())


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and write its reports; returns the exit status."""
    parser = build_parser()
    try:
        arguments = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    quiet = arguments.pop("quiet", False)
    _configure_logging(arguments.pop("verbose", 0) or 0)
    subcommand = arguments["subcommand"]
    try:
        config = resolve_config(arguments)
        command = Command.registry[subcommand](config)
        logger.info("running %s with seed %d", subcommand, config.seed)
        report = command.run(SeedUtils.derive_rng(config.seed, subcommand))
    except (PrscopeError, ValidationError, OSError) as exc:
        sys.stderr.write(f"prscope {subcommand}: error: {_one_line(exc)}\n")
        return EXIT_USAGE

    write_report(config.out or Path(f"{subcommand}.json"), config, report)
    if config.csv is not None:
        write_csv(config.csv, report)
    if config.dump is not None and (psi := command.dump_state(SeedUtils.derive_rng(config.seed, f"{subcommand}:dump"))):
        write_state(config.dump, psi)
    if not quiet:
        sys.stdout.write(PrettyPrinter(colors=sys.stdout.isatty()).format(report) + "\n")
    return EXIT_PASS if report.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())
