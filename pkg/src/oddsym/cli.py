"""Command line interface.

    oddsym run <config> [--out DIR] [--seed N] [--mesh N] [--jobs K]
    oddsym presets
    oddsym audit <config>

``<config>`` is a config file, the same path without its ``.conf`` suffix, or
the name of a bundled preset. ODDSYM_OUT (also read from ``.env``) overrides
``--out``.
"""

import argparse
import logging
import os
from pathlib import Path

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .config import ExperimentConfig, config_from_text, load_config
from .exceptions import ConfigError
from .presets import get_preset, preset_catalog
from .runner import EXIT_OK, EXIT_PRECONDITION, audit, run

logger = logging.getLogger(__name__)
console = Console()


def resolve_config(reference: str) -> ExperimentConfig:
    """Load a config from a file path, the path without ``.conf``, or a preset name.

    Raises:
        ConfigError: If the file is invalid.
        FileNotFoundError: If nothing matches.
    """
    path = Path(reference)
    for candidate in (path, path.with_name(path.name + ".conf")):
        if candidate.is_file():
            return load_config(candidate)
    try:
        return config_from_text(get_preset(path.name).text)
    except KeyError:
        raise FileNotFoundError(f"No config file or preset named '{reference}'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oddsym",
        description="Minimizers, odd rearrangement and symmetry certificates for weighted double-well energies.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run the task of a config file")
    run_parser.add_argument("config", help="config file or preset name")
    run_parser.add_argument("--out", default=None, help="output directory or s3:// prefix")
    run_parser.add_argument("--seed", type=int, default=None, help="seed for the random preset")
    run_parser.add_argument("--mesh", type=int, default=None, help="number of mesh elements")
    run_parser.add_argument("--jobs", type=int, default=None, help="sweep worker processes")

    commands.add_parser("presets", help="list the bundled presets")

    audit_parser = commands.add_parser("audit", help="print hypothesis verdicts for a config")
    audit_parser.add_argument("config", help="config file or preset name")
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _print_presets() -> None:
    table = Table(title="Presets")
    table.add_column("name", style="bold")
    table.add_column("task")
    table.add_column("regime")
    for preset in preset_catalog():
        table.add_row(preset.name, preset.config.task, preset.regime)
    console.print(table)


def _print_audit(record: dict) -> None:
    hypotheses = Table(title="Hypotheses")
    hypotheses.add_column("condition", style="bold")
    hypotheses.add_column("holds")
    hypotheses.add_column("margin", justify="right")
    for name, value in record["hypotheses"].items():
        if isinstance(value, dict) and "holds" in value:
            hypotheses.add_row(name, str(value["holds"]), f"{value['margin']:.6g}")
        elif name == "muffin_x0":
            hypotheses.add_row(name, str(value is not None), "" if value is None else f"{value:.6g}")
    console.print(hypotheses)

    theorems = Table(title="Results")
    theorems.add_column("result", style="bold")
    theorems.add_column("verdict")
    colors = {"certified": "green", "not_certified": "red", "not_applicable": "dim"}
    for name, verdict in record["theorems"].items():
        theorems.add_row(name, f"[{colors[verdict.value]}]{verdict.value}[/]")
    console.print(theorems)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv(Path.cwd() / ".env")
    _configure_logging(args.verbose)

    if args.command == "presets":
        _print_presets()
        return EXIT_OK

    try:
        config = resolve_config(args.config)
    except (ConfigError, FileNotFoundError) as error:
        console.print(f"[red]error:[/] {error}")
        return EXIT_PRECONDITION

    if args.command == "audit":
        _print_audit(audit(config))
        return EXIT_OK

    overrides = {key: getattr(args, key) for key in ("seed", "mesh") if getattr(args, key) is not None}
    if overrides:
        config = config.model_copy(update=overrides)
    out = os.getenv("ODDSYM_OUT") or args.out
    try:
        return run(config, out=out, jobs=args.jobs)
    except ConfigError as error:
        console.print(f"[red]error:[/] {error}")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    raise SystemExit(main())
