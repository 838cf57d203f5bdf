"""
Command-line interface: bound tables, capacity queries, Monte-Carlo
experiments, sweeps, design comparisons and the MCP tool server.

Primary output (CSV or JSON lines) goes to ``--out`` or stdout; progress and
diagnostics go to stderr through logging. Exit codes: 0 when every row
succeeded, 1 when some row failed, 2 for invalid flags or configuration.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, cast

import uvicorn
from pydantic import ValidationError

from . import __version__
from .actions.bounds import iter_bound_rows, table_channel
from .actions.capacity import CAPACITY_FIELDS, capacity_record
from .actions.compare import COMPARE_FIELDS, iter_compare_rows
from .actions.sweep import iter_sweep_rows
from .config import Settings, check_server_key, merge_options, read_config_file
from .mcp_tools import MCPServer, register_tools
from .utils.bounds import ROW_FIELDS, OptimizerSettings
from .utils.errors import NoisyGTError
from .utils.experiment import RESULT_FIELDS, ExperimentConfig, TableConfig, iter_results
from .utils.output import FORMATS, TableWriter, open_output, run_header, write_design

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ROW_FAILED = 1
EXIT_INVALID = 2

# Parser keys that are not run options
_NON_OPTIONS = {"command", "handler", "config", "log_level"}


# ── Parser ─────────────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisygt",
        description="Noisy group testing: COMP/DD bounds, channel capacity and simulations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value run file (flags take precedence)")
    common.add_argument("--log-level", default=None, help="Override log level")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out", type=Path, help="Output file (default: stdout)")
    output.add_argument("--format", choices=FORMATS, help="Output format (default: csv)")

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument("--p", help="False-positive probability (comma list for sweep)")
    channel.add_argument("--q", help="False-negative probability (comma list for sweep)")

    table = argparse.ArgumentParser(add_help=False)
    table.add_argument("--theta", help="Comma-separated sparsity exponents (default 0.1..0.9)")

    design = argparse.ArgumentParser(add_help=False)
    design.add_argument("--design", choices=["cc", "bernoulli"], help="Test design (default cc)")

    commands = parser.add_subparsers(dest="command", required=True)

    bounds = commands.add_parser(
        "bounds",
        parents=[common, output, channel, table, design],
        help="COMP/DD bound table with converse and reference rows",
    )
    bounds.add_argument("--alg", help="Comma-separated decoders: comp,dd (default both)")
    bounds.set_defaults(handler=_bounds)

    capacity = commands.add_parser(
        "capacity", parents=[common, output, channel], help="Capacity of the p-q channel"
    )
    capacity.set_defaults(handler=_capacity)

    sweep = commands.add_parser(
        "sweep",
        parents=[common, output, channel, table, design],
        help="Bounds over a theta x p x q grid",
    )
    sweep.add_argument("--alg", help="Comma-separated decoders: comp,dd (default both)")
    sweep.set_defaults(handler=_sweep)

    compare = commands.add_parser(
        "compare",
        parents=[common, output, channel, table],
        help="Constant-column vs Bernoulli bounds per theta",
    )
    compare.set_defaults(handler=_compare)

    simulate = commands.add_parser(
        "simulate", parents=[common, output, channel, design], help="Monte-Carlo recovery trials"
    )
    simulate.add_argument("--n", type=int, help="Number of items (default 10000)")
    simulate.add_argument("--theta", help="Sparsity exponent, k = round(n^theta)")
    simulate.add_argument("--alg", choices=["comp", "dd"], help="Decoder (default dd)")
    simulate.add_argument("--mult", help="Comma-separated test-count multipliers")
    simulate.add_argument("--trials", type=int, help="Trials per multiplier (default 100)")
    simulate.add_argument("--seed", type=int, help="Master seed (fallback NOISYGT_SEED, then 0)")
    simulate.add_argument("--threads", type=int, help="Worker threads (default: all CPUs)")
    simulate.add_argument("--dump-design", type=Path, help="Write the first design to PATH")
    simulate.add_argument(
        "--density", choices=["optimal", "capacity"], help="Design density source"
    )
    simulate.add_argument("--k-design", type=int, help="Size the design for this k")
    simulate.add_argument(
        "--threshold-mode", choices=["nominal", "per_item"], help="Decoder threshold degree"
    )
    simulate.add_argument(
        "--timing", action="store_true", default=None, help="Add a wallclock column"
    )
    simulate.set_defaults(handler=_simulate)

    serve = commands.add_parser("serve", parents=[common], help="Run the MCP tool server")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8080)
    serve.set_defaults(handler=_serve)

    return parser


def collect_options(args: argparse.Namespace, settings: Settings) -> dict[str, Any]:
    """Merge flags, the ``--config`` file and the environment into one option dict."""
    flags = {key: value for key, value in vars(args).items() if key not in _NON_OPTIONS}
    file_values = read_config_file(args.config) if args.config else {}
    return merge_options(flags, file_values, settings)


# ── Commands ───────────────────────────────────────────────────────────────────


def _write_table(
    command: str,
    options: dict[str, Any],
    flags: dict[str, Any],
    fields: list[str],
    rows: Iterable[dict[str, Any]],
) -> int:
    fmt = options.get("format") or "csv"
    failed = 0
    with open_output(options.get("out")) as stream:
        writer = TableWriter(
            stream, fields, fmt, meta=run_header(__version__, command, {**flags, "format": fmt})
        )
        for row in rows:
            writer.write_row(row)
            if row.get("status") == "error":
                failed += 1
    if failed:
        logger.error(f"{command}: {failed} of {writer.rows_written} rows failed")
        return EXIT_ROW_FAILED
    logger.info(f"{command}: {writer.rows_written} rows written")
    return EXIT_OK


def _table_config(options: dict[str, Any]) -> TableConfig:
    return TableConfig(**options)


def _bounds(options: dict[str, Any], settings: Settings) -> int:
    config = _table_config(options)
    table_channel(config)
    rows = iter_bound_rows(config, OptimizerSettings.from_settings(settings))
    return _write_table("bounds", options, config.model_dump(mode="json"), ROW_FIELDS, rows)


def _sweep(options: dict[str, Any], settings: Settings) -> int:
    config = _table_config(options)
    rows = iter_sweep_rows(config, OptimizerSettings.from_settings(settings))
    return _write_table("sweep", options, config.model_dump(mode="json"), ROW_FIELDS, rows)


def _compare(options: dict[str, Any], settings: Settings) -> int:
    config = _table_config(options)
    table_channel(config)
    rows = iter_compare_rows(config, OptimizerSettings.from_settings(settings))
    flags = config.model_dump(mode="json", include={"theta", "p", "q"})
    return _write_table("compare", options, flags, COMPARE_FIELDS, rows)


def _capacity(options: dict[str, Any], settings: Settings) -> int:
    p, q = float(options.get("p") or 0.0), float(options.get("q") or 0.0)
    record = capacity_record(p, q)
    return _write_table("capacity", options, {"p": p, "q": q}, CAPACITY_FIELDS, [record])


def _simulate(options: dict[str, Any], settings: Settings) -> int:
    config = ExperimentConfig(**options)
    # p + q = 1 is rejected here, before the output file exists
    logger.info(f"simulate: {config.channel.kind} channel, seed {config.seed}")
    fields = RESULT_FIELDS + ["wallclock"] if config.timing else RESULT_FIELDS

    def dump(design):
        write_design(design, cast(Path, config.dump_design))

    results = iter_results(
        config,
        OptimizerSettings.from_settings(settings),
        on_design=dump if config.dump_design else None,
    )
    rows = (result.as_row(config.timing) for result in results)
    flags = config.model_dump(mode="json", exclude={"threads"})
    return _write_table("simulate", options, flags, fields, rows)


def _serve(options: dict[str, Any], settings: Settings) -> int:
    host, port = options["host"], options["port"]
    server = MCPServer(api_key=check_server_key(settings))
    register_tools(server, settings)
    app = server.create_app()
    logger.info(f"Starting noisygt tool server on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="info")
    return EXIT_OK


# ── Entry ──────────────────────────────────────────────────────────────────────


def run(args: argparse.Namespace, settings: Settings) -> int:
    """Execute a parsed command and return its exit code."""
    handler: Callable[[dict[str, Any], Settings], int] = args.handler
    try:
        return handler(collect_options(args, settings), settings)
    except (ValidationError, NoisyGTError, ValueError, FileNotFoundError) as exc:
        logger.error(f"{args.command}: {exc}")
        return EXIT_INVALID
    except OSError as exc:
        logger.error(f"{args.command}: cannot write output: {exc}")
        return EXIT_INVALID


def main(argv: Optional[Sequence[str]] = None, settings: Optional[Settings] = None) -> int:
    """Parse ``argv`` and run the command with already-loaded settings."""
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args, settings if settings is not None else Settings())
