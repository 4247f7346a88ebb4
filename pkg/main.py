import argparse
import logging
import os
import sys
from typing import Any, Dict, Optional, Sequence

from dotenv import load_dotenv

from src.config.run_config import get_log_level, get_run_config
from src.core.jc_service import JCToolkitService
from src.models.errors import ConfigError
from src.transformers.result_transformers import ResultTransformers

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_VERIFICATION = 3
EXIT_IO = 4
STATUS_EXIT = {"ok": EXIT_OK, "invalid": EXIT_INVALID, "fail": EXIT_VERIFICATION}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser raising ConfigError on invalid input."""

    def error(self, message: str) -> None:
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--delta", type=float, help="Detuning in units of hbar*omega.")
    common.add_argument("--lambda", dest="lambda", type=float, help="Coupling in units of hbar*omega.")
    common.add_argument("--nmax", dest="n_max", type=int, help="Largest photon number (default 40).")
    common.add_argument("--x-min", dest="x_min", type=float)
    common.add_argument("--x-max", dest="x_max", type=float)
    common.add_argument("--points", type=int, help="Grid points (default 2001).")
    common.add_argument("--tol", dest="tol_residual", type=float, help="Operator residual tolerance.")
    common.add_argument("--tol-grid", dest="tol_grid", type=float, help="Grid fit tolerance.")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--output", "-o", help="Output file (stdout when omitted).")
    common.add_argument("--config", dest="config_file", help="key=value config file.")

    parser = _Parser(description="Jaynes-Cummings SUSY partners, hierarchies and Darboux checks.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    spectrum = commands.add_parser("spectrum", parents=[common], help="Analytic spectrum table.")
    spectrum.add_argument("--numeric", action="store_true", help="Reconcile with the truncated matrix.")

    partners = commands.add_parser("partners", parents=[common], help="One intertwiner and its checks.")
    partners.add_argument("--kind", required=True, choices=["L0", "L1", "L2", "L3", "L4", "Lk"])
    partners.add_argument("--k", type=int, default=1, help="Resonant index for Lk.")

    sequence = commands.add_parser("hierarchy", parents=[common], help="Detuned SUSY sequence.")
    sequence.add_argument("--up", type=int, default=0)
    sequence.add_argument("--down", type=int, default=0)
    sequence.add_argument("--sequence", choices=["JC", "aJC"], default="JC")

    resonant = commands.add_parser("resonant", parents=[common], help="Resonant hierarchy.")
    resonant.add_argument("--k", type=int, default=9)
    resonant.add_argument("--sign", type=int, choices=[1, -1], default=1)

    darboux = commands.add_parser("darboux", parents=[common], help="Grid Darboux construction.")
    darboux.add_argument("--pair", required=True, choices=["L0", "L1", "L2", "L3", "L4", "Lk"])
    darboux.add_argument("--k", type=int, default=1)

    commands.add_parser("verify", parents=[common], help="Full acceptance suite.")

    figures = commands.add_parser("figures", parents=[common], help="Figure data.")
    figures.add_argument("--fig", type=int, required=True, choices=[1, 2, 3, 8])
    return parser


def command_kwargs(args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "spectrum":
        return {"numeric": args.numeric}
    if args.command == "partners":
        return {"kind_tag": args.kind, "k": args.k}
    if args.command == "hierarchy":
        return {"steps_up": args.up, "steps_down": args.down, "kind": args.sequence}
    if args.command == "resonant":
        return {"k_max": args.k, "sign": args.sign}
    if args.command == "darboux":
        return {"kind_tag": args.pair, "k": args.k}
    if args.command == "figures":
        return {"fig": args.fig}
    return {}


def process_results(document: Dict[str, Any], output_format: str, output: Optional[str]) -> None:
    """Render the result document and write it to the output file or stdout."""
    text = ResultTransformers().render(document, output_format)
    if output:
        directory = os.path.dirname(output)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info(f"Wrote {output}")
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and map the outcome to an exit code."""
    try:
        level = get_log_level()
    except ConfigError as e:
        level = logging.INFO
        print(f"{e}; falling back to INFO", file=sys.stderr)
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s", stream=sys.stderr)

    try:
        args = build_parser().parse_args(argv)
        overrides = {
            key: getattr(args, key)
            for key in ("delta", "lambda", "n_max", "x_min", "x_max", "points", "tol_residual", "tol_grid", "format", "output")
        }
        config = get_run_config(overrides, args.config_file)
    except ConfigError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID

    document = JCToolkitService(config).invoke(args.command, **command_kwargs(args))
    if "error" in document:
        logger.error(f"{args.command}: {document['error']}")
        return STATUS_EXIT.get(document["status"], EXIT_VERIFICATION)

    try:
        process_results(document, config.output_format, config.output)
    except OSError as e:
        logger.error(f"Could not write results: {e}")
        return EXIT_IO
    return STATUS_EXIT.get(document["status"], EXIT_VERIFICATION)


if __name__ == "__main__":
    sys.exit(main())
