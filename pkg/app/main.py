"""
Point d'entrée en ligne de commande: python -m app.main <sous-commande> [options]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app import __version__
from app.core.settings import LOG_FORMAT, get_log_level, get_thread_count
from app.models.kernels import COMBINED_ZEROS, K_ZEROS
from app.services.kernels import KERNEL_KINDS
from app.services.processors import (
    ConvolveTestProcessor,
    KernelSampleProcessor,
    KernelTestProcessor,
    SimulationProcessor,
    SliceExportProcessor,
    ZerosProcessor,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Liste d'entiers attendue, reçu '{text}'")


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Liste de réels attendue, reçu '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdnrbc",
        description="Conditions aux limites transparentes en temps et simulation de la cape sphérique de Drude",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING... (défaut: TDNRBC_LOG_LEVEL ou INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    zeros = sub.add_parser("zeros", help="Tables des pôles l = 1..lmax")
    zeros.add_argument("--kind", choices=[K_ZEROS, COMBINED_ZEROS], default=K_ZEROS)
    zeros.add_argument("--lmax", type=int, required=True)
    zeros.add_argument("--out", type=Path, default=None)

    kernel_test = sub.add_parser("kernel-test", help="Validation croisée de rho_l")
    kernel_test.add_argument("--b", type=float, default=3.0)
    kernel_test.add_argument("--c", type=float, default=5.0)
    kernel_test.add_argument("--l", type=_int_list, default=[1, 5, 10, 15, 30, 50])
    kernel_test.add_argument("--t", type=_float_list, default=[1.0, 2.0, 4.0, 10.0])
    kernel_test.add_argument("--out", type=Path, default=None)

    kernel_sample = sub.add_parser("kernel-sample", help="Série temporelle de la partie régulière d'un noyau")
    kernel_sample.add_argument("--kernel", choices=KERNEL_KINDS, default="sigma")
    kernel_sample.add_argument("--l", type=int, required=True)
    kernel_sample.add_argument("--b", type=float, default=1.0)
    kernel_sample.add_argument("--c", type=float, default=1.0)
    kernel_sample.add_argument("--tmax", type=float, default=10.0)
    kernel_sample.add_argument("--n", type=int, default=201)
    kernel_sample.add_argument("--out", type=Path, default=None)

    convolve = sub.add_parser("convolve-test", help="Ordre de convergence de la convolution récursive")
    convolve.add_argument("--l", type=int, default=1)
    convolve.add_argument("--b", type=float, default=1.0)
    convolve.add_argument("--c", type=float, default=1.0)
    convolve.add_argument("--dt", type=_float_list, default=[0.02, 0.01, 0.005, 0.0025])
    convolve.add_argument("--out", type=Path, default=None)

    simulate = sub.add_parser("simulate", help="Simulation d'un scénario de cape")
    simulate.add_argument("--config", type=Path, required=True)
    simulate.add_argument("--run", type=Path, required=True, help="Répertoire des résultats")
    simulate.add_argument("--threads", type=int, default=None)

    slice_export = sub.add_parser("slice-export", help="Réexporter une coupe enregistrée")
    slice_export.add_argument("--run", type=Path, required=True)
    slice_export.add_argument("--time", type=float, required=True)
    slice_export.add_argument("--full", action="store_true")
    slice_export.add_argument("--out", type=Path, required=True)
    return parser


def build_processor(args: argparse.Namespace):
    if args.command == "zeros":
        return ZerosProcessor(args.kind, args.lmax, args.out)
    if args.command == "kernel-test":
        return KernelTestProcessor(args.b, args.c, args.l, args.t, args.out)
    if args.command == "kernel-sample":
        return KernelSampleProcessor(args.kernel, args.l, args.b, args.c, args.tmax, args.n, args.out)
    if args.command == "convolve-test":
        return ConvolveTestProcessor(args.l, args.b, args.c, args.dt, args.out)
    if args.command == "simulate":
        return SimulationProcessor(args.config, args.run, threads=get_thread_count(args.threads))
    return SliceExportProcessor(args.run, args.time, args.out, full=args.full)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help et --version sortent avec 0
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    level = get_log_level(args.log_level)
    if not isinstance(logging.getLevelName(level), int):
        print(f"Niveau de log invalide: '{level}'", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        processor = build_processor(args)
    except ValueError as e:
        logger.error(str(e))
        return EXIT_FAILURE

    result = processor.run()
    if not result["success"]:
        print(f"Erreur ({result['process_type']}): {result['error']}", file=sys.stderr)
        return EXIT_FAILURE
    if "table" in result:
        sys.stdout.write(result["table"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
