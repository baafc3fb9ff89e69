"""
Point d'entrée en ligne de commande du modèle CIVP.

Commandes : mul, imul, plan, compare, selftest. Sortie texte stable par
défaut, documents JSON avec --json. Codes de sortie : 0 succès, 1 échec de
vérification, 2 erreur d'usage.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from app.api.models import IntMulResult, MulResult, PlanDocument
from app.core.config import settings
from app.core.fpmul import (
    FORMATS,
    FpError,
    FpFlag,
    RoundingMode,
    fp_from_hex,
    fp_multiply,
    get_format,
    int_multiply,
    plan_for_format,
)
from app.core.output_formatter import OutputFormatter
from app.core.partition import PlanError, PlanFactory, plan_to_dict
from app.core.tiles import BaseTileMultiplier, TileError, get_tileset
from app.core.wideint import WideIntError, wu_from_hex
from app.manager import SelfTestManager
from app.services.report_service import (
    PRECISION_PRESETS,
    ReportError,
    analyze,
    compare,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (WideIntError, TileError, PlanError, FpError, ReportError)


class UsageError(Exception):
    """Arguments cohérents pour argparse mais invalides pour la commande."""
    pass


def _width(text: str) -> int:
    """Largeur en bits, ou nom de précision (single, double, quad)."""
    key = text.strip().lower()
    if key in PRECISION_PRESETS:
        return PRECISION_PRESETS[key]
    try:
        width = int(key)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"largeur invalide: {text!r} (entier ou {', '.join(PRECISION_PRESETS)})"
        ) from None
    if width < 1:
        raise argparse.ArgumentTypeError(f"largeur invalide: {width}")
    return width


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="civp",
        description="Modèle bit-exact d'un multiplieur à précision variable sur tuiles.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="Journalisation détaillée sur stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    mul = commands.add_parser("mul", help="Multiplication flottante IEEE-754")
    mul.add_argument("--format", required=True, choices=list(FORMATS), dest="fmt")
    mul.add_argument("--rounding", choices=[m.value for m in RoundingMode],
                     default=settings.default_rounding)
    mul.add_argument("--report", action="store_true",
                     help="Ajoute le rapport de ressources du plan de significande")
    mul.add_argument("--json", action="store_true")
    mul.add_argument("a", metavar="A", help="Motif hexadécimal")
    mul.add_argument("b", metavar="B", help="Motif hexadécimal")

    imul = commands.add_parser("imul", help="Multiplication entière non signée")
    imul.add_argument("width", type=_width, metavar="WIDTH")
    imul.add_argument("a", metavar="A")
    imul.add_argument("b", metavar="B")
    imul.add_argument("--tileset", default="civp")
    imul.add_argument("--report", action="store_true")
    imul.add_argument("--json", action="store_true")

    plan = commands.add_parser("plan", help="Plan de partition sérialisé")
    plan.add_argument("widths", nargs="*", type=_width, metavar="WIDTH",
                      help="Largeurs de A et B")
    plan.add_argument("--tileset", default="civp")
    plan.add_argument("--preset", help=f"Plan prédéfini ({', '.join(PlanFactory.PRESETS)})")
    plan.add_argument("--json", action="store_true")

    cmp = commands.add_parser("compare", help="Comparaison de jeux de tuiles")
    cmp.add_argument("a_width", type=_width, metavar="WIDTH_A")
    cmp.add_argument("b_width", type=_width, metavar="WIDTH_B")
    cmp.add_argument("tilesets", nargs="+", metavar="TILESET")
    cmp.add_argument("--json", action="store_true")

    selftest = commands.add_parser("selftest", help="Équivalence aux oracles indépendants")
    selftest.add_argument("--samples", type=int, default=settings.selftest_samples)
    selftest.add_argument("--seed", type=int, default=None,
                          help="Graine (défaut: CIVP_SEED)")
    selftest.add_argument("--json", action="store_true")

    return parser


def cmd_mul(args, formatter: OutputFormatter) -> int:
    fmt = get_format(args.fmt)
    mode = RoundingMode(args.rounding)
    a, b = fp_from_hex(args.a, fmt), fp_from_hex(args.b, fmt)

    value, flags = fp_multiply(a, b, mode)
    result = MulResult(
        format=fmt.name,
        a=a.to_hex(),
        b=b.to_hex(),
        rounding=mode.value,
        result=value.to_hex(),
        flags=[flag.value for flag in FpFlag if flag in flags],
        report=analyze(plan_for_format(fmt)) if args.report else None,
    )
    logger.info(f"mul {fmt.name} {result.a} x {result.b} -> {result.result}")
    print(formatter.to_json(result) if args.json else formatter.format_mul(result))
    return EXIT_OK


def cmd_imul(args, formatter: OutputFormatter) -> int:
    tiles = get_tileset(args.tileset)
    a, b = wu_from_hex(args.a, args.width), wu_from_hex(args.b, args.width)

    product = int_multiply(a, b, tiles)
    result = IntMulResult(
        width=args.width,
        tileset=tiles.name,
        a=a.to_hex(),
        b=b.to_hex(),
        product=product.to_hex(),
        report=analyze(PlanFactory.for_widths(a.width, b.width, tiles)) if args.report else None,
    )
    print(formatter.to_json(result) if args.json else formatter.format_int_mul(result))
    return EXIT_OK


def cmd_plan(args, formatter: OutputFormatter) -> int:
    if args.preset and args.widths:
        raise UsageError("--preset exclut les largeurs")
    if args.preset:
        plan = PlanFactory.preset(args.preset)
    elif len(args.widths) == 2:
        plan = PlanFactory.for_widths(args.widths[0], args.widths[1], get_tileset(args.tileset))
    else:
        raise UsageError("plan attend --preset NAME ou deux largeurs WIDTH_A WIDTH_B")

    if args.json:
        print(formatter.to_json(PlanDocument.from_plan_dict(plan_to_dict(plan))))
    else:
        print(formatter.format_plan(plan))
    return EXIT_OK


def cmd_compare(args, formatter: OutputFormatter) -> int:
    sets = [get_tileset(name) for name in args.tilesets]
    comparison = compare(args.a_width, args.b_width, sets)
    print(formatter.to_json(comparison) if args.json else formatter.format_comparison(comparison))
    return EXIT_OK


def cmd_selftest(
    args,
    formatter: OutputFormatter,
    multiplier: Optional[BaseTileMultiplier] = None,
) -> int:
    if args.samples < 0:
        raise UsageError(f"--samples doit être >= 0 (reçu {args.samples})")
    seed = args.seed if args.seed is not None else settings.civp_seed

    summary = SelfTestManager(args.samples, seed, multiplier).run()
    print(formatter.to_json(summary) if args.json else formatter.format_selftest(summary))
    return EXIT_OK if summary.passed else EXIT_FAILURE


COMMANDS = {
    "mul": cmd_mul,
    "imul": cmd_imul,
    "plan": cmd_plan,
    "compare": cmd_compare,
}


def main(
    argv: Optional[Sequence[str]] = None,
    multiplier: Optional[BaseTileMultiplier] = None,
) -> int:
    """
    Exécute une commande.

    Args:
        argv: Arguments (sys.argv[1:] par défaut)
        multiplier: Étage de tuiles du self-test (exact par défaut)

    Returns:
        Code de sortie
    """
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )

    formatter = OutputFormatter()
    try:
        if args.command == "selftest":
            return cmd_selftest(args, formatter, multiplier)
        return COMMANDS[args.command](args, formatter)
    except (UsageError, *USAGE_ERRORS) as e:
        logger.debug(f"Commande {args.command} rejetée", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
