"""
Comptabilité de ressources des plans de partition.

Recensement des tuiles, occupation structurelle, gaspillage et comparaison
de jeux de tuiles. Les chiffres affirmés par la source sont affichés à côté
des chiffres calculés, jamais substitués.
"""

import logging
from typing import Dict, List, Sequence, Tuple, Union

from app.api.models import (
    CensusEntry,
    Comparison,
    ComparisonRow,
    PaperClaim,
    ResourceReport,
)
from app.core.partition import PartitionPlan, PlanError, PlanFactory
from app.core.tiles import (
    BASELINE_18,
    CIVP,
    TileError,
    TileInvocation,
    TileSet,
    tile_utilization,
)

logger = logging.getLogger(__name__)


class ReportError(Exception):
    """Exception levée pour une comparaison mal formée."""
    pass


PRECISION_PRESETS: Dict[str, int] = {
    "single": 24,
    "double": 53,
    "quad": 113,
}

# (jeu, largeur A, largeur B) -> [(métrique, valeur affirmée, passage)]
PAPER_CLAIMS: Dict[Tuple[str, int, int], List[Tuple[str, Union[int, float], str]]] = {
    (BASELINE_18.name, 113, 113): [
        ("total_tiles", 49, "it will require 49 18x18 bit multipliers"),
        ("underutilized_tiles", 17, "17 (35%) will be actually performing either "
                                    "5x5 bit or 5x18 bit multiplication"),
        ("underutilized_fraction", 0.35, "17 (35%)"),
    ],
    (BASELINE_18.name, 54, 54): [
        ("total_tiles", 9, "nine 18x18 bit multipliers"),
    ],
    (CIVP.name, 53, 53): [
        ("total_tiles", 9, "four 24x24 bit multipliers, four 24x9 bit multipliers "
                           "and one 9x9 bit multiplier"),
    ],
    (CIVP.name, 57, 57): [
        ("total_tiles", 9, "four 24x24 bit multipliers, four 24x9 bit multipliers "
                           "and one 9x9 bit multiplier"),
    ],
    (CIVP.name, 113, 113): [
        ("total_tiles", 36, "four 57x57 bit multipliers"),
        ("underutilized_tiles", 0, "will be completely utilized"),
    ],
}


def _claims_for(report: ResourceReport) -> List[PaperClaim]:
    claims = []
    key = (report.tileset, report.a_width, report.b_width)
    for metric, claimed, quote in PAPER_CLAIMS.get(key, []):
        computed = getattr(report, metric)
        if isinstance(claimed, float):
            agrees = round(computed, 2) == claimed
        else:
            agrees = computed == claimed
        if not agrees:
            logger.warning(
                f"Chiffre de la source non reproduit ({report.tileset} "
                f"{report.a_width}x{report.b_width}, {metric}): "
                f"affirmé {claimed}, calculé {computed}"
            )
        claims.append(PaperClaim(
            metric=metric,
            paper_claim=claimed,
            computed=computed,
            agrees=agrees,
            quote=quote
        ))
    return claims


def analyze(plan: PartitionPlan) -> ResourceReport:
    """
    Calcule le rapport de ressources structurel d'un plan.

    Les bits significatifs d'une tranche sont ceux situés sous la largeur
    vraie de l'opérande ; les bits de bourrage n'en font pas partie.

    Args:
        plan: Plan valide

    Returns:
        ResourceReport avec les chiffres de la source applicables
    """
    census = plan.census()
    capacity = sum(count * shape.capacity for shape, count in census.items())

    useful = 0
    underutilized = 0
    for step in plan.steps:
        sa, sb = plan.slices_of(step)
        a_bits = sa.significant_bits(plan.a_width)
        b_bits = sb.significant_bits(plan.b_width)
        if a_bits == 0 or b_bits == 0:
            # Tranche entièrement dans le bourrage : tuile brûlée pour rien
            underutilized += 1
            continue
        useful += a_bits * b_bits
        if tile_utilization(TileInvocation(step.shape, a_bits, b_bits)) < 1:
            underutilized += 1

    total = len(plan.steps)
    report = ResourceReport(
        plan=plan.name,
        tileset=plan.tileset,
        a_width=plan.a_width,
        b_width=plan.b_width,
        a_padded=plan.a_padded,
        b_padded=plan.b_padded,
        census=[CensusEntry(tile=shape.label, count=n) for shape, n in census.items()],
        total_tiles=total,
        capacity_bitproducts=capacity,
        useful_bitproducts=useful,
        utilization=useful / capacity,
        underutilized_tiles=underutilized,
        underutilized_fraction=underutilized / total,
    )
    report.paper_claims = _claims_for(report)

    logger.info(
        f"Analyse {plan.name} sur {plan.tileset} ({plan.a_width}x{plan.b_width}): "
        f"{total} tuiles, occupation {report.utilization:.4f}"
    )
    return report


def compare(a_width: int, b_width: int, sets: Sequence[TileSet]) -> Comparison:
    """
    Compare plusieurs jeux de tuiles pour une même multiplication.

    Une erreur de planification est rapportée dans sa ligne sans
    interrompre les autres.

    Args:
        a_width: Largeur vraie de A
        b_width: Largeur vraie de B
        sets: Jeux de tuiles (au moins un)

    Returns:
        Comparison, lignes triées par capacité puis nom
    """
    if not sets:
        raise ReportError("Au moins un jeu de tuiles est requis pour comparer")

    rows = []
    for tiles in sets:
        try:
            plan = PlanFactory.for_widths(a_width, b_width, tiles)
            rows.append(ComparisonRow(tileset=tiles.name, report=analyze(plan)))
        except (PlanError, TileError) as e:
            logger.error(f"Planification impossible pour {tiles.name}: {e}")
            rows.append(ComparisonRow.from_error(tiles.name, str(e)))

    rows.sort(key=lambda row: (
        row.report is None,
        row.report.capacity_bitproducts if row.report else 0,
        row.tileset,
    ))
    return Comparison(a_width=a_width, b_width=b_width, rows=rows)


def compare_precision(name: str, sets: Sequence[TileSet]) -> Comparison:
    """Raccourci : compare pour une précision nommée (single, double, quad)."""
    try:
        width = PRECISION_PRESETS[name.strip().lower()]
    except KeyError:
        raise ReportError(
            f"Précision '{name}' inconnue. Précisions: {', '.join(PRECISION_PRESETS)}"
        ) from None
    return compare(width, width, sets)
