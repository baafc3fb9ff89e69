"""
OutputFormatter - Rendu texte des plans, rapports et résultats

Sortie orientée lignes et stable (fichiers de référence) ; la forme
machine passe par les modèles pydantic et to_json().
"""

import logging
from typing import List, Optional, Union

from pydantic import BaseModel

from app.api.models import (
    Comparison,
    IntMulResult,
    MulResult,
    PaperClaim,
    ResourceReport,
    SelfTestSummary,
)
from app.core.config import settings
from app.core.partition import PartitionPlan

logger = logging.getLogger(__name__)

COMPARE_ROW = "{:<14}{:<9}{:>5}{:>10}{:>8}{:>13}{:>15}  {}"
COMPARE_HEADER = (
    "tileset", "plan", "tiles", "capacity", "useful", "utilization", "underutilized", "census"
)


def _number(value: Union[int, float]) -> str:
    return f"{value:.4f}" if isinstance(value, float) else str(value)


def _claim_line(claim: PaperClaim, prefix: str = "paper_claim") -> str:
    verdict = "agrees" if claim.agrees else "disagrees"
    return (
        f"{prefix} {claim.metric}: {_number(claim.paper_claim)} "
        f"(computed {_number(claim.computed)}, {verdict})"
    )


class OutputFormatter:
    """
    Formateur des sorties de la ligne de commande

    Usage:
        formatter = OutputFormatter()
        print(formatter.format_plan(plan_p57()))
        print(formatter.to_json(report))
    """

    def __init__(self, json_indent: Optional[int] = None):
        self.json_indent = settings.json_indent if json_indent is None else json_indent

    def format_plan(self, plan: PartitionPlan) -> str:
        """
        Liste des tranches, des étapes (tranches, tuile, décalage) et recensement.

        Le groupe de sous-produit n'est affiché que pour les plans composés.
        """
        lines = [
            f"plan: {plan.name}",
            f"tileset: {plan.tileset}",
            f"a: width {plan.a_width} padded {plan.a_padded}",
            f"b: width {plan.b_width} padded {plan.b_padded}",
            f"product_width: {plan.product_width}",
            "a_slices: " + " ".join(s.label for s in plan.a_slices),
            "b_slices: " + " ".join(s.label for s in plan.b_slices),
            "steps:",
        ]
        composed = plan.groups > 1
        for n, step in enumerate(plan.steps):
            sa, sb = plan.slices_of(step)
            line = f"  step {n}: {sa.label} x {sb.label} -> {step.shape.label} << {step.shift}"
            if composed:
                line += f" (group {step.group})"
            lines.append(line)

        census = plan.census_labels()
        lines.append("census: " + " ".join(f"{label}:{n}" for label, n in census.items()))
        lines.append(f"total_tiles: {len(plan.steps)}")
        return "\n".join(lines)

    def format_report(self, report: ResourceReport) -> str:
        """Rapport de ressources et chiffres de la source applicables."""
        lines = [
            f"report: {report.plan} on {report.tileset} ({report.a_width}x{report.b_width})",
            f"census: {report.census_line()}",
            f"total_tiles: {report.total_tiles}",
            f"capacity_bitproducts: {report.capacity_bitproducts}",
            f"useful_bitproducts: {report.useful_bitproducts}",
            f"utilization: {report.utilization:.4f}",
            f"underutilized_tiles: {report.underutilized_tiles}/{report.total_tiles} "
            f"({report.underutilized_fraction:.4f})",
        ]
        lines.extend(_claim_line(claim) for claim in report.paper_claims)
        return "\n".join(lines)

    def format_comparison(self, comparison: Comparison) -> str:
        """
        Tableau comparatif, une ligne par jeu de tuiles.

        Les lignes en erreur gardent leur place ; les chiffres de la source
        suivent le tableau.
        """
        lines = [
            f"compare: {comparison.a_width}x{comparison.b_width}",
            COMPARE_ROW.format(*COMPARE_HEADER),
        ]
        claims: List[str] = []
        for row in comparison.rows:
            report = row.report
            if report is None:
                lines.append(f"{row.tileset:<14}error: {row.error}")
                continue
            lines.append(COMPARE_ROW.format(
                row.tileset,
                report.plan,
                report.total_tiles,
                report.capacity_bitproducts,
                report.useful_bitproducts,
                f"{report.utilization:.4f}",
                f"{report.underutilized_tiles}/{report.total_tiles}",
                report.census_line(),
            ))
            claims.extend(
                _claim_line(claim, f"paper_claim {row.tileset}") for claim in report.paper_claims
            )
        return "\n".join(lines + claims)

    def format_mul(self, result: MulResult) -> str:
        lines = [result.result, "flags: " + (" ".join(result.flags) or "none")]
        if result.report is not None:
            lines.append(self.format_report(result.report))
        return "\n".join(lines)

    def format_int_mul(self, result: IntMulResult) -> str:
        lines = [result.product]
        if result.report is not None:
            lines.append(self.format_report(result.report))
        return "\n".join(lines)

    def format_selftest(self, summary: SelfTestSummary) -> str:
        """Compteurs par suite, premier contre-exemple en hexadécimal."""
        lines = [f"selftest seed={summary.seed} samples={summary.samples}"]
        for suite in summary.suites:
            lines.append(
                f"{suite.suite}: {suite.vectors} vectors, "
                f"{suite.mismatches} mismatches, {suite.status}"
            )
            if suite.first_failure:
                detail = " ".join(f"{k}={v}" for k, v in suite.first_failure.items())
                lines.append(f"  first failure: {detail}")
        if summary.warning:
            lines.append(f"warning: {summary.warning}")
        lines.append("result: " + ("pass" if summary.passed else "FAIL"))
        return "\n".join(lines)

    def to_json(self, model: BaseModel) -> str:
        return model.model_dump_json(indent=self.json_indent)
