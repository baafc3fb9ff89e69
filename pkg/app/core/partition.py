"""
Plans de partition : décomposition d'une multiplication large en produits
de tranches exécutés sur des tuiles puis accumulés par décalage.

Plans fixes P57 (double précision) et P114 (quadruple précision), plan P24
(simple précision) et planificateur générique pour des largeurs arbitraires.
Le bourrage se fait toujours par des zéros côté poids fort : la valeur
bourrée est égale à la valeur vraie.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from app.core.tiles import (
    CIVP,
    BaseTileMultiplier,
    ExactTileMultiplier,
    TileSet,
    TileShape,
)
from app.core.wideint import WideUint, wu_shl_add, wu_slice

logger = logging.getLogger(__name__)


class PlanError(Exception):
    """Exception de base pour les plans de partition."""
    pass


class PlanningInfeasibleError(PlanError):
    """Aucune tuile du jeu ne couvre une paire de tranches requise."""
    pass


class PlanInvariantError(PlanError):
    """Plan malformé ou produit partiel hors de sa largeur."""
    pass


class UnknownPresetError(PlanError):
    """Nom de plan prédéfini inconnu."""
    pass


class Operand(str, Enum):
    """Opérande d'une tranche"""
    A = "A"
    B = "B"


@dataclass(frozen=True)
class SliceSpec:
    """Tranche [low, low+length) d'un opérande bourré."""
    operand: Operand
    low: int
    length: int

    @property
    def high(self) -> int:
        return self.low + self.length

    @property
    def label(self) -> str:
        return f"{self.operand.value}[{self.low}:{self.high}]"

    def significant_bits(self, true_width: int) -> int:
        """Bits de la tranche sous la largeur vraie (bourrage exclu)."""
        return max(0, min(self.high, true_width) - self.low)

    def to_dict(self) -> Dict[str, Any]:
        return {"operand": self.operand.value, "low": self.low, "len": self.length}


@dataclass(frozen=True)
class PlanStep:
    """Une invocation de tuile : paire de tranches, forme et décalage."""
    a_index: int
    b_index: int
    shape: TileShape
    shift: int
    group: int = 0  # sous-produit d'origine dans un plan hiérarchique


@dataclass(frozen=True)
class PartitionPlan:
    """Ordonnancement aplati des invocations de tuiles d'un produit complet."""
    name: str
    tileset: str
    a_width: int
    b_width: int
    a_padded: int
    b_padded: int
    a_slices: Tuple[SliceSpec, ...]
    b_slices: Tuple[SliceSpec, ...]
    steps: Tuple[PlanStep, ...]

    @property
    def product_width(self) -> int:
        return self.a_padded + self.b_padded

    @property
    def groups(self) -> int:
        """Nombre de sous-produits composés (4 pour P114)."""
        return len({step.group for step in self.steps})

    def slices_of(self, step: PlanStep) -> Tuple[SliceSpec, SliceSpec]:
        return self.a_slices[step.a_index], self.b_slices[step.b_index]

    def census(self) -> Dict[TileShape, int]:
        """Nombre de tuiles par forme, capacité décroissante."""
        counts: Dict[TileShape, int] = {}
        for step in self.steps:
            counts[step.shape] = counts.get(step.shape, 0) + 1
        ordered = sorted(counts, key=lambda s: (-s.capacity, -s.w, -s.h))
        return {shape: counts[shape] for shape in ordered}

    def census_labels(self) -> Dict[str, int]:
        return {shape.label: count for shape, count in self.census().items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "tileset": self.tileset,
            "a_width": self.a_width,
            "b_width": self.b_width,
            "a_padded": self.a_padded,
            "b_padded": self.b_padded,
            "product_width": self.product_width,
            "a_slices": [s.to_dict() for s in self.a_slices],
            "b_slices": [s.to_dict() for s in self.b_slices],
            "steps": [
                {
                    "a_slice": step.a_index,
                    "b_slice": step.b_index,
                    "tile": step.shape.label,
                    "shift": step.shift,
                    "group": step.group,
                }
                for step in self.steps
            ],
            "census": self.census_labels(),
        }


def _slices(operand: Operand, lengths: List[int], base: int = 0) -> List[SliceSpec]:
    """Tranches contiguës à partir de `base`, poids faible d'abord."""
    slices = []
    low = base
    for length in lengths:
        slices.append(SliceSpec(operand, low, length))
        low += length
    return slices


def _assign_tile(tileset: TileSet, a_len: int, b_len: int) -> TileShape:
    """
    Plus petite tuile (capacité, puis (w, h)) couvrant la paire de tranches.

    Raises:
        PlanningInfeasibleError: Si aucune tuile ne convient
    """
    for shape in sorted(tileset.shapes, key=lambda s: (s.capacity, s.w, s.h)):
        if shape.fits(a_len, b_len):
            return shape
    raise PlanningInfeasibleError(
        f"Aucune tuile de {tileset.name} ne couvre une paire de tranches {a_len}x{b_len}"
    )


def _cross_steps(
    a_slices: List[SliceSpec],
    b_slices: List[SliceSpec],
    tileset: TileSet,
) -> List[PlanStep]:
    """Produit cartésien complet des tranches, dans l'ordre (A, puis B)."""
    steps = []
    for i, sa in enumerate(a_slices):
        for j, sb in enumerate(b_slices):
            steps.append(PlanStep(
                a_index=i,
                b_index=j,
                shape=_assign_tile(tileset, sa.length, sb.length),
                shift=sa.low + sb.low,
            ))
    return steps


# Tranches du multiplieur 57x57 : 24 bas, 24 milieu, 9 haut (bourrage dans les 9).
CIVP57_LENGTHS = [24, 24, 9]


def _civp57_plan(true_width: int) -> PartitionPlan:
    a_slices = _slices(Operand.A, CIVP57_LENGTHS)
    b_slices = _slices(Operand.B, CIVP57_LENGTHS)
    plan = PartitionPlan(
        name="p57",
        tileset=CIVP.name,
        a_width=true_width,
        b_width=true_width,
        a_padded=57,
        b_padded=57,
        a_slices=tuple(a_slices),
        b_slices=tuple(b_slices),
        steps=tuple(_cross_steps(a_slices, b_slices, CIVP)),
    )
    validate_plan(plan)
    return plan


def _civp114_plan(true_width: int) -> PartitionPlan:
    core = _civp57_plan(57)
    halves = [0, 57]

    a_slices: List[SliceSpec] = []
    b_slices: List[SliceSpec] = []
    for base in halves:
        a_slices.extend(_slices(Operand.A, CIVP57_LENGTHS, base))
        b_slices.extend(_slices(Operand.B, CIVP57_LENGTHS, base))

    per_half = len(CIVP57_LENGTHS)
    steps = []
    for ha, a_base in enumerate(halves):
        for hb, b_base in enumerate(halves):
            group = ha * len(halves) + hb
            # Décalages composés : base du sous-produit + décalage interne
            for inner in core.steps:
                steps.append(PlanStep(
                    a_index=ha * per_half + inner.a_index,
                    b_index=hb * per_half + inner.b_index,
                    shape=inner.shape,
                    shift=a_base + b_base + inner.shift,
                    group=group,
                ))

    plan = PartitionPlan(
        name="p114",
        tileset=CIVP.name,
        a_width=true_width,
        b_width=true_width,
        a_padded=114,
        b_padded=114,
        a_slices=tuple(a_slices),
        b_slices=tuple(b_slices),
        steps=tuple(steps),
    )
    validate_plan(plan)
    return plan


def plan_p24() -> PartitionPlan:
    """Plan simple précision : un seul multiplieur 24x24."""
    a_slices = _slices(Operand.A, [24])
    b_slices = _slices(Operand.B, [24])
    plan = PartitionPlan(
        name="p24",
        tileset=CIVP.name,
        a_width=24,
        b_width=24,
        a_padded=24,
        b_padded=24,
        a_slices=tuple(a_slices),
        b_slices=tuple(b_slices),
        steps=tuple(_cross_steps(a_slices, b_slices, CIVP)),
    )
    validate_plan(plan)
    return plan


def plan_p57() -> PartitionPlan:
    """
    Plan double précision : significandes de 53 bits bourrés à 57.

    Tranches [24 bas, 24 milieu, 9 haut] ; 9 invocations :
    quatre 24x24, quatre 24x9, une 9x9.
    """
    return _civp57_plan(53)


def plan_p114() -> PartitionPlan:
    """
    Plan quadruple précision : 113 bits bourrés à 114, deux moitiés de 57.

    Quatre sous-produits 57x57 (décalages 0, 57, 57, 114) développés chacun
    selon P57 sans bourrage interne, puis aplatis : 36 tuiles.
    """
    return _civp114_plan(113)


def _usable_dimensions(tileset: TileSet) -> List[int]:
    """Dimensions d qu'une tuile peut apparier avec une tranche de même taille."""
    return [
        d for d in tileset.dimensions
        if any(shape.fits(d, d) for shape in tileset.shapes)
    ]


def _slice_lengths(width: int, dims: List[int]) -> List[int]:
    """
    Découpe une largeur en tranches de dimensions utilisables.

    La largeur bourrée est la plus petite somme de dimensions >= width.
    Parmi les découpages qui l'atteignent, on prend la plus grande dimension
    d'abord : les longueurs décroissent vers le poids fort et le bourrage,
    plus court que la dernière tranche, tombe dans celle-ci.
    """
    limit = width + max(dims)
    reachable = [False] * (limit + 1)
    reachable[0] = True
    for total in range(1, limit + 1):
        reachable[total] = any(d <= total and reachable[total - d] for d in dims)
    padded = next(total for total in range(width, limit + 1) if reachable[total])

    lengths = []
    remaining = padded
    while remaining > 0:
        length = max(d for d in dims if d <= remaining and reachable[remaining - d])
        lengths.append(length)
        remaining -= length
    return lengths


def plan_generic(a_width: int, b_width: int, tiles: TileSet) -> PartitionPlan:
    """
    Construit un plan pour des largeurs quelconques.

    Args:
        a_width: Largeur vraie de l'opérande A
        b_width: Largeur vraie de l'opérande B
        tiles: Jeu de tuiles disponible

    Returns:
        PartitionPlan validé

    Raises:
        PlanningInfeasibleError: Si le jeu est vide ou qu'une paire de tranches
            ne trouve aucune tuile
    """
    if a_width < 1 or b_width < 1:
        raise PlanError(f"Largeurs invalides: {a_width}x{b_width}")
    dims = _usable_dimensions(tiles)
    if not dims:
        raise PlanningInfeasibleError(f"Le jeu de tuiles {tiles.name} n'offre aucune tuile")

    a_slices = _slices(Operand.A, _slice_lengths(a_width, dims))
    b_slices = _slices(Operand.B, _slice_lengths(b_width, dims))

    plan = PartitionPlan(
        name="generic",
        tileset=tiles.name,
        a_width=a_width,
        b_width=b_width,
        a_padded=a_slices[-1].high,
        b_padded=b_slices[-1].high,
        a_slices=tuple(a_slices),
        b_slices=tuple(b_slices),
        steps=tuple(_cross_steps(a_slices, b_slices, tiles)),
    )
    validate_plan(plan, tiles)
    logger.debug(
        f"Plan générique {a_width}x{b_width} sur {tiles.name}: "
        f"{len(plan.steps)} étapes, bourrage {plan.a_padded}x{plan.b_padded}"
    )
    return plan


def validate_plan(plan: PartitionPlan, tiles: Optional[TileSet] = None) -> None:
    """
    Vérifie tous les invariants d'un plan.

    Raises:
        PlanInvariantError: Au premier invariant violé
    """
    for slices, padded, width, operand in (
        (plan.a_slices, plan.a_padded, plan.a_width, Operand.A),
        (plan.b_slices, plan.b_padded, plan.b_width, Operand.B),
    ):
        if padded < width:
            raise PlanInvariantError(f"Largeur bourrée {padded} < largeur vraie {width}")
        cursor = 0
        for spec in slices:
            if spec.operand != operand or spec.low != cursor or spec.length < 1:
                raise PlanInvariantError(
                    f"Tranches de {operand.value} non contiguës à partir du bit {cursor}"
                )
            cursor = spec.high
        if cursor != padded:
            raise PlanInvariantError(
                f"Tranches de {operand.value} couvrent {cursor} bits au lieu de {padded}"
            )

    pairs = [(step.a_index, step.b_index) for step in plan.steps]
    expected = {(i, j) for i in range(len(plan.a_slices)) for j in range(len(plan.b_slices))}
    if len(pairs) != len(set(pairs)) or set(pairs) != expected:
        raise PlanInvariantError("Produit cartésien des tranches incomplet ou dupliqué")

    for step in plan.steps:
        sa, sb = plan.slices_of(step)
        if not step.shape.fits(sa.length, sb.length):
            raise PlanInvariantError(
                f"Tranches {sa.label}x{sb.label} hors de la tuile {step.shape.label}"
            )
        if step.shift != sa.low + sb.low:
            raise PlanInvariantError(
                f"Décalage {step.shift} != {sa.low} + {sb.low} pour {sa.label}x{sb.label}"
            )
        if tiles is not None and not tiles.contains(step.shape):
            raise PlanInvariantError(f"Tuile {step.shape.label} absente de {tiles.name}")


def plan_to_dict(plan: PartitionPlan) -> Dict[str, Any]:
    """Forme structurée d'un plan (sortie --json)."""
    return plan.to_dict()


def _narrow(product: WideUint, width: int) -> WideUint:
    """Réduit un produit de tuile à la largeur de ses tranches."""
    if product.value >> width:
        raise PlanInvariantError(
            f"Produit partiel 0x{product.value:X} dépasse {width} bits"
        )
    return WideUint(product.value, width)


def execute_plan(
    plan: PartitionPlan,
    a: WideUint,
    b: WideUint,
    multiplier: Optional[BaseTileMultiplier] = None,
) -> WideUint:
    """
    Exécute un plan : tranches, produits de tuiles, accumulation décalée.

    Args:
        plan: Plan à exécuter
        a: Opérande A de largeur plan.a_width
        b: Opérande B de largeur plan.b_width
        multiplier: Étage de tuiles (exact par défaut)

    Returns:
        Produit de largeur plan.product_width

    Raises:
        PlanError: Si les largeurs ne correspondent pas au plan
    """
    if a.width != plan.a_width or b.width != plan.b_width:
        raise PlanError(
            f"Opérandes {a.width}x{b.width} bits pour un plan {plan.a_width}x{plan.b_width}"
        )
    backend = multiplier or ExactTileMultiplier()

    a_padded = a.zero_extend(plan.a_padded)
    b_padded = b.zero_extend(plan.b_padded)
    acc = WideUint.zero(plan.product_width)

    # Ordre d'accumulation = ordre des étapes (l'addition est associative)
    for step in plan.steps:
        sa, sb = plan.slices_of(step)
        partial = backend.multiply(
            step.shape,
            wu_slice(a_padded, sa.low, sa.length),
            wu_slice(b_padded, sb.low, sb.length),
        )
        acc = wu_shl_add(acc, _narrow(partial, sa.length + sb.length), step.shift)

    return acc


class PlanFactory:
    """Factory pour obtenir le plan adapté à une largeur ou un préréglage."""

    PRESETS = ("p24", "p57", "p114")

    @staticmethod
    def preset(name: str) -> PartitionPlan:
        """
        Retourne un plan prédéfini.

        Raises:
            UnknownPresetError: Si le préréglage n'existe pas
        """
        key = name.strip().lower()
        if key == "p24":
            return plan_p24()
        elif key == "p57":
            return plan_p57()
        elif key == "p114":
            return plan_p114()
        else:
            raise UnknownPresetError(
                f"Préréglage '{name}' inconnu. Préréglages: {', '.join(PlanFactory.PRESETS)}"
            )

    @staticmethod
    def for_widths(a_width: int, b_width: int, tiles: TileSet) -> PartitionPlan:
        """
        Plans fixes CIVP quand les largeurs correspondent, sinon plan générique.

        Args:
            a_width: Largeur vraie de A
            b_width: Largeur vraie de B
            tiles: Jeu de tuiles

        Returns:
            PartitionPlan
        """
        if tiles.name == CIVP.name and a_width == b_width:
            if a_width == 24:
                return plan_p24()
            if a_width in (53, 57):
                return _civp57_plan(a_width)
            if a_width in (113, 114):
                return _civp114_plan(a_width)
        return plan_generic(a_width, b_width, tiles)
