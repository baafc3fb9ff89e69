"""
Blocs multiplieurs dédiés (tuiles) et jeux de tuiles comparés.

Une tuile calcule un produit exact ; son taux d'occupation est une
comptabilité séparée, structurelle, qui ne dépend pas des données.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from app.core.wideint import WideUint

logger = logging.getLogger(__name__)


class TileError(Exception):
    """Exception de base pour les tuiles."""
    pass


class TileOverflowError(TileError):
    """Opérande plus large que la tuile dans les deux orientations."""
    pass


class DegenerateInvocationError(TileError):
    """Invocation sans aucun bit significatif."""
    pass


class UnknownTileSetError(TileError):
    """Nom de jeu de tuiles inconnu."""
    pass


@dataclass(frozen=True, order=True)
class TileShape:
    """Multiplieur matériel w x h (opérande A sur w bits, B sur h bits)."""
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise TileError(f"Dimensions de tuile invalides: {self.w}x{self.h}")

    @property
    def capacity(self) -> int:
        """Capacité en produits de bits."""
        return self.w * self.h

    @property
    def label(self) -> str:
        return f"{self.w}x{self.h}"

    def fits(self, a_width: int, b_width: int) -> bool:
        """Vrai si (a_width, b_width) tient dans la tuile, orientation libre."""
        return (a_width <= self.w and b_width <= self.h) or (
            a_width <= self.h and b_width <= self.w
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"w": self.w, "h": self.h}


@dataclass(frozen=True)
class TileSet:
    """Collection nommée de formes de tuiles (orientation (h, w) implicite)."""
    name: str
    shapes: Tuple[TileShape, ...]
    alias: str = ""

    def __post_init__(self):
        if len(set(self.shapes)) != len(self.shapes):
            raise TileError(f"Formes dupliquées dans le jeu {self.name}")

    @property
    def dimensions(self) -> List[int]:
        """Toutes les dimensions de tuiles disponibles, décroissantes."""
        return sorted({d for s in self.shapes for d in (s.w, s.h)}, reverse=True)

    def contains(self, shape: TileShape) -> bool:
        return shape in self.shapes or TileShape(shape.h, shape.w) in self.shapes

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "shapes": [s.label for s in self.shapes]}


@dataclass(frozen=True)
class TileInvocation:
    """Une utilisation de tuile et ses bits significatifs structurels."""
    shape: TileShape
    a_bits: int
    b_bits: int


CIVP = TileSet(
    name="CIVP",
    shapes=(TileShape(24, 24), TileShape(24, 9), TileShape(9, 9)),
    alias="civp",
)
BASELINE_18 = TileSet(
    name="BASELINE_18",
    shapes=(TileShape(18, 18),),
    alias="baseline18",
)
# Les blocs 25x18 ne servent à aucune décomposition ; présents pour comparaison.
EXISTING_FPGA = TileSet(
    name="EXISTING_FPGA",
    shapes=(TileShape(25, 18), TileShape(18, 18), TileShape(9, 9)),
    alias="existing",
)


def builtin_tilesets() -> List[TileSet]:
    """Retourne les trois jeux de tuiles comparés."""
    return [CIVP, BASELINE_18, EXISTING_FPGA]


def get_tileset(name: str) -> TileSet:
    """
    Résout un jeu de tuiles par alias CLI ou nom canonique.

    Raises:
        UnknownTileSetError: Si le nom est inconnu
    """
    key = name.strip().lower()
    for tileset in builtin_tilesets():
        if key in (tileset.alias, tileset.name.lower()):
            return tileset
    known = ", ".join(t.alias for t in builtin_tilesets())
    raise UnknownTileSetError(f"Jeu de tuiles '{name}' inconnu. Jeux disponibles: {known}")


def tile_mul(shape: TileShape, a: WideUint, b: WideUint) -> WideUint:
    """
    Produit exact d'une tuile, opérandes échangés si nécessaire.

    Args:
        shape: Forme de la tuile
        a: Opérande A (a.width <= w, ou <= h si échangé)
        b: Opérande B

    Returns:
        Produit de largeur w + h

    Raises:
        TileOverflowError: Si aucune orientation ne contient les opérandes
    """
    if not shape.fits(a.width, b.width):
        raise TileOverflowError(
            f"Opérandes {a.width}x{b.width} bits trop larges pour la tuile {shape.label}"
        )
    # Le câblage échangé donne le même produit ; seule la largeur compte.
    return WideUint(a.value * b.value, shape.w + shape.h)


def tile_utilization(inv: TileInvocation) -> float:
    """
    Taux d'occupation structurel (a_bits * b_bits) / (w * h).

    Raises:
        DegenerateInvocationError: Si a_bits ou b_bits est nul
    """
    if inv.a_bits < 1 or inv.b_bits < 1:
        raise DegenerateInvocationError(
            f"Invocation {inv.shape.label} dégénérée: "
            f"{inv.a_bits}x{inv.b_bits} bits significatifs"
        )
    if not inv.shape.fits(inv.a_bits, inv.b_bits):
        raise TileOverflowError(
            f"{inv.a_bits}x{inv.b_bits} bits significatifs dépassent la tuile {inv.shape.label}"
        )
    return (inv.a_bits * inv.b_bits) / inv.shape.capacity


class BaseTileMultiplier(ABC):
    """
    Interface abstraite d'un étage de tuiles.
    Permet de substituer un modèle fautif pour éprouver les vérifications.
    """

    @abstractmethod
    def multiply(self, shape: TileShape, a: WideUint, b: WideUint) -> WideUint:
        """
        Multiplie deux tranches sur une tuile.

        Args:
            shape: Forme de la tuile utilisée
            a: Tranche de l'opérande A
            b: Tranche de l'opérande B

        Returns:
            Produit de largeur shape.w + shape.h
        """
        pass


class ExactTileMultiplier(BaseTileMultiplier):
    """Tuiles correctes : délègue à tile_mul."""

    def multiply(self, shape: TileShape, a: WideUint, b: WideUint) -> WideUint:
        return tile_mul(shape, a, b)


class FaultyTileMultiplier(BaseTileMultiplier):
    """
    Tuiles fautives : inverse un bit de sortie.

    Args:
        flip_bit: Rang du bit inversé dans chaque produit
        shape: Forme ciblée (toutes les formes si None)
    """

    def __init__(self, flip_bit: int = 0, shape: Optional[TileShape] = None):
        self.flip_bit = flip_bit
        self.shape = shape

    def multiply(self, shape: TileShape, a: WideUint, b: WideUint) -> WideUint:
        product = tile_mul(shape, a, b)
        if self.shape is not None:
            targeted = (self.shape, TileShape(self.shape.h, self.shape.w))
            if shape not in targeted:
                return product
        if self.flip_bit >= product.width:
            return product
        return WideUint(product.value ^ (1 << self.flip_bit), product.width)
