"""
Entiers non signés de largeur explicite.

Substrat exact de toute l'arithmétique des significandes : chaque valeur
porte sa largeur déclarée, vérifiée à chaque opération. Un débordement est
une erreur, jamais un repli modulo.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

logger = logging.getLogger(__name__)


class WideIntError(Exception):
    """Exception de base pour les entiers larges."""
    pass


class HexParseError(WideIntError):
    """Chaîne hexadécimale malformée."""
    pass


class WidthOverflowError(WideIntError):
    """Valeur qui ne tient pas dans la largeur déclarée."""
    pass


class SliceBoundsError(WideIntError):
    """Tranche hors des bornes de l'opérande."""
    pass


@dataclass(frozen=True)
class WideUint:
    """
    Entier non signé de largeur déclarée.

    La valeur est stockée comme entier Python ; `bits` en donne la vue
    LSB d'abord. Tout bit de rang >= width est nul.
    """
    value: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise WidthOverflowError(f"Largeur invalide: {self.width} (>= 1 requis)")
        if self.value < 0:
            raise WidthOverflowError(f"Valeur négative interdite: {self.value}")
        if self.value >> self.width:
            raise WidthOverflowError(
                f"Valeur 0x{self.value:X} trop large pour {self.width} bits"
            )

    @property
    def bits(self) -> Tuple[int, ...]:
        """Bits de la valeur, poids faible d'abord."""
        return tuple((self.value >> i) & 1 for i in range(self.width))

    def bit(self, index: int) -> int:
        """Retourne le bit de rang `index`."""
        if not 0 <= index < self.width:
            raise SliceBoundsError(f"Bit {index} hors de [0, {self.width})")
        return (self.value >> index) & 1

    def value_eq(self, other: "WideUint") -> bool:
        """Égalité numérique, indépendamment des largeurs."""
        return self.value == other.value

    def zero_extend(self, width: int) -> "WideUint":
        """Élargit par des zéros côté poids fort."""
        if width < self.width:
            raise WidthOverflowError(
                f"Extension de {self.width} vers {width} bits impossible (réduction)"
            )
        return WideUint(self.value, width)

    def to_hex(self) -> str:
        """Hexadécimal majuscule, MSB d'abord, sur ceil(width/4) chiffres."""
        digits = (self.width + 3) // 4
        return f"{self.value:0{digits}X}"

    def to_dict(self) -> Dict[str, Any]:
        return {"width": self.width, "hex": self.to_hex()}

    @classmethod
    def zero(cls, width: int) -> "WideUint":
        return cls(0, width)

    @classmethod
    def ones(cls, width: int) -> "WideUint":
        return cls((1 << width) - 1, width)


def wu_from_hex(text: str, width: int) -> WideUint:
    """
    Construit un WideUint depuis une chaîne hexadécimale.

    Args:
        text: Chiffres hexadécimaux, MSB d'abord (préfixe 0x toléré)
        width: Largeur déclarée en bits

    Returns:
        WideUint de largeur `width`

    Raises:
        HexParseError: Si la chaîne n'est pas hexadécimale
        WidthOverflowError: Si la valeur dépasse 2^width - 1
    """
    cleaned = text.strip()
    if cleaned[:2].lower() == "0x":
        cleaned = cleaned[2:]
    cleaned = cleaned.replace("_", "")
    if not cleaned or any(c not in "0123456789abcdefABCDEF" for c in cleaned):
        raise HexParseError(f"Hexadécimal invalide: {text!r}")

    value = int(cleaned, 16)
    if value >> width:
        raise WidthOverflowError(
            f"Valeur 0x{cleaned.upper()} trop large pour une largeur de {width} bits"
        )
    return WideUint(value, width)


def wu_slice(x: WideUint, low: int, length: int) -> WideUint:
    """
    Extrait les bits [low, low+length) de x.

    Returns:
        WideUint de largeur `length`
    """
    if low < 0 or length < 1 or low + length > x.width:
        raise SliceBoundsError(
            f"Tranche [{low}, {low + length}) hors de l'opérande de {x.width} bits"
        )
    return WideUint((x.value >> low) & ((1 << length) - 1), length)


def wu_shl_add(acc: WideUint, term: WideUint, shift: int) -> WideUint:
    """
    Retourne acc + term * 2^shift, de même largeur que acc.

    Raises:
        WidthOverflowError: Si le terme décalé ou la somme dépasse acc.width
    """
    if shift < 0:
        raise WidthOverflowError(f"Décalage négatif: {shift}")
    if term.width + shift > acc.width:
        raise WidthOverflowError(
            f"Terme de {term.width} bits décalé de {shift} dépasse l'accumulateur "
            f"de {acc.width} bits"
        )
    total = acc.value + (term.value << shift)
    if total >> acc.width:
        raise WidthOverflowError(
            f"Somme de {total.bit_length()} bits dépasse l'accumulateur de {acc.width} bits"
        )
    return WideUint(total, acc.width)


def wu_mul_oracle(a: WideUint, b: WideUint) -> WideUint:
    """
    Produit exact par multiplication longue bit à bit.

    N'utilise ni tuiles ni plans de partition : c'est l'oracle de référence
    de tous les plans. Largeur du résultat = a.width + b.width.
    """
    acc = 0
    multiplicand = a.value
    for i in range(b.width):
        if (b.value >> i) & 1:
            acc += multiplicand << i
    return WideUint(acc, a.width + b.width)
