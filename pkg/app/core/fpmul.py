"""
Multiplication flottante IEEE-754 à précision variable (simple, double,
quadruple) dont le produit des significandes passe exclusivement par les
plans de partition sur tuiles.

Décodage/encodage complets, normalisation, arrondi guard/round/sticky dans
les quatre modes, sous-normaux, infinis et NaN.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, Optional, Tuple

from app.core.partition import (
    PartitionPlan,
    PlanFactory,
    PlanInvariantError,
    execute_plan,
    plan_p24,
    plan_p57,
    plan_p114,
)
from app.core.tiles import CIVP, BaseTileMultiplier, TileSet
from app.core.wideint import WideIntError, WideUint, wu_from_hex, wu_slice

logger = logging.getLogger(__name__)

HEX_DIGITS = frozenset("0123456789abcdefABCDEF")


class FpError(Exception):
    """Exception de base pour la multiplication flottante."""
    pass


class FpContractError(FpError):
    """Formats ou largeurs d'opérandes incompatibles."""
    pass


class FpRangeError(FpError):
    """Champs hors de la plage encodable du format."""
    pass


class FpHexError(FpError):
    """Motif hexadécimal invalide pour le format."""
    pass


@dataclass(frozen=True)
class FpFormat:
    """Format d'échange IEEE-754 binaire."""
    name: str
    exp_bits: int
    frac_bits: int

    @property
    def total_bits(self) -> int:
        return 1 + self.exp_bits + self.frac_bits

    @property
    def bias(self) -> int:
        return (1 << (self.exp_bits - 1)) - 1

    @property
    def sig_bits(self) -> int:
        """Précision, bit caché compris."""
        return self.frac_bits + 1

    @property
    def emax(self) -> int:
        return self.bias

    @property
    def emin(self) -> int:
        return 1 - self.bias

    @property
    def exp_mask(self) -> int:
        return (1 << self.exp_bits) - 1

    @property
    def hex_digits(self) -> int:
        return self.total_bits // 4

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "total_bits": self.total_bits,
            "exp_bits": self.exp_bits,
            "frac_bits": self.frac_bits,
            "bias": self.bias,
            "sig_bits": self.sig_bits,
        }


SINGLE = FpFormat("single", exp_bits=8, frac_bits=23)
DOUBLE = FpFormat("double", exp_bits=11, frac_bits=52)
QUAD = FpFormat("quad", exp_bits=15, frac_bits=112)

FORMATS: Dict[str, FpFormat] = {fmt.name: fmt for fmt in (SINGLE, DOUBLE, QUAD)}


def get_format(name: str) -> FpFormat:
    """Résout un format par nom (single, double, quad)."""
    try:
        return FORMATS[name.strip().lower()]
    except KeyError:
        raise FpContractError(
            f"Format '{name}' inconnu. Formats: {', '.join(FORMATS)}"
        ) from None


class FpClass(str, Enum):
    """Classe d'une valeur flottante"""
    ZERO = "zero"
    SUBNORMAL = "subnormal"
    NORMAL = "normal"
    INFINITY = "infinity"
    NAN = "nan"


class RoundingMode(str, Enum):
    """Modes d'arrondi IEEE-754"""
    NEAREST_EVEN = "nearest_even"
    TOWARD_ZERO = "toward_zero"
    TOWARD_POSITIVE = "toward_positive"
    TOWARD_NEGATIVE = "toward_negative"


class FpFlag(str, Enum):
    """Drapeaux d'exception (ordre canonique d'affichage)"""
    INVALID = "invalid"
    OVERFLOW = "overflow"
    UNDERFLOW = "underflow"
    INEXACT = "inexact"


def flags_label(flags: Iterable[FpFlag]) -> str:
    """Drapeaux en ordre canonique, 'none' si vide."""
    raised = set(flags)
    names = [flag.value for flag in FpFlag if flag in raised]
    return " ".join(names) if names else "none"


@dataclass(frozen=True)
class FpValue:
    """Valeur empaquetée dans un format."""
    format: FpFormat
    bits: WideUint

    def __post_init__(self):
        if self.bits.width != self.format.total_bits:
            raise FpContractError(
                f"{self.bits.width} bits pour le format {self.format.name} "
                f"({self.format.total_bits} bits)"
            )

    @property
    def sign(self) -> int:
        return self.bits.value >> (self.format.total_bits - 1)

    @property
    def exp_field(self) -> int:
        return (self.bits.value >> self.format.frac_bits) & self.format.exp_mask

    @property
    def fraction(self) -> int:
        return self.bits.value & ((1 << self.format.frac_bits) - 1)

    def to_hex(self) -> str:
        return self.bits.to_hex()

    @classmethod
    def from_int(cls, fmt: FpFormat, raw: int) -> "FpValue":
        return cls(fmt, WideUint(raw, fmt.total_bits))


@dataclass(frozen=True)
class Decoded:
    """Champs décodés ; exponent est None hors normaux/sous-normaux."""
    cls: FpClass
    sign: int
    exponent: Optional[int]
    significand: WideUint


def fp_from_hex(text: str, fmt: FpFormat) -> FpValue:
    """
    Lit un motif big-endian d'exactement total_bits/4 chiffres.

    Raises:
        FpHexError: Si la longueur ou les chiffres sont invalides
    """
    cleaned = text.strip()
    if cleaned[:2].lower() == "0x":
        cleaned = cleaned[2:]
    if any(c not in HEX_DIGITS for c in cleaned):
        raise FpHexError(f"'{text}' : chiffres non hexadécimaux")
    if len(cleaned) != fmt.hex_digits:
        raise FpHexError(
            f"'{text}' : {len(cleaned)} chiffres hexadécimaux, "
            f"{fmt.hex_digits} attendus pour le format {fmt.name}"
        )
    try:
        return FpValue(fmt, wu_from_hex(cleaned, fmt.total_bits))
    except WideIntError as e:
        raise FpHexError(str(e)) from e


def fp_to_hex(value: FpValue) -> str:
    return value.to_hex()


def fp_decode(v: FpValue) -> Decoded:
    """
    Décode une valeur (tous les motifs sont décodables).

    Normaux : bit caché à la position frac_bits, exposant e - bias.
    Sous-normaux : bit caché nul, exposant 1 - bias.
    NaN : la charge utile (fraction) est rendue comme significande.
    """
    fmt = v.format
    sign, e_field, fraction = v.sign, v.exp_field, v.fraction

    if e_field == fmt.exp_mask:
        if fraction:
            return Decoded(FpClass.NAN, sign, None, WideUint(fraction, fmt.sig_bits))
        return Decoded(FpClass.INFINITY, sign, None, WideUint.zero(fmt.sig_bits))
    if e_field == 0:
        if fraction == 0:
            return Decoded(FpClass.ZERO, sign, None, WideUint.zero(fmt.sig_bits))
        return Decoded(FpClass.SUBNORMAL, sign, fmt.emin, WideUint(fraction, fmt.sig_bits))

    significand = fraction | (1 << fmt.frac_bits)
    return Decoded(FpClass.NORMAL, sign, e_field - fmt.bias, WideUint(significand, fmt.sig_bits))


def fp_encode(
    cls: FpClass,
    sign: int,
    exponent: Optional[int],
    significand: Optional[WideUint],
    fmt: FpFormat,
) -> FpValue:
    """
    Encode des champs déjà normalisés et arrondis.

    Raises:
        FpRangeError: Si l'exposant ou le significande sort de la plage de la classe
    """
    sign_bit = (sign & 1) << (fmt.total_bits - 1)
    sig = significand.value if significand is not None else 0
    hidden = 1 << fmt.frac_bits

    if cls is FpClass.ZERO:
        return FpValue.from_int(fmt, sign_bit)
    if cls is FpClass.INFINITY:
        return FpValue.from_int(fmt, sign_bit | (fmt.exp_mask << fmt.frac_bits))
    if cls is FpClass.NAN:
        if not 0 < sig < hidden:
            raise FpRangeError(f"Charge utile NaN 0x{sig:X} hors de ]0, 2^{fmt.frac_bits}[")
        return FpValue.from_int(fmt, sign_bit | (fmt.exp_mask << fmt.frac_bits) | sig)
    if cls is FpClass.SUBNORMAL:
        if exponent not in (None, fmt.emin):
            raise FpRangeError(f"Exposant sous-normal {exponent} != {fmt.emin}")
        if not 0 < sig < hidden:
            raise FpRangeError(f"Significande sous-normal 0x{sig:X} hors plage")
        return FpValue.from_int(fmt, sign_bit | sig)

    if exponent is None or not fmt.emin <= exponent <= fmt.emax:
        raise FpRangeError(
            f"Exposant {exponent} hors de [{fmt.emin}, {fmt.emax}] pour {fmt.name}"
        )
    if not hidden <= sig < (hidden << 1):
        raise FpRangeError(f"Significande normal 0x{sig:X} non normalisé")
    e_field = exponent + fmt.bias
    return FpValue.from_int(fmt, sign_bit | (e_field << fmt.frac_bits) | (sig - hidden))


@lru_cache(maxsize=None)
def plan_for_format(fmt: FpFormat) -> PartitionPlan:
    """Plan de significande : P24 (simple), P57 (double), P114 (quadruple)."""
    if fmt == SINGLE:
        return plan_p24()
    elif fmt == DOUBLE:
        return plan_p57()
    elif fmt == QUAD:
        return plan_p114()
    raise FpContractError(f"Aucun plan de significande pour le format {fmt.name}")


def sig_multiply(
    a_sig: WideUint,
    b_sig: WideUint,
    fmt: FpFormat,
    multiplier: Optional[BaseTileMultiplier] = None,
) -> WideUint:
    """
    Produit des significandes via le plan du format.

    Les bits de tête issus du bourrage (114 -> 106, 228 -> 226) sont
    vérifiés nuls avant troncature.

    Returns:
        Produit de largeur 2 * sig_bits

    Raises:
        FpContractError: Si les largeurs ne valent pas sig_bits
        PlanInvariantError: Si un bit de bourrage du produit est non nul
    """
    if a_sig.width != fmt.sig_bits or b_sig.width != fmt.sig_bits:
        raise FpContractError(
            f"Significandes {a_sig.width}x{b_sig.width} bits, "
            f"{fmt.sig_bits} attendus pour {fmt.name}"
        )
    plan = plan_for_format(fmt)
    full = execute_plan(plan, a_sig, b_sig, multiplier)

    width = 2 * fmt.sig_bits
    if full.value >> width:
        raise PlanInvariantError(
            f"Bits de bourrage non nuls au-dessus du bit {width} dans le produit {fmt.name}"
        )
    return wu_slice(full, 0, width)


def _round_shifted(
    value: int,
    shift: int,
    sign: int,
    mode: RoundingMode,
) -> Tuple[int, bool]:
    """
    Décale `value` de `shift` bits à droite et arrondit.

    Returns:
        (significande arrondi, inexact)
    """
    if shift <= 0:
        return value << -shift, False

    kept = value >> shift
    guard = (value >> (shift - 1)) & 1
    round_bit = (value >> (shift - 2)) & 1 if shift >= 2 else 0
    sticky = shift >= 3 and (value & ((1 << (shift - 2)) - 1)) != 0
    inexact = bool(guard or round_bit or sticky)

    if mode is RoundingMode.NEAREST_EVEN:
        increment = guard and (round_bit or sticky or kept & 1)
    elif mode is RoundingMode.TOWARD_ZERO:
        increment = False
    elif mode is RoundingMode.TOWARD_POSITIVE:
        increment = inexact and sign == 0
    else:
        increment = inexact and sign == 1

    return kept + (1 if increment else 0), inexact


def _max_normal(sign: int, fmt: FpFormat) -> FpValue:
    return fp_encode(
        FpClass.NORMAL, sign, fmt.emax, WideUint.ones(fmt.sig_bits), fmt
    )


def _overflow_result(sign: int, fmt: FpFormat, mode: RoundingMode) -> FpValue:
    to_infinity = (
        mode is RoundingMode.NEAREST_EVEN
        or (mode is RoundingMode.TOWARD_POSITIVE and sign == 0)
        or (mode is RoundingMode.TOWARD_NEGATIVE and sign == 1)
    )
    if to_infinity:
        return fp_encode(FpClass.INFINITY, sign, None, None, fmt)
    return _max_normal(sign, fmt)


def _round_product(
    sign: int,
    exp_sum: int,
    product: WideUint,
    fmt: FpFormat,
    mode: RoundingMode,
) -> Tuple[FpValue, FrozenSet[FpFlag]]:
    """Normalise, arrondit et encode un produit exact de significandes."""
    f = fmt.frac_bits
    scale = exp_sum - 2 * f  # valeur exacte = product * 2^scale

    # Exposant du bit de tête ; vaut exp_sum + 1 quand le bit 2p-1 est levé
    lead = scale + product.value.bit_length() - 1
    tiny = lead < fmt.emin
    quantum = max(lead, fmt.emin) - f

    kept, inexact = _round_shifted(product.value, quantum - scale, sign, mode)
    if kept >> fmt.sig_bits:
        # Retenue d'arrondi : 1.11..1 -> 10.00..0
        kept >>= 1
        quantum += 1

    flags = set()
    if inexact:
        flags.add(FpFlag.INEXACT)
        if tiny:
            flags.add(FpFlag.UNDERFLOW)

    if kept == 0:
        return fp_encode(FpClass.ZERO, sign, None, None, fmt), frozenset(flags)

    if kept >> f:
        exponent = quantum + f
        if exponent > fmt.emax:
            flags.update((FpFlag.OVERFLOW, FpFlag.INEXACT))
            return _overflow_result(sign, fmt, mode), frozenset(flags)
        value = fp_encode(FpClass.NORMAL, sign, exponent, WideUint(kept, fmt.sig_bits), fmt)
        return value, frozenset(flags)

    value = fp_encode(FpClass.SUBNORMAL, sign, fmt.emin, WideUint(kept, fmt.sig_bits), fmt)
    return value, frozenset(flags)


def default_nan(fmt: FpFormat) -> FpValue:
    """NaN silencieux par défaut : signe nul, bit de silence seul."""
    return fp_encode(FpClass.NAN, 0, None, WideUint(1 << (fmt.frac_bits - 1), fmt.sig_bits), fmt)


def is_signaling(v: FpValue) -> bool:
    quiet_bit = 1 << (v.format.frac_bits - 1)
    return fp_decode(v).cls is FpClass.NAN and not v.fraction & quiet_bit


def _quieted(v: FpValue) -> FpValue:
    quiet_bit = 1 << (v.format.frac_bits - 1)
    return FpValue.from_int(v.format, v.bits.value | quiet_bit)


def fp_multiply(
    a: FpValue,
    b: FpValue,
    mode: RoundingMode = RoundingMode.NEAREST_EVEN,
    multiplier: Optional[BaseTileMultiplier] = None,
) -> Tuple[FpValue, FrozenSet[FpFlag]]:
    """
    Multiplie deux valeurs du même format.

    Args:
        a: Premier opérande (sa charge NaN l'emporte)
        b: Second opérande
        mode: Mode d'arrondi
        multiplier: Étage de tuiles (exact par défaut)

    Returns:
        (résultat, drapeaux levés)

    Raises:
        FpContractError: Si les formats diffèrent
    """
    if a.format != b.format:
        raise FpContractError(
            f"Formats incompatibles: {a.format.name} x {b.format.name}"
        )
    fmt = a.format
    da, db = fp_decode(a), fp_decode(b)
    sign = da.sign ^ db.sign

    if da.cls is FpClass.NAN or db.cls is FpClass.NAN:
        flags = {FpFlag.INVALID} if is_signaling(a) or is_signaling(b) else set()
        source = a if da.cls is FpClass.NAN else b
        return _quieted(source), frozenset(flags)

    classes = {da.cls, db.cls}
    if classes == {FpClass.INFINITY, FpClass.ZERO}:
        return default_nan(fmt), frozenset({FpFlag.INVALID})
    if FpClass.INFINITY in classes:
        return fp_encode(FpClass.INFINITY, sign, None, None, fmt), frozenset()
    if FpClass.ZERO in classes:
        return fp_encode(FpClass.ZERO, sign, None, None, fmt), frozenset()

    product = sig_multiply(da.significand, db.significand, fmt, multiplier)
    return _round_product(sign, da.exponent + db.exponent, product, fmt, mode)


def int_multiply(
    a: WideUint,
    b: WideUint,
    tiles: TileSet = CIVP,
    multiplier: Optional[BaseTileMultiplier] = None,
) -> WideUint:
    """
    Multiplication entière non signée sur les mêmes tuiles.

    Returns:
        Produit de largeur a.width + b.width
    """
    plan = PlanFactory.for_widths(a.width, b.width, tiles)
    full = execute_plan(plan, a, b, multiplier)
    width = a.width + b.width
    if full.value >> width:
        raise PlanInvariantError(f"Produit entier au-delà de {width} bits")
    return wu_slice(full, 0, width)
