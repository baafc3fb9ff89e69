"""
Oracles indépendants.

Rien ici ne passe par les tuiles, les plans ou WideUint : multiplication
longue par chiffres de 8 bits et multiplication flottante de type softfloat
sur entiers bruts. Ils servent de référence aux tests et au self-test.
"""

from typing import FrozenSet, List, Tuple

from app.core.fpmul import FpFlag, FpFormat, RoundingMode

DIGIT_BITS = 8
DIGIT_MASK = (1 << DIGIT_BITS) - 1


def _to_digits(n: int) -> List[int]:
    digits = []
    while n:
        digits.append(n & DIGIT_MASK)
        n >>= DIGIT_BITS
    return digits or [0]


def long_multiply(a: int, b: int) -> int:
    """Multiplication scolaire en base 256 avec propagation de retenue."""
    da, db = _to_digits(a), _to_digits(b)
    out = [0] * (len(da) + len(db))
    for i, x in enumerate(da):
        carry = 0
        for j, y in enumerate(db):
            t = out[i + j] + x * y + carry
            out[i + j] = t & DIGIT_MASK
            carry = t >> DIGIT_BITS
        k = i + len(db)
        while carry:
            t = out[k] + carry
            out[k] = t & DIGIT_MASK
            carry = t >> DIGIT_BITS
            k += 1
    result = 0
    for digit in reversed(out):
        result = (result << DIGIT_BITS) | digit
    return result


def _rshift_to_odd(a: int, shift: int) -> int:
    """a / 2**shift, résultats inexacts arrondis à l'impair (bit collant)."""
    if shift <= 0:
        return a << -shift
    return (a >> shift) | bool(a & ((1 << shift) - 1))


def _unpack(fmt: FpFormat, raw: int) -> Tuple[int, int, int]:
    sign = raw >> (fmt.total_bits - 1)
    exp = (raw >> fmt.frac_bits) & fmt.exp_mask
    frac = raw & ((1 << fmt.frac_bits) - 1)
    return sign, exp, frac


def _normalize(fmt: FpFormat, exp: int, frac: int) -> Tuple[int, int]:
    """(significande avec bit de tête à frac_bits, exposant non biaisé)."""
    if exp == 0:
        shift = fmt.sig_bits - frac.bit_length()
        return frac << shift, fmt.emin - shift
    return frac | (1 << fmt.frac_bits), exp - fmt.bias


def reference_multiply(
    fmt: FpFormat,
    a: int,
    b: int,
    mode: RoundingMode = RoundingMode.NEAREST_EVEN,
) -> Tuple[int, FrozenSet[FpFlag]]:
    """
    Produit IEEE-754 de deux motifs bruts.

    Mêmes conventions que le modèle : NaN du premier opérande rendu
    silencieux, inf x 0 -> NaN par défaut, détection de petitesse avant
    arrondi.

    Returns:
        (motif du résultat, drapeaux)
    """
    f, p = fmt.frac_bits, fmt.sig_bits
    sign_shift = fmt.total_bits - 1
    quiet = 1 << (f - 1)
    inf_field = fmt.exp_mask << f

    sa, ea, fa = _unpack(fmt, a)
    sb, eb, fb = _unpack(fmt, b)
    sz = sa ^ sb

    a_nan = ea == fmt.exp_mask and fa != 0
    b_nan = eb == fmt.exp_mask and fb != 0
    if a_nan or b_nan:
        signaling = (a_nan and not fa & quiet) or (b_nan and not fb & quiet)
        source = a if a_nan else b
        return source | quiet, frozenset({FpFlag.INVALID} if signaling else ())

    a_inf, b_inf = ea == fmt.exp_mask, eb == fmt.exp_mask
    a_zero, b_zero = ea == 0 and fa == 0, eb == 0 and fb == 0
    if (a_inf and b_zero) or (a_zero and b_inf):
        return inf_field | quiet, frozenset({FpFlag.INVALID})
    if a_inf or b_inf:
        return (sz << sign_shift) | inf_field, frozenset()
    if a_zero or b_zero:
        return sz << sign_shift, frozenset()

    sig_a, exp_a = _normalize(fmt, ea, fa)
    sig_b, exp_b = _normalize(fmt, eb, fb)
    prod = sig_a * sig_b
    exp_z = exp_a + exp_b
    if prod >> (2 * p - 1):
        exp_z += 1
        drop = p
    else:
        drop = f

    tiny = exp_z < fmt.emin
    if tiny:
        drop += fmt.emin - exp_z
        exp_z = fmt.emin

    jammed = _rshift_to_odd(prod, drop - 2)
    low, base = jammed & 3, jammed >> 2
    inexact = low != 0

    if mode is RoundingMode.NEAREST_EVEN:
        up = low > 2 or (low == 2 and base & 1)
    elif mode is RoundingMode.TOWARD_ZERO:
        up = False
    elif mode is RoundingMode.TOWARD_POSITIVE:
        up = inexact and sz == 0
    else:
        up = inexact and sz == 1
    if up:
        base += 1
    if base >> p:
        base >>= 1
        exp_z += 1

    flags = set()
    if inexact:
        flags.add(FpFlag.INEXACT)
        if tiny:
            flags.add(FpFlag.UNDERFLOW)

    if exp_z > fmt.emax:
        flags.update((FpFlag.OVERFLOW, FpFlag.INEXACT))
        to_inf = (
            mode is RoundingMode.NEAREST_EVEN
            or (mode is RoundingMode.TOWARD_POSITIVE and sz == 0)
            or (mode is RoundingMode.TOWARD_NEGATIVE and sz == 1)
        )
        if to_inf:
            return (sz << sign_shift) | inf_field, frozenset(flags)
        max_finite = ((fmt.exp_mask - 1) << f) | ((1 << f) - 1)
        return (sz << sign_shift) | max_finite, frozenset(flags)

    # L'addition fait passer un sous-normal arrondi à 2^f dans le plus petit normal
    packed = (sz << sign_shift) + ((exp_z + fmt.bias - 1) << f) + base
    return packed, frozenset(flags)
