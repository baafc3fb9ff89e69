"""
Tests de la multiplication flottante à précision variable.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.fpmul import (
    DOUBLE,
    QUAD,
    SINGLE,
    FpClass,
    FpContractError,
    FpFlag,
    FpHexError,
    FpRangeError,
    FpValue,
    RoundingMode,
    default_nan,
    flags_label,
    fp_decode,
    fp_encode,
    fp_from_hex,
    fp_multiply,
    fp_to_hex,
    get_format,
    int_multiply,
    plan_for_format,
    sig_multiply,
)
from app.core.reference import long_multiply, reference_multiply
from app.core.tiles import BASELINE_18, EXISTING_FPGA, FaultyTileMultiplier, TileShape
from app.core.wideint import WideUint

NE = RoundingMode.NEAREST_EVEN
RZ = RoundingMode.TOWARD_ZERO
RP = RoundingMode.TOWARD_POSITIVE
RN = RoundingMode.TOWARD_NEGATIVE

INEXACT = frozenset({FpFlag.INEXACT})
OVERFLOW = frozenset({FpFlag.OVERFLOW, FpFlag.INEXACT})
UNDERFLOW = frozenset({FpFlag.UNDERFLOW, FpFlag.INEXACT})
INVALID = frozenset({FpFlag.INVALID})
NONE = frozenset()


def _mul(fmt, a, b, mode=NE):
    value, flags = fp_multiply(fp_from_hex(a, fmt), fp_from_hex(b, fmt), mode)
    return fp_to_hex(value), flags


def test_format_table():
    """Test des paramètres des formats d'échange."""
    assert (SINGLE.total_bits, SINGLE.bias, SINGLE.sig_bits) == (32, 127, 24)
    assert (DOUBLE.total_bits, DOUBLE.exp_bits, DOUBLE.frac_bits, DOUBLE.bias) == (64, 11, 52, 1023)
    assert (QUAD.total_bits, QUAD.exp_bits, QUAD.frac_bits, QUAD.bias) == (128, 15, 112, 16383)
    assert QUAD.hex_digits == 32
    assert get_format("Quad") is QUAD
    with pytest.raises(FpContractError):
        get_format("half")


def test_plan_for_format():
    """Test du plan de significande de chaque format."""
    assert plan_for_format(SINGLE).name == "p24"
    assert plan_for_format(DOUBLE).name == "p57"
    assert plan_for_format(QUAD).name == "p114"


@pytest.mark.parametrize("fmt,a,b,expected", [
    (SINGLE, "3F800000", "3F800000", "3F800000"),
    (DOUBLE, "3FF8000000000000", "4004000000000000", "400E000000000000"),
    (QUAD, "3FFF" + "0" * 28, "4000" + "0" * 28, "4000" + "0" * 28),
    (SINGLE, "C0000000", "40400000", "C0C00000"),
])
def test_exact_products(fmt, a, b, expected):
    """Test de produits exacts (1x1, 1.5x2.5, 1x2, -2x3)."""
    assert _mul(fmt, a, b) == (expected, NONE)


def test_quad_infinity_times_zero():
    """Test de l'infini par zéro : NaN par défaut et drapeau invalid."""
    result, flags = _mul(QUAD, "7FFF" + "0" * 28, "0" * 32)
    assert result == "7FFF8" + "0" * 27
    assert flags == INVALID


@pytest.mark.parametrize("mode,expected", [
    (NE, "3F800002"),
    (RZ, "3F800002"),
    (RP, "3F800003"),
    (RN, "3F800002"),
])
def test_inexact_rounding_modes(mode, expected):
    """Test de (1 + ulp)^2 dans les quatre modes."""
    assert _mul(SINGLE, "3F800001", "3F800001", mode) == (expected, INEXACT)


def test_halfway_ties_to_even():
    """Test des cas à mi-chemin en simple précision."""
    assert _mul(SINGLE, "3F800001", "3FC00000") == ("3FC00002", INEXACT)
    assert _mul(SINGLE, "3F800003", "3FC00000") == ("3FC00004", INEXACT)
    assert _mul(SINGLE, "3F800001", "3FC00000", RZ) == ("3FC00001", INEXACT)


# Décalage de fraction attendu pour (1+ulp) x 1.5 et (1+3ulp) x 1.5,
# positif puis négatif : les produits exacts valent +1.5 et +4.5 ulp.
HALFWAY_OFFSETS = {
    NE: (2, 4, 2, 4),
    RZ: (1, 4, 1, 4),
    RP: (2, 5, 1, 4),
    RN: (1, 4, 2, 5),
}


@pytest.mark.parametrize("fmt", [SINGLE, DOUBLE, QUAD], ids=lambda f: f.name)
@pytest.mark.parametrize("mode", list(RoundingMode), ids=lambda m: m.value)
def test_halfway_all_formats_and_modes(fmt, mode):
    """Test des produits exactement à mi-chemin, trois formats, quatre modes."""
    f = fmt.frac_bits
    one = fmt.bias << f
    sign = 1 << (fmt.total_bits - 1)
    three_halves = one | (1 << (f - 1))
    cases = [(one | 1, 0), (one | 3, 0), (one | 1, sign), (one | 3, sign)]
    for (a, a_sign), offset in zip(cases, HALFWAY_OFFSETS[mode]):
        value, flags = fp_multiply(
            FpValue.from_int(fmt, a | a_sign), FpValue.from_int(fmt, three_halves), mode
        )
        assert value.bits.value == a_sign | (three_halves + offset), (hex(a), mode)
        assert flags == INEXACT


@pytest.mark.parametrize("a,mode,expected", [
    ("7F7FFFFF", NE, "7F800000"),
    ("7F7FFFFF", RZ, "7F7FFFFF"),
    ("7F7FFFFF", RP, "7F800000"),
    ("7F7FFFFF", RN, "7F7FFFFF"),
    ("FF7FFFFF", NE, "FF800000"),
    ("FF7FFFFF", RZ, "FF7FFFFF"),
    ("FF7FFFFF", RP, "FF7FFFFF"),
    ("FF7FFFFF", RN, "FF800000"),
])
def test_overflow_by_mode(a, mode, expected):
    """Test du résultat de dépassement selon le mode et le signe."""
    assert _mul(SINGLE, a, "40000000", mode) == (expected, OVERFLOW)


def test_double_overflow():
    """Test du dépassement en double précision."""
    assert _mul(DOUBLE, "7FEFFFFFFFFFFFFF", "4000000000000000") == ("7FF0000000000000", OVERFLOW)


def test_underflow_to_zero_and_up():
    """Test : le plus petit sous-normal divisé par deux."""
    assert _mul(SINGLE, "00000001", "3F000000") == ("00000000", UNDERFLOW)
    assert _mul(SINGLE, "00000001", "3F000000", RP) == ("00000001", UNDERFLOW)
    assert _mul(SINGLE, "80000001", "3F000000", RN) == ("80000001", UNDERFLOW)


def test_tiny_exact_result_raises_no_underflow():
    """Test : résultat sous-normal exact, aucun drapeau."""
    assert _mul(SINGLE, "00000002", "3F000000") == ("00000001", NONE)


def test_subnormal_rounds_up_to_min_normal():
    """Test : un sous-normal arrondi qui atteint le plus petit normal."""
    # (2^-126 - 2^-149) * (1 + 2^-23), tiny avant arrondi
    assert _mul(SINGLE, "007FFFFF", "3F800001") == ("00800000", UNDERFLOW)


def test_subnormal_operand_normal_result():
    """Test : opérande sous-normal, résultat normal exact."""
    assert _mul(SINGLE, "00400000", "4B000000") == ("0B800000", NONE)


@pytest.mark.parametrize("a,b,expected,flags", [
    ("7F800001", "3F800000", "7FC00001", INVALID),
    ("3F800000", "7F800002", "7FC00002", INVALID),
    ("7FC00000", "3F800000", "7FC00000", NONE),
    ("7FC00001", "FFC00002", "7FC00001", NONE),
    ("3F800000", "FFC00002", "FFC00002", NONE),
    ("7FC00001", "7F800001", "7FC00001", INVALID),
    ("7F800000", "00000000", "7FC00000", INVALID),
    ("80000000", "FF800000", "7FC00000", INVALID),
])
def test_nan_rules(a, b, expected, flags):
    """Test des NaN : premier NaN rendu silencieux, sNaN et inf x 0 invalides."""
    assert _mul(SINGLE, a, b) == (expected, flags)


@pytest.mark.parametrize("a,b,expected", [
    ("FF800000", "40000000", "FF800000"),
    ("7F800000", "FF800000", "FF800000"),
    ("80000000", "40400000", "80000000"),
    ("80000000", "80000000", "00000000"),
])
def test_infinity_and_zero_signs(a, b, expected):
    """Test du signe des infinis et des zéros."""
    assert _mul(SINGLE, a, b) == (expected, NONE)


def test_default_nan_pattern():
    """Test du NaN par défaut de chaque format."""
    assert default_nan(SINGLE).to_hex() == "7FC00000"
    assert default_nan(DOUBLE).to_hex() == "7FF8000000000000"


def test_flags_label_canonical_order():
    """Test de l'ordre canonique d'affichage des drapeaux."""
    assert flags_label([FpFlag.INEXACT, FpFlag.OVERFLOW]) == "overflow inexact"
    assert flags_label([]) == "none"
    assert flags_label([FpFlag.INEXACT, FpFlag.UNDERFLOW, FpFlag.INVALID]) == (
        "invalid underflow inexact"
    )


def test_decode_classes():
    """Test du décodage des classes."""
    assert fp_decode(fp_from_hex("00000000", SINGLE)).cls is FpClass.ZERO
    assert fp_decode(fp_from_hex("00000001", SINGLE)).cls is FpClass.SUBNORMAL
    assert fp_decode(fp_from_hex("7F800000", SINGLE)).cls is FpClass.INFINITY
    assert fp_decode(fp_from_hex("7F800001", SINGLE)).cls is FpClass.NAN

    one = fp_decode(fp_from_hex("3FF0000000000000", DOUBLE))
    assert one.cls is FpClass.NORMAL
    assert one.exponent == 0
    assert one.significand == WideUint(1 << 52, 53)

    sub = fp_decode(fp_from_hex("00000001", SINGLE))
    assert sub.exponent == -126
    assert sub.significand.value == 1


def test_encode_rejects_out_of_range():
    """Test des champs hors plage à l'encodage."""
    with pytest.raises(FpRangeError):
        fp_encode(FpClass.NORMAL, 0, 128, WideUint(1 << 23, 24), SINGLE)
    with pytest.raises(FpRangeError):
        fp_encode(FpClass.NORMAL, 0, 0, WideUint(1, 24), SINGLE)
    with pytest.raises(FpRangeError):
        fp_encode(FpClass.NAN, 0, None, WideUint(0, 24), SINGLE)


@pytest.mark.parametrize("text", ["3F80000", "3F8000000", "3F80000G", "3F80_000", "3F80_0000"])
def test_from_hex_wrong_length_or_digit(text):
    """Test de rejet d'un motif de mauvaise longueur ou mal formé."""
    with pytest.raises(FpHexError):
        fp_from_hex(text, SINGLE)


def test_mixed_formats_rejected():
    """Test de rejet d'opérandes de formats différents."""
    with pytest.raises(FpContractError):
        fp_multiply(fp_from_hex("3F800000", SINGLE), fp_from_hex("3FF0000000000000", DOUBLE))


def test_sig_multiply_width_contract():
    """Test du contrat de largeur des significandes."""
    with pytest.raises(FpContractError):
        sig_multiply(WideUint(0, 52), WideUint(0, 53), DOUBLE)
    full = sig_multiply(WideUint.ones(113), WideUint.ones(113), QUAD)
    assert full.width == 226
    assert full.value == (2**113 - 1) ** 2


def test_faulty_tiles_change_result():
    """Test : un étage fautif produit un résultat différent de la référence."""
    a = fp_from_hex("3FF0000000000000", DOUBLE)
    faulty = FaultyTileMultiplier(flip_bit=17, shape=TileShape(24, 24))
    value, _ = fp_multiply(a, a, NE, faulty)
    assert value.to_hex() != "3FF0000000000000"


def test_int_multiply_through_tiles():
    """Test de la multiplication entière combinée."""
    ones = WideUint.ones(113)
    product = int_multiply(ones, ones)
    assert product.width == 226
    assert product.value == (2**113 - 1) ** 2

    a, b = WideUint(0x3FF, 10), WideUint(0x2AB, 10)
    assert int_multiply(a, b, BASELINE_18).value == 0x3FF * 0x2AB
    assert int_multiply(a, b, EXISTING_FPGA).width == 20


def _patterns(fmt):
    return st.integers(min_value=0, max_value=2**fmt.total_bits - 1)


def _check_against_reference(fmt, a, b, mode):
    value, flags = fp_multiply(FpValue.from_int(fmt, a), FpValue.from_int(fmt, b), mode)
    expected, expected_flags = reference_multiply(fmt, a, b, mode)
    assert value.bits.value == expected, (fmt.name, hex(a), hex(b), mode)
    assert flags == expected_flags, (fmt.name, hex(a), hex(b), mode)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([SINGLE, DOUBLE, QUAD]).flatmap(
    lambda fmt: st.tuples(st.just(fmt), _patterns(fmt), _patterns(fmt))
), st.sampled_from(list(RoundingMode)))
def test_matches_reference_random_patterns(case, mode):
    """Propriété : bits et drapeaux identiques à la référence indépendante."""
    fmt, a, b = case
    _check_against_reference(fmt, a, b, mode)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([SINGLE, DOUBLE, QUAD]).flatmap(
    lambda fmt: st.tuples(st.just(fmt), _patterns(fmt), _patterns(fmt))
), st.sampled_from(list(RoundingMode)))
def test_commutative_outside_nan(case, mode):
    """Propriété : a x b == b x a quand aucun opérande n'est NaN."""
    fmt, a, b = case
    x, y = FpValue.from_int(fmt, a), FpValue.from_int(fmt, b)
    if FpClass.NAN in (fp_decode(x).cls, fp_decode(y).cls):
        return
    assert fp_multiply(x, y, mode) == fp_multiply(y, x, mode)


@settings(max_examples=500)
@given(st.sampled_from([SINGLE, DOUBLE, QUAD]).flatmap(
    lambda fmt: st.tuples(st.just(fmt), _patterns(fmt))
))
def test_decode_encode_identity(case):
    """Propriété : encode(decode(v)) == v pour tout motif."""
    fmt, raw = case
    v = FpValue.from_int(fmt, raw)
    d = fp_decode(v)
    assert fp_encode(d.cls, d.sign, d.exponent, d.significand, fmt) == v


def _non_nan_patterns(fmt):
    return _patterns(fmt).filter(
        lambda raw: fp_decode(FpValue.from_int(fmt, raw)).cls != FpClass.NAN
    )


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([SINGLE, DOUBLE, QUAD]).flatmap(
    lambda fmt: st.tuples(st.just(fmt), _non_nan_patterns(fmt))
), st.sampled_from(list(RoundingMode)))
def test_multiply_by_one_is_identity(case, mode):
    """Propriété : x x 1.0 == x, sans drapeau, pour tout x non NaN."""
    fmt, raw = case
    one = FpValue.from_int(fmt, fmt.bias << fmt.frac_bits)
    x = FpValue.from_int(fmt, raw)
    assert fp_multiply(x, one, mode) == (x, NONE)
    assert fp_multiply(one, x, mode) == (x, NONE)


def _special_or_random(fmt):
    f = fmt.frac_bits
    specials = [0, 1, (1 << f) - 1, fmt.exp_mask << f, fmt.bias << f,
                ((fmt.exp_mask - 1) << f) | ((1 << f) - 1)]
    sign = 1 << (fmt.total_bits - 1)
    return st.one_of(
        st.sampled_from(specials + [p | sign for p in specials]),
        _patterns(fmt),
    )


@settings(max_examples=500, deadline=None)
@given(st.sampled_from([SINGLE, DOUBLE, QUAD]).flatmap(
    lambda fmt: st.tuples(st.just(fmt), _special_or_random(fmt), _special_or_random(fmt))
), st.sampled_from(list(RoundingMode)))
def test_sign_is_xor_of_operand_signs(case, mode):
    """Propriété : signe du résultat = XOR des signes, zéros et infinis compris."""
    fmt, a, b = case
    value, _ = fp_multiply(FpValue.from_int(fmt, a), FpValue.from_int(fmt, b), mode)
    result = fp_decode(value)
    if result.cls == FpClass.NAN:
        return
    x, y = fp_decode(FpValue.from_int(fmt, a)), fp_decode(FpValue.from_int(fmt, b))
    assert result.sign == x.sign ^ y.sign


@pytest.mark.slow
@pytest.mark.parametrize("fmt", [SINGLE, DOUBLE, QUAD], ids=lambda f: f.name)
def test_decode_encode_identity_acceptance_scale(fmt):
    """Test : encode(decode(v)) == v sur 10^6 motifs aléatoires par format."""
    rng = random.Random(f"decode-encode:{fmt.name}")
    for _ in range(1_000_000):
        v = FpValue.from_int(fmt, rng.getrandbits(fmt.total_bits))
        d = fp_decode(v)
        assert fp_encode(d.cls, d.sign, d.exponent, d.significand, fmt) == v


def _random_against_reference(fmt, count, seed):
    rng = random.Random(seed)
    modes = list(RoundingMode)
    for i in range(count):
        a, b = rng.getrandbits(fmt.total_bits), rng.getrandbits(fmt.total_bits)
        _check_against_reference(fmt, a, b, modes[i % len(modes)])


def _near_one(fmt, rng):
    """Motifs d'exposants proches du biais, où les arrondis fins dominent."""
    e = fmt.bias + rng.randint(-2, 2)
    sign = rng.getrandbits(1) << (fmt.total_bits - 1)
    return sign | (e << fmt.frac_bits) | rng.getrandbits(fmt.frac_bits)


def test_random_vectors_small_scale():
    """Test aléatoire réduit contre la référence, trois formats."""
    _random_against_reference(SINGLE, 3000, 1)
    _random_against_reference(DOUBLE, 1000, 2)
    _random_against_reference(QUAD, 300, 3)


def test_directed_extremes_all_modes():
    """Test dirigé : valeurs spéciales et extrêmes dans les quatre modes."""
    for fmt in (SINGLE, DOUBLE, QUAD):
        f = fmt.frac_bits
        inf = fmt.exp_mask << f
        base = [
            0, 1, 2, (1 << f) - 1, 1 << f, (1 << f) | 1,
            ((fmt.exp_mask - 1) << f) | ((1 << f) - 1),
            (fmt.bias << f), (fmt.bias << f) | 1, ((fmt.bias - 1) << f),
            inf, inf | 1, inf | (1 << (f - 1)),
        ]
        patterns = base + [p | (1 << (fmt.total_bits - 1)) for p in base]
        for a in patterns:
            for b in patterns:
                for mode in RoundingMode:
                    _check_against_reference(fmt, a, b, mode)


def test_near_one_products():
    """Test aléatoire autour de 1.0, riche en cas d'arrondi."""
    rng = random.Random(7)
    for fmt in (SINGLE, DOUBLE, QUAD):
        for i in range(400):
            mode = list(RoundingMode)[i % 4]
            _check_against_reference(fmt, _near_one(fmt, rng), _near_one(fmt, rng), mode)


@pytest.mark.slow
def test_random_vectors_acceptance_scale():
    """Test à l'échelle de la recette : 10^6 simple, 10^5 double, 10^4 quadruple."""
    _random_against_reference(SINGLE, 1_000_000, 101)
    _random_against_reference(DOUBLE, 100_000, 102)
    _random_against_reference(QUAD, 10_000, 103)


def test_long_multiply_reference():
    """Test de l'oracle entier par octets."""
    assert long_multiply(0, 12345) == 0
    assert long_multiply(2**113 - 1, 2**113 - 1) == (2**113 - 1) ** 2
    assert long_multiply(0xFFFF, 0x10001) == 0xFFFF * 0x10001
