from decimal import Decimal

import pytest

from mdcauction import ValidationError, format_milli, to_milli
from mdcauction.money import scale_by_ratio_pow


def test_whole_units_scale_to_milli():
    assert to_milli(15) == 15000
    assert to_milli(0) == 0
    assert to_milli(Decimal("2.222")) == 2222
    assert to_milli("2.5") == 2500
    assert to_milli(2.5) == 2500


def test_sub_milli_resolution_rejected():
    with pytest.raises(ValidationError, match="amount"):
        to_milli(Decimal("0.0001"), "amount")
    with pytest.raises(ValidationError):
        to_milli("abc")
    with pytest.raises(ValidationError):
        to_milli(True)
    with pytest.raises(ValidationError):
        to_milli(float("nan"))


def test_format_is_fixed_three_decimals():
    assert format_milli(9000) == "9.000"
    assert format_milli(2222) == "2.222"
    assert format_milli(0) == "0.000"
    assert format_milli(-1500) == "-1.500"


def test_ratio_pow_integer_exponent_is_exact():
    # 4 * (5/9)^1 = 2.222... floors to 2222 milli
    assert scale_by_ratio_pow(4000, 5000, 9000, 1.0) == 2222
    assert scale_by_ratio_pow(4000, 9000, 9000, 7.0) == 4000
    assert scale_by_ratio_pow(4000, 0, 9000, 1.0) == 0
    # 0^0 treated as 1: gamma=0 must be the identity even at zero remaining
    assert scale_by_ratio_pow(4000, 0, 9000, 0.0) == 4000


def test_ratio_pow_fractional_exponent():
    # 4 * (1/4)^0.5 = 2 exactly
    assert scale_by_ratio_pow(4000, 1000, 4000, 0.5) == 2000
    assert scale_by_ratio_pow(4000, 0, 9000, 0.5) == 0
