from fractions import Fraction

import pytest

from padic_cr.chars import Character
from padic_cr.field import FieldDescriptor
from padic_cr.pone import InductionDatum


@pytest.fixture
def q3():
    return FieldDescriptor(3, 1, 24)


@pytest.fixture
def q4():
    return FieldDescriptor(2, 2, 24)


def harness_datum(precision: int = 24) -> InductionDatum:
    """Q_3, J = S, chi_1 = unr(1/9) (r = 2), chi_2 = unr(1/3) sigma^3: all chart functions are cubic polynomials."""
    field = FieldDescriptor(3, 1, precision)
    chi1 = Character.unramified(field.from_fraction(Fraction(1, 9)))
    chi2 = Character(field, field.from_fraction(Fraction(1, 3)), (3,))
    return InductionDatum(field, {0}, {}, chi1, chi2)


def collapse_datum(precision: int = 20) -> InductionDatum:
    """val(chi_2(p)) + |d| = -1 on Q_3."""
    field = FieldDescriptor(3, 1, precision)
    return InductionDatum(field, {0}, {}, Character.trivial(field), Character.unramified(field.from_fraction(Fraction(1, 3))))


@pytest.fixture
def datum():
    return harness_datum()
