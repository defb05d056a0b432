import math

import numpy as np
import pytest

from circlemix import (
    HAAR,
    Angle,
    AtomicMeasure,
    CantorLebesgue,
    Mixture,
    RieszProduct,
    two_atom_symmetric,
)

GOLDEN = (math.sqrt(5) - 1) / 2
FIB_20 = 6765   # F_1 = F_2 = 1, ..., F_20 = 6765


@pytest.fixture
def golden_angle():
    return Angle.golden()


@pytest.fixture
def golden_two_atom():
    return two_atom_symmetric(Angle.golden())


@pytest.fixture
def cantor3():
    return CantorLebesgue(3)


@pytest.fixture
def dirac_quarter():
    return AtomicMeasure.dirac(Angle.rational(1, 4))


@pytest.fixture
def half_dirac_half_haar():
    return Mixture(((0.5, AtomicMeasure.dirac(Angle.rational(1, 4))), (0.5, HAAR)))


@pytest.fixture
def riesz_two_factor():
    return RieszProduct((0.5, 0.25), (4, 16))


def brute_force_atomic_coefficient(atoms, n):
    """Oracle: the defining sum over atoms, no shared code with the library."""
    total = 0j
    for t, w in atoms:
        total += w * complex(math.cos(2 * math.pi * n * t), -math.sin(2 * math.pi * n * t))
    return total
