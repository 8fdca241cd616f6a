from __future__ import annotations

from fractions import Fraction

import pytest

from lindborel.freq_diophantine import ScaleSequence, build_scale_sequence, golden_frequency
from lindborel.io import load_system
from lindborel.lindstedt_recursion import solve_up_to

# coarse thresholds (not a verified sequence): low-order momenta land on
# several scales, so self-energy clusters appear from order eps^2
ARTIFICIAL_GAMMAS = [Fraction(8, 10), Fraction(5, 10), Fraction(2, 10), Fraction(1, 10), Fraction(1, 20),
                     Fraction(1, 40), Fraction(1, 80), Fraction(1, 160), Fraction(1, 320)]


@pytest.fixture(scope="session")
def freq():
    return golden_frequency()


@pytest.fixture(scope="session")
def golden():
    return load_system()


@pytest.fixture(scope="session")
def seq12(freq):
    return build_scale_sequence(freq, 12)


@pytest.fixture
def artificial(freq):
    # fresh object per test: the scale cache lives on the sequence
    return ScaleSequence(list(ARTIFICIAL_GAMMAS), freq.C0)


@pytest.fixture(scope="session")
def recursion6(golden):
    return solve_up_to(golden, 6)
