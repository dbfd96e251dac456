"""Shared fixtures.

The identity-map problem on the 3-sphere (m = 3, omega = 3) is the workhorse:
its first connecting profile is known in closed form, h(x) = 2 atan(e^x) - pi/2,
so everything the solver produces can be checked against exact values.  The
four-level sweep is expensive enough to share across the whole session.
"""

import numpy as np
import pytest

from spherekink.core import HALF_PI, ProblemParams, Profile, symmetric_grid
from spherekink.report import SweepConfig, run_sweep


@pytest.fixture(scope="session")
def sweep33():
    """Levels 1..4 of the (m=3, omega=3) problem on the standard grid."""
    return run_sweep(SweepConfig(m=3, omega=3.0, max_zeros=4))


@pytest.fixture(scope="session")
def records33(sweep33):
    return {rec.sequence_key: rec for rec in sweep33.records}


@pytest.fixture(scope="session")
def ground33(records33):
    """The solved one-zero profile (the exact-solution level)."""
    return records33[("odd", 1)].profile


@pytest.fixture()
def exact_profile():
    """Closed-form one-zero profile for (3, 3) on the standard grid."""
    g = symmetric_grid(20.0, 4001)
    h = 2.0 * np.arctan(np.exp(g)) - HALF_PI
    dh = 1.0 / np.cosh(g)
    return Profile(g, h, dh, ProblemParams(3, 3.0), symmetry_class="odd",
                   residual_norm=0.0, zero_count=1, provenance="exact")
