"""dB/dBm conversions.

All solver arithmetic is linear (watts, power ratios); decibel quantities
appear only at configuration and reporting boundaries.
"""

from __future__ import annotations

import numpy as np


def dbm_to_watts(x):
    """Convert dBm to watts: 30 dBm -> 1 W."""
    return 10.0 ** ((np.asarray(x, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(p):
    """Convert watts to dBm. Zero power maps to -inf dBm."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(p, dtype=float)) + 30.0


def db_to_linear(x):
    """Convert a dB quantity to a linear ratio."""
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def linear_to_db(v):
    """Convert a linear ratio to dB. Zero maps to -inf."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(v, dtype=float))
