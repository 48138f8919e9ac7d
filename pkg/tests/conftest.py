import numpy as np
import pytest

from nomapower import ChannelRealization, SystemParams


@pytest.fixture
def desk_params():
    """The default desk-scale scenario: 3 cells x 3 users."""
    return SystemParams()


def make_unit_params(num_cells=1, users_per_cell=2, gamma_db=0.0, beta=0.0,
                     pmax_dbm=40.0, **kw):
    """Parameters whose noise power is exactly 1 W (30 dBm/Hz PSD over a
    1 Hz band), convenient for hand-computed fixtures."""
    kw.setdefault("bandwidth_hz", 1.0)
    kw.setdefault("noise_psd_dbm_hz", 30.0)
    return SystemParams(
        num_cells=num_cells,
        users_per_cell=users_per_cell,
        sinr_target_db=gamma_db,
        sic_coefficient=beta,
        max_power_dbm=pmax_dbm,
        **kw,
    )


def make_realization(own_gains, cross_gain=None):
    """Synthetic realization from explicit own-cell gains.

    own_gains: list per cell of per-user own gains. Cross gains default to
    `cross_gain` (or a small constant) on every off-cell link.
    """
    n_cells = len(own_gains)
    fill = 1e-3 if cross_gain is None else cross_gain
    blocks = []
    for m, own in enumerate(own_gains):
        g = np.full((len(own), n_cells), fill, dtype=float)
        g[:, m] = own
        blocks.append(g)
    return ChannelRealization.from_gains(blocks)
