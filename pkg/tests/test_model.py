import numpy as np
import pytest
from hypothesis import given, strategies as st

from nomapower import GlobalIndexMap, PowerAllocation, SystemParams


class TestGlobalIndexMap:
    def test_first_user_of_first_cell_is_zero(self):
        assert GlobalIndexMap((3, 3, 3)).flat(0, 0) == 0

    def test_offset_arithmetic(self):
        # i = sum of earlier cells' sizes + user index
        m = GlobalIndexMap((3, 2, 4))
        assert m.flat(1, 0) == 3
        assert m.flat(2, 2) == 7
        assert m.flat(2, 3) == m.total_users - 1

    def test_out_of_range_rejected(self):
        m = GlobalIndexMap((2, 2))
        with pytest.raises(IndexError):
            m.flat(2, 0)
        with pytest.raises(IndexError):
            m.flat(0, 2)
        with pytest.raises(IndexError):
            m.unflat(4)

    @given(st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=5))
    def test_flat_unflat_bijection(self, sizes):
        m = GlobalIndexMap(tuple(sizes))
        seen = set()
        for cell, n_users in enumerate(sizes):
            for user in range(n_users):
                i = m.flat(cell, user)
                assert i == sum(sizes[:cell]) + user
                assert m.unflat(i) == (cell, user)
                seen.add(i)
        assert seen == set(range(m.total_users))

    def test_cell_slice(self):
        m = GlobalIndexMap((2, 3))
        assert m.cell_slice(1) == slice(2, 5)


class TestSystemParams:
    def test_defaults_resolve(self):
        p = SystemParams()
        assert p.users_per_cell == (3, 3, 3)
        assert p.total_users == 9
        assert p.noise_power_watts == pytest.approx(3.981e-14, abs=1e-17)

    def test_scalar_users_expand(self):
        assert SystemParams(num_cells=2, users_per_cell=4).users_per_cell == (4, 4)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(num_cells=0),
            dict(users_per_cell=0),
            dict(sic_coefficient=-0.1),
            dict(sic_coefficient=1.5),
            dict(cell_radius_m=0.5),  # radius below min distance
            dict(min_user_bs_distance_m=0.0),
            dict(users_per_cell=(3, 3)),  # length mismatch with 3 cells
        ],
    )
    def test_invalid_params_rejected(self, kw):
        with pytest.raises(ValueError):
            SystemParams(**kw)

    def test_per_user_overrides(self):
        p = SystemParams(
            sinr_target_db_overrides={(1, 2): 3.0},
            max_power_dbm_overrides={(0, 0): 20.0},
        )
        targets = p.sinr_targets_linear()
        assert targets[1][2] == pytest.approx(10 ** 0.3)
        assert targets[0][0] == pytest.approx(10 ** -0.25)
        caps = p.max_powers_watts()
        assert caps[0][0] == pytest.approx(0.1)
        assert caps[2][1] == pytest.approx(1.0)

    def test_override_key_must_address_a_user(self):
        with pytest.raises(ValueError):
            SystemParams(sinr_target_db_overrides={(5, 0): 0.0})


class TestPowerAllocation:
    def test_addressing(self):
        m = GlobalIndexMap((2, 1))
        alloc = PowerAllocation(np.array([1.0, 2.0, 3.0]), m)
        assert alloc.get(0, 1) == 2.0
        assert alloc.cell(1).tolist() == [3.0]
        assert alloc.sum_watts == 6.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            PowerAllocation(np.array([-1.0]), GlobalIndexMap((1,)))

    def test_length_checked(self):
        with pytest.raises(ValueError):
            PowerAllocation(np.zeros(2), GlobalIndexMap((3,)))
