import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavrcs.distributions import lognormal_from_db_stats, sample
from uavrcs.errors import DomainError, ValidationError
from uavrcs.signature import (
    FrequencySweep,
    Polarization,
    RcsSignature,
    SectorSpec,
    db_stats,
    from_dbsm,
    full_azimuth_grid,
    sector_slice,
    to_dbsm,
)


def sig_of(values, az=None):
    values = np.asarray(values, float)
    az = np.arange(values.size, dtype=float) if az is None else az
    return RcsSignature(az, values)


class TestDbsm:
    def test_trivial_values(self):
        assert to_dbsm(1.0) == 0.0
        assert to_dbsm(0.01) == pytest.approx(-20.0, abs=1e-12)
        assert from_dbsm(0.0) == 1.0
        assert from_dbsm(-20.0) == pytest.approx(0.01, rel=1e-12)

    def test_derived_values(self):
        # hand evaluation of 10 log10(x)
        assert to_dbsm(0.07296) == pytest.approx(-11.369, abs=5e-4)
        x = from_dbsm(-11.67)
        assert x == pytest.approx(math.pow(10.0, -1.167), rel=1e-14)
        # the quoted 0.06807 is this value truncated (not rounded) to 5 decimals
        assert math.floor(x * 1e5) / 1e5 == pytest.approx(0.06807, abs=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
    def test_non_positive_rejected(self, bad):
        with pytest.raises(DomainError):
            to_dbsm(bad)

    def test_from_dbsm_rejects_non_finite(self):
        with pytest.raises(DomainError):
            from_dbsm(float("inf"))

    @given(st.floats(min_value=-100, max_value=50))
    def test_round_trip(self, db):
        assert to_dbsm(from_dbsm(db)) == pytest.approx(db, rel=1e-12, abs=1e-12)
        x = from_dbsm(db)
        assert from_dbsm(to_dbsm(x)) == pytest.approx(x, rel=1e-12)


class TestDbStats:
    def test_constant(self):
        assert db_stats(sig_of(np.ones(181))) == (0.0, 0.0)

    def test_two_samples(self):
        m, s = db_stats(sig_of([0.01, 1.0]))
        assert m == pytest.approx(-10.0) and s == pytest.approx(10.0)

    def test_lognormal_draws_match_published_stats(self):
        mu, s = lognormal_from_db_stats(-11.67, 1.81)
        x = sample("Lognormal", (mu, s), 100_000, seed=3)
        m, sd = db_stats(sig_of(x))
        assert m == pytest.approx(-11.67, abs=0.05)
        assert sd == pytest.approx(1.81, abs=0.05)

    @settings(max_examples=50)
    @given(st.floats(min_value=1e-6, max_value=1e6), st.integers(min_value=0, max_value=2**31))
    def test_scaling_shifts_mean_only(self, c, seed):
        x = sample("Lognormal", (-2.0, 0.5), 50, seed=seed)
        m0, s0 = db_stats(sig_of(x))
        m1, s1 = db_stats(sig_of(c * x))
        assert m1 - m0 == pytest.approx(10 * math.log10(c), abs=1e-9)
        assert s1 == pytest.approx(s0, abs=1e-9)


class TestSector:
    def test_120_degree_sector_has_61_samples(self):
        az = full_azimuth_grid()
        assert az.size == 181
        out = sector_slice(sig_of(np.ones(181), az), SectorSpec(0.0, 120.0))
        assert len(out) == 61
        assert set(np.round(out.azimuths % 360)) == set(range(0, 61, 2)) | set(range(300, 360, 2))

    def test_full_width_is_identity(self):
        s = sig_of(np.arange(1, 11, dtype=float))
        assert sector_slice(s, SectorSpec(123.0, 360.0)) is s

    def test_wrap_around(self):
        az = np.arange(0.0, 360.0, 10.0)
        out = sector_slice(sig_of(np.ones(az.size), az), SectorSpec(350.0, 40.0))
        # input order is preserved
        assert list(out.azimuths) == [0.0, 10.0, 330.0, 340.0, 350.0]
        assert set(out.azimuths) == {330, 340, 350, 0, 10}

    def test_empty_sector_raises(self):
        az = np.arange(0.0, 360.0, 10.0)
        with pytest.raises(ValidationError):
            sector_slice(sig_of(np.ones(az.size), az), SectorSpec(5.0, 2.0))

    def test_center_normalized(self):
        assert SectorSpec(-10.0, 20.0).center == 350.0
        assert SectorSpec.parse("0:120") == SectorSpec(0.0, 120.0)

    @pytest.mark.parametrize("w", [0.0, -5.0, 361.0])
    def test_bad_width(self, w):
        with pytest.raises(ValidationError):
            SectorSpec(0.0, w)

    @given(st.floats(min_value=-720, max_value=720), st.floats(min_value=5, max_value=360))
    def test_idempotent(self, c, w):
        az = full_azimuth_grid()
        s = sig_of(np.arange(1, 182, dtype=float), az)
        sec = SectorSpec(c, w)
        once = sector_slice(s, sec)
        twice = sector_slice(once, sec)
        np.testing.assert_array_equal(once.azimuths, twice.azimuths)
        np.testing.assert_array_equal(once.rcs_linear, twice.rcs_linear)


class TestContainers:
    def test_signature_rejects_non_positive(self):
        with pytest.raises(ValidationError):
            RcsSignature([0.0, 1.0], [1.0, 0.0])

    def test_signature_is_read_only(self):
        s = sig_of([1.0, 2.0])
        with pytest.raises(ValueError):
            s.rcs_linear[0] = 5.0

    def test_sweep_validation(self):
        f = np.linspace(1e9, 2e9, 5)
        FrequencySweep(f, [0.0, 2.0], "hh", np.zeros((5, 2)))
        with pytest.raises(ValidationError):
            FrequencySweep(f, [0.0, 2.0], "VV", np.zeros((5, 3)))
        with pytest.raises(ValidationError):
            FrequencySweep([1.0, 2.0, 4.0], [0.0], "VV", np.zeros((3, 1)))
        with pytest.raises(ValidationError):
            FrequencySweep(f, [2.0, 0.0], "VV", np.zeros((5, 2)))

    def test_polarization_parse(self):
        assert Polarization.parse("hh") is Polarization.HH
        with pytest.raises(ValidationError):
            Polarization.parse("HV")
