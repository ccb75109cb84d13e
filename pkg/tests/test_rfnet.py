"""Testes da álgebra de duas portas e da cascata de ruído."""

import numpy as np
import pytest

from src.errors import (
    DomainError,
    ExtrapolationError,
    GridError,
    InfiniteReferredNoiseError,
    SingularNetworkError,
    ValidationError,
)
from src.rfnet import (
    Amplifier,
    Attenuator,
    Cable,
    CableModel,
    FrequencyGrid,
    SignalChain,
    SParamElement,
    TwoPortRecord,
    abcd_to_sparams,
    attenuator_te,
    band_summary,
    cascade_noise,
    cascade_sparams,
    cascade_sparams_abcd,
    chain_from_config,
    grid_from_config,
    nf_from_te,
    resample,
    return_loss_db,
    sparams_to_abcd,
    sparams_to_t,
    t_to_sparams,
    te_from_nf,
    twoport_from_gain,
)

GRID = FrequencyGrid.linspace(4e9, 8e9, 5)


def _random_record(rng, grid, max_refl=0.5):
    n = len(grid)

    def cplx(lo, hi):
        return rng.uniform(lo, hi, n) * np.exp(1j * rng.uniform(-np.pi, np.pi, n))

    s = np.empty((n, 2, 2), dtype=complex)
    s[:, 0, 0] = cplx(0.0, max_refl)
    s[:, 1, 1] = cplx(0.0, max_refl)
    s[:, 1, 0] = cplx(0.3, 0.9)
    s[:, 0, 1] = s[:, 1, 0]
    return TwoPortRecord(grid, s)


# --- Conversões NF <-> Te ---

class TestConversions:
    def test_zero_nf_is_zero_kelvin(self):
        assert te_from_nf(0.0) == 0.0

    def test_known_values(self):
        assert te_from_nf(1.5) == pytest.approx(119.64, abs=0.01)
        assert te_from_nf(0.0742) == pytest.approx(5.0, abs=0.01)
        assert nf_from_te(290.0) == pytest.approx(3.0103, abs=1e-4)
        assert nf_from_te(119.64) == pytest.approx(1.5, abs=1e-3)

    def test_negative_input_raises(self):
        with pytest.raises(DomainError):
            te_from_nf(-0.1)
        with pytest.raises(DomainError):
            nf_from_te(-1.0)

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        te = rng.uniform(0.0, 1e4, 500)
        np.testing.assert_allclose(te_from_nf(nf_from_te(te)), te, rtol=1e-12, atol=1e-12)

    def test_tiny_nf_keeps_precision(self):
        # expm1 preserva dígitos perto de zero
        assert te_from_nf(1e-12) == pytest.approx(290.0 * 1e-12 * np.log(10) / 10, rel=1e-9)


class TestAttenuatorTe:
    def test_zero_loss(self):
        assert attenuator_te(0.0, 300.0) == 0.0

    def test_cold_attenuator(self):
        assert attenuator_te(20.0, 3.6) == pytest.approx(356.4, rel=1e-12)

    def test_room_temperature_3db(self):
        assert attenuator_te(3.0, 290.0) == pytest.approx(288.63, abs=0.01)

    def test_monotone(self):
        losses = np.linspace(0.0, 30.0, 50)
        te = attenuator_te(losses, 4.0)
        assert np.all(np.diff(te) > 0)
        temps = np.linspace(0.0, 300.0, 50)
        assert np.all(np.diff(attenuator_te(10.0, temps)) > 0)

    def test_negative_raises(self):
        with pytest.raises(DomainError):
            attenuator_te(-1.0, 4.0)


# --- Grade e registros ---

class TestFrequencyGrid:
    def test_must_increase(self):
        with pytest.raises(ValidationError):
            FrequencyGrid(np.array([1e9, 1e9]))

    def test_must_be_positive(self):
        with pytest.raises(ValidationError):
            FrequencyGrid(np.array([0.0, 1e9]))

    def test_points_are_read_only(self):
        with pytest.raises(ValueError):
            GRID.points[0] = 1.0

    def test_from_config(self):
        assert len(grid_from_config({"start_hz": 1e9, "stop_hz": 2e9, "points": 11})) == 11
        assert len(grid_from_config({"points_hz": [1e9, 3e9]})) == 2


class TestTwoPortRecord:
    def test_shape_checked(self):
        with pytest.raises(ValidationError):
            TwoPortRecord(GRID, np.zeros((3, 2, 2)))

    def test_passive_flag_enforced(self):
        s = np.zeros((len(GRID), 2, 2), dtype=complex)
        s[:, 1, 0] = 1.5
        s[:, 0, 1] = 1.5
        with pytest.raises(ValidationError):
            TwoPortRecord(GRID, s, passive=True)

    def test_return_loss(self):
        s = np.zeros((len(GRID), 2, 2), dtype=complex)
        s[:, 0, 0] = 0.1
        s[:, 1, 0] = 1.0
        rec = TwoPortRecord(GRID, s)
        np.testing.assert_allclose(return_loss_db(rec, 1), -20.0)
        assert np.all(np.isneginf(return_loss_db(rec, 2)))


# --- Cascata S ---

class TestCascadeSparams:
    def test_identity_thru(self):
        rng = np.random.default_rng(1)
        thru = twoport_from_gain(GRID, 0.0, reciprocal=True)
        rec = _random_record(rng, GRID)
        out = cascade_sparams(thru, rec)
        np.testing.assert_allclose(out.s, rec.s, rtol=1e-12, atol=1e-15)
        out = cascade_sparams(rec, thru)
        np.testing.assert_allclose(out.s, rec.s, rtol=1e-12, atol=1e-15)

    def test_two_matched_pads(self):
        pad = twoport_from_gain(GRID, -20.0, reciprocal=True)
        out = cascade_sparams(pad, pad)
        np.testing.assert_allclose(out.s21, 0.01, rtol=1e-12)
        np.testing.assert_allclose(np.abs(out.s11), 0.0, atol=1e-15)

    def test_matches_abcd_path(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = _random_record(rng, GRID)
            b = _random_record(rng, GRID)
            via_t = cascade_sparams(a, b)
            via_abcd = cascade_sparams_abcd(a, b)
            np.testing.assert_allclose(via_t.s, via_abcd.s, rtol=1e-9, atol=1e-12)

    def test_associative(self):
        rng = np.random.default_rng(3)
        a, b, c = (_random_record(rng, GRID) for _ in range(3))
        left = cascade_sparams(cascade_sparams(a, b), c)
        right = cascade_sparams(a, cascade_sparams(b, c))
        np.testing.assert_allclose(left.s, right.s, rtol=1e-10, atol=1e-12)

    def test_grid_mismatch(self):
        other = FrequencyGrid.linspace(4e9, 8e9, 6)
        with pytest.raises(GridError):
            cascade_sparams(twoport_from_gain(GRID, 0.0), twoport_from_gain(other, 0.0))

    def test_zero_s21_names_frequency(self):
        s = np.zeros((len(GRID), 2, 2), dtype=complex)
        s[:, 1, 0] = 1.0
        s[2, 1, 0] = 0.0
        blocked = TwoPortRecord(GRID, s)
        with pytest.raises(SingularNetworkError) as exc:
            cascade_sparams(blocked, twoport_from_gain(GRID, 0.0))
        assert exc.value.frequency == GRID.points[2]


class TestParameterConversions:
    def test_thru_is_identity(self):
        thru = twoport_from_gain(GRID, 0.0, reciprocal=True)
        eye = np.broadcast_to(np.eye(2), (len(GRID), 2, 2))
        np.testing.assert_allclose(sparams_to_t(thru.s), eye, atol=1e-15)
        np.testing.assert_allclose(sparams_to_abcd(thru.s, 50.0), eye, atol=1e-15)

    def test_series_impedance(self):
        # Z = 25 ohm em série com z0 = 50: S11 = 0.2, S21 = 0.8, ABCD = [[1, Z], [0, 1]]
        s = np.empty((len(GRID), 2, 2), dtype=complex)
        s[:, 0, 0] = s[:, 1, 1] = 0.2
        s[:, 0, 1] = s[:, 1, 0] = 0.8
        abcd = sparams_to_abcd(s, 50.0)
        np.testing.assert_allclose(abcd[:, 0, 0], 1.0, rtol=1e-12)
        np.testing.assert_allclose(abcd[:, 0, 1], 25.0, rtol=1e-12)
        np.testing.assert_allclose(abcd[:, 1, 0], 0.0, atol=1e-12)
        np.testing.assert_allclose(abcd[:, 1, 1], 1.0, rtol=1e-12)

    def test_round_trips(self):
        rec = _random_record(np.random.default_rng(9), GRID)
        np.testing.assert_allclose(t_to_sparams(sparams_to_t(rec.s)), rec.s, rtol=1e-12, atol=1e-15)
        back = abcd_to_sparams(sparams_to_abcd(rec.s, 50.0), 50.0)
        np.testing.assert_allclose(back, rec.s, rtol=1e-12, atol=1e-15)

    def test_abcd_zero_s21(self):
        s = np.zeros((len(GRID), 2, 2), dtype=complex)
        with pytest.raises(SingularNetworkError) as exc:
            sparams_to_abcd(s, 50.0, GRID)
        assert exc.value.frequency == GRID.points[0]


# --- Reamostragem ---

class TestResample:
    def test_same_grid_is_identity(self):
        rec = _random_record(np.random.default_rng(4), GRID)
        assert resample(rec, GRID) is rec

    def test_midpoint_magnitude(self):
        grid = FrequencyGrid(np.array([1e9, 2e9]))
        s = np.zeros((2, 2, 2), dtype=complex)
        s[:, 1, 0] = [0.1, 0.3]
        out = resample(TwoPortRecord(grid, s), FrequencyGrid(np.array([1.5e9])))
        assert abs(out.s21[0]) == pytest.approx(0.2, rel=1e-12)

    def test_one_pole_filter(self):
        f0, bw = 6e9, 0.5e9

        def response(f):
            return 1.0 / (1.0 + 1j * (f - f0) / bw)

        coarse = FrequencyGrid.linspace(4e9, 8e9, 101)
        fine = FrequencyGrid.linspace(4e9, 8e9, 1001)
        s = np.zeros((101, 2, 2), dtype=complex)
        s[:, 1, 0] = response(coarse.points)
        out = resample(TwoPortRecord(coarse, s), fine)
        expected = response(fine.points)
        assert np.max(np.abs(out.s21 - expected) / np.abs(expected)) < 0.01

    def test_extrapolation_lists_points(self):
        rec = twoport_from_gain(GRID, 0.0)
        wider = FrequencyGrid(np.array([3e9, 5e9, 9e9]))
        with pytest.raises(ExtrapolationError) as exc:
            resample(rec, wider)
        assert exc.value.points == [3e9, 9e9]


# --- Cascata de ruído ---

class TestCascadeNoise:
    def test_attenuator_then_amplifier(self):
        chain = SignalChain((Attenuator("att", 20.0, 3.6), Amplifier("hemt", 40.0, 5.0)))
        report = cascade_noise(chain, GRID)
        np.testing.assert_allclose(report.te_input_referred, 856.4, rtol=1e-12)
        np.testing.assert_allclose(report.cumulative_gain_db, 20.0, rtol=1e-12)

    def test_amplifier_then_hot_backend(self):
        chain = SignalChain((Amplifier("hemt", 40.0, 5.0), Amplifier("rt", 30.0, 100.0)))
        report = cascade_noise(chain, GRID)
        np.testing.assert_allclose(report.te_input_referred, 5.01, rtol=1e-12)

    def test_single_element(self):
        report = cascade_noise(SignalChain((Amplifier("lna", 30.0, 4.2),)), GRID)
        np.testing.assert_allclose(report.te_input_referred, 4.2)
        np.testing.assert_allclose(report.cumulative_gain_db, 30.0)

    def test_contributions_sum_to_total(self):
        chain = SignalChain((
            Attenuator("a", 6.0, 50.0),
            Cable("c", 3.0, 50.0, 4.0),
            Amplifier("lna", 35.0, 6.0),
        ))
        report = cascade_noise(chain, GRID)
        total = sum(report.per_element_contribution.values())
        np.testing.assert_allclose(total, report.te_input_referred, rtol=1e-12)
        assert list(report.per_element_contribution) == ["a", "c", "lna"]

    def test_split_at_any_plane(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            elements = []
            for k in range(rng.integers(2, 6)):
                if rng.random() < 0.5:
                    elements.append(Attenuator(f"e{k}", rng.uniform(0, 20), rng.uniform(0, 300)))
                else:
                    elements.append(Amplifier(f"e{k}", rng.uniform(0, 40), rng.uniform(0, 300)))
            cut = int(rng.integers(1, len(elements)))
            first = SignalChain(tuple(elements[:cut]))
            second = SignalChain(tuple(elements[cut:]))
            whole = cascade_noise(first + second, GRID)
            a = cascade_noise(first, GRID)
            b = cascade_noise(second, GRID)
            expected = a.te_input_referred + b.te_input_referred / a.gain_linear
            np.testing.assert_allclose(whole.te_input_referred, expected, rtol=1e-9)

    def test_zero_gain_element(self):
        s = np.zeros((len(GRID), 2, 2), dtype=complex)
        s[:, 1, 0] = 0.5
        s[3, 1, 0] = 0.0
        dead = SParamElement("dead", TwoPortRecord(GRID, s))
        chain = SignalChain((dead, Amplifier("lna", 40.0, 5.0)))
        with pytest.raises(InfiniteReferredNoiseError) as exc:
            cascade_noise(chain, GRID)
        assert exc.value.element == "dead"
        assert exc.value.frequency == GRID.points[3]

    def test_measured_gain_is_resampled(self):
        coarse = FrequencyGrid.linspace(4e9, 8e9, 3)
        rec = twoport_from_gain(coarse, 40.0)
        report = cascade_noise(SignalChain((Amplifier("dut", rec, 5.0),)), GRID)
        np.testing.assert_allclose(report.cumulative_gain_db, 40.0, rtol=1e-12)

    def test_duplicate_labels(self):
        with pytest.raises(ValidationError):
            SignalChain((Attenuator("x", 1.0, 4.0), Attenuator("x", 2.0, 4.0)))

    def test_empty_chain(self):
        with pytest.raises(ValidationError):
            SignalChain(())

    def test_band_summary(self):
        chain = SignalChain((Attenuator("att", 20.0, 3.6), Amplifier("hemt", 40.0, 5.0)))
        summary = band_summary(cascade_noise(chain, GRID), 5e9, 7e9)
        assert summary["n_points"] == 3
        assert summary["te_k_mean"] == pytest.approx(856.4)
        with pytest.raises(ValidationError):
            band_summary(cascade_noise(chain, GRID), 1e9, 2e9)


class TestChainFromConfig:
    def test_all_kinds(self, tmp_path):
        (tmp_path / "dut.s2p").write_text(
            "# GHz S DB R 50\n"
            "4 -30 0 40 0 -60 0 -30 0\n"
            "8 -30 0 40 0 -60 0 -30 0\n"
        )
        items = [
            {"kind": "attenuator", "label": "att", "loss_db": 20, "t_phys": 3.6},
            {"kind": "cable", "label": "cab", "loss_db": 6, "t_in": 40, "t_out": 40,
             "model": "midpoint", "t_mid": 40},
            {"kind": "amplifier", "label": "dut", "gain_file": "dut.s2p", "te": 5.0},
            {"kind": "sparam_file", "label": "filt", "path": "dut.s2p", "te": 1.0},
        ]
        chain = chain_from_config(items, str(tmp_path))
        assert chain.labels == ["att", "cab", "dut", "filt"]
        report = cascade_noise(chain, GRID)
        np.testing.assert_allclose(report.cumulative_gain_db, -20 - 6 + 40 + 40, rtol=1e-12)

    def test_missing_field(self):
        with pytest.raises(ValidationError):
            chain_from_config([{"kind": "attenuator", "label": "att", "loss_db": 3}])

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            chain_from_config([{"kind": "mixer"}])

    def test_cable_model_validation(self):
        with pytest.raises(ValidationError):
            CableModel(kind="midpoint")
