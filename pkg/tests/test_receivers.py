"""Receiver error-probability tests.

Frozen values come from independent oracles: closed forms evaluated with
scipy.special, brute-force MAP sums over explicit outcome vectors, and an
exhaustive enumeration of the hybrid chain over all (difference, count)
outcome pairs built from scipy.stats Poisson pmfs.
"""

import math

import numpy as np
import pytest
from scipy import stats

from bpskrx.distributions import IDEAL_DETECTOR, DetectorModel
from bpskrx.receivers import (
    NoiseCase,
    SignalConfig,
    dpnrm_asymptote,
    dpnrm_error,
    helstrom_bound,
    homodyne_like_error,
    homodyne_sql,
    hybrid_error,
    hybrid_error_hd,
    kennedy_error,
)

Z5 = math.sqrt(5.0)


def enumerate_hybrid_ideal(alpha, z, tau, n_max=250):
    """Exhaustive-enumeration oracle for the ideal unbounded hybrid:
    loop over all two-arm count pairs of the reflected branch and weight
    each difference-sign branch by the final-stage off probability."""
    refl = math.sqrt(1.0 - tau) * alpha
    off = math.exp(-4.0 * tau * alpha * alpha)
    n = np.arange(n_max)

    def sign_sums(amp):
        p_c = stats.poisson.pmf(n, (amp + z) ** 2 / 2.0)
        p_d = stats.poisson.pmf(n, (amp - z) ** 2 / 2.0)
        joint = np.outer(p_c, p_d)
        delta = n[:, None] - n[None, :]
        return float(joint[delta < 0].sum()), float(joint[delta >= 0].sum())

    neg_given_0, _ = sign_sums(+refl)       # "0" = -alpha reflects to +refl
    _, geq_given_1 = sign_sums(-refl)
    return 0.5 * off * (neg_given_0 + geq_given_1)


class TestClosedForms:
    def test_helstrom(self):
        assert helstrom_bound(0.0) == 0.5
        assert helstrom_bound(1.0) == pytest.approx(0.004600070369588705, rel=1e-13)
        assert helstrom_bound(10.0) < 1e-20
        values = [helstrom_bound(a) for a in (0.0, 0.2, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_helstrom_priors(self):
        assert helstrom_bound(1.0, 0.0, 1.0) == 0.0
        with pytest.raises(ValueError):
            helstrom_bound(1.0, 0.6, 0.6)

    def test_kennedy(self):
        assert kennedy_error(0.0) == 0.5
        assert kennedy_error(1.0) == pytest.approx(0.00915781944436709, rel=1e-13)
        assert kennedy_error(1.0, 0.5) == pytest.approx(0.06766764161830635, rel=1e-13)
        with pytest.raises(ValueError):
            kennedy_error(1.0, 0.0)

    def test_homodyne_sql(self):
        assert homodyne_sql(0.0) == 0.5
        assert homodyne_sql(1.0) == pytest.approx(0.022750131948179195, rel=1e-13)
        values = [homodyne_sql(a) for a in np.linspace(0, 3, 13)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_hybrid_hd(self):
        assert hybrid_error_hd(1.0, 0.5) == pytest.approx(0.010644066369522464, rel=1e-13)
        for alpha in (0.3, 1.0, 1.7):
            assert hybrid_error_hd(alpha, 0.0) == homodyne_sql(alpha)
            assert hybrid_error_hd(alpha, 1.0) == kennedy_error(alpha)


class TestHomodyneLike:
    def test_vacuum_signal(self):
        assert homodyne_like_error(0.0, Z5).p_err == pytest.approx(0.5, abs=1e-13)

    def test_frozen_value(self):
        # brute-force two-arm enumeration at alpha^2 = 1, z^2 = 5
        assert homodyne_like_error(1.0, Z5).p_err == pytest.approx(
            0.026117358012457743, rel=1e-12
        )

    @pytest.mark.parametrize("alpha_sq", (0.25, 1.0, 4.0))
    def test_strong_lo_reaches_sql(self, alpha_sq):
        alpha = math.sqrt(alpha_sq)
        p = homodyne_like_error(alpha, 100.0).p_err
        assert abs(p - homodyne_sql(alpha)) < 1e-3

    def test_breakdown_and_symmetry(self):
        res = homodyne_like_error(0.8, Z5)
        assert res.breakdown["err_given_0"] == pytest.approx(res.breakdown["err_given_1"], rel=1e-12)
        assert res.p_err <= 0.5


class TestHybridReductions:
    @pytest.mark.parametrize("alpha_sq", (0.5, 1.0, 2.0))
    def test_full_transmission_on_off_is_kennedy(self, alpha_sq):
        alpha = math.sqrt(alpha_sq)
        res = hybrid_error(SignalConfig(alpha=alpha, z=Z5, tau=1.0), DetectorModel(resolution=1))
        assert abs(res.p_err - kennedy_error(alpha)) < 1e-12

    @pytest.mark.parametrize("alpha_sq", (0.5, 1.0, 2.0))
    def test_zero_transmission_is_homodyne_like(self, alpha_sq):
        alpha = math.sqrt(alpha_sq)
        res = hybrid_error(SignalConfig(alpha=alpha, z=Z5, tau=0.0))
        assert abs(res.p_err - homodyne_like_error(alpha, Z5).p_err) < 1e-12

    def test_frozen_enumeration_value(self):
        res = hybrid_error(SignalConfig(alpha=math.sqrt(2.0), z=Z5, tau=0.5))
        assert res.p_err == pytest.approx(0.00047835609808396357, rel=1e-12)

    def test_matches_enumeration_oracle(self):
        for alpha_sq, tau in ((2.0, 0.5), (1.0, 0.3), (4.0, 0.9)):
            alpha = math.sqrt(alpha_sq)
            oracle = enumerate_hybrid_ideal(alpha, Z5, tau)
            res = hybrid_error(SignalConfig(alpha=alpha, z=Z5, tau=tau))
            assert res.p_err == pytest.approx(oracle, rel=1e-11)

    def test_vacuum_input(self):
        res = hybrid_error(SignalConfig(alpha=0.0, z=Z5, tau=0.5))
        assert res.p_err == pytest.approx(0.5, abs=1e-13)

    def test_full_transmission_noisy_is_dpnrm(self):
        # at tau = 1 the difference stage is uninformative and the chain
        # degenerates into the displacement-PNR receiver, for every noise case
        for detector in (
            DetectorModel(resolution=3, dark_rate=1e-3),
            DetectorModel(resolution=3, visibility=0.998),
            DetectorModel(resolution=2, efficiency=0.7, dark_rate=1e-3),
        ):
            for alpha_sq in (1.0, 4.0, 25.0):
                alpha = math.sqrt(alpha_sq)
                hyb = hybrid_error(SignalConfig(alpha=alpha, z=Z5, tau=1.0), detector)
                ref = dpnrm_error(alpha, detector)
                assert abs(hyb.p_err - ref.p_err) < 1e-12
                assert hyb.n_th_used == ref.n_th_used

    def test_strong_lo_matches_hd_form(self):
        # z^2 = 1e4 homodyne-like front end approaches the erf expression
        for alpha_sq, tau in ((1.0, 0.4), (2.0, 0.8)):
            alpha = math.sqrt(alpha_sq)
            res = hybrid_error(SignalConfig(alpha=alpha, z=100.0, tau=tau))
            assert abs(res.p_err - hybrid_error_hd(alpha, tau)) < 1e-3

    def test_tie_policy_differs_from_standalone(self):
        # the hybrid groups delta = 0 with the positive branch; the
        # standalone homodyne-like receiver splits it evenly; they agree
        # at tau = 0 only through the exact symmetry of the tie mass
        res = hybrid_error(SignalConfig(alpha=1.0, z=Z5, tau=0.0))
        assert res.n_th_used is None

    def test_dark_counts_against_paper_structure(self):
        # with dark counts the final stage flips the sign decision at the
        # MAP threshold; spot-check the full sum against a direct
        # enumeration with scipy pmfs
        alpha, tau, nu, m = math.sqrt(2.0), 0.6, 1e-3, 3
        detector = DetectorModel(resolution=m, dark_rate=nu)
        res = hybrid_error(SignalConfig(alpha=alpha, z=Z5, tau=tau), detector)

        refl = math.sqrt(1.0 - tau) * alpha
        n = np.arange(m + 1)

        def pnr(rate):
            probs = stats.poisson.pmf(n, rate).astype(float)
            probs[m] = 1.0 - probs[:m].sum()
            return probs

        def sign_sums(amp):
            p_c = pnr((amp + Z5) ** 2 / 2.0 + nu)
            p_d = pnr((amp - Z5) ** 2 / 2.0 + nu)
            joint = np.outer(p_c, p_d)
            delta = n[:, None] - n[None, :]
            return float(joint[delta < 0].sum()), float(joint[delta >= 0].sum())

        r_anti = 4.0 * tau * alpha ** 2 + nu
        n_th = res.n_th_used
        p_low_anti = float(pnr(r_anti)[:n_th].sum())
        p_high_null = float(pnr(nu)[n_th:].sum())
        neg0, geq0 = sign_sums(+refl)
        neg1, geq1 = sign_sums(-refl)
        expected = 0.5 * (neg0 * p_low_anti + geq0 * p_high_null) + 0.5 * (
            geq1 * p_low_anti + neg1 * p_high_null
        )
        assert res.p_err == pytest.approx(expected, rel=1e-11)


class TestDpnrm:
    def test_on_off_noiseless_is_kennedy(self):
        for alpha_sq in (0.5, 1.0, 4.0):
            alpha = math.sqrt(alpha_sq)
            res = dpnrm_error(alpha, DetectorModel(resolution=1))
            assert abs(res.p_err - kennedy_error(alpha)) < 1e-14

    def test_unbounded_rejected(self):
        with pytest.raises(ValueError):
            dpnrm_error(1.0, IDEAL_DETECTOR)

    def test_frozen_dark_value(self):
        # brute MAP sum at rates (nu, 40 + nu), M = 1:
        # (exp(-40 - nu) + 1 - exp(-nu)) / 2
        nu = 1e-3
        res = dpnrm_error(math.sqrt(10.0), DetectorModel(resolution=1, dark_rate=nu))
        expected = 0.5 * (math.exp(-40.0 - nu) + 1.0 - math.exp(-nu))
        assert res.p_err == pytest.approx(expected, rel=1e-13)

    def test_brute_force_map(self):
        for m, nu, alpha_sq in ((3, 1e-3, 2.0), (2, 1e-4, 5.0), (5, 1e-3, 0.5)):
            detector = DetectorModel(resolution=m, dark_rate=nu)
            res = dpnrm_error(math.sqrt(alpha_sq), detector)
            n = np.arange(m + 1)

            def pnr(rate):
                probs = stats.poisson.pmf(n, rate).astype(float)
                probs[m] = 1.0 - probs[:m].sum()
                return probs

            # min-form of the MAP error (identical to 1 - sum max/2 but
            # without the cancellation against 1)
            brute = 0.5 * np.minimum(pnr(nu), pnr(4.0 * alpha_sq + nu)).sum()
            assert res.p_err == pytest.approx(brute, rel=1e-10, abs=1e-18)

    @pytest.mark.parametrize(
        "m,expected",
        [(1, 4.99750083312489e-4), (2, 2.4983339586004405e-7), (3, 8.327089018322908e-11)],
    )
    def test_dark_asymptote_frozen(self, m, expected):
        value = dpnrm_asymptote(DetectorModel(resolution=m, dark_rate=1e-3))
        assert value == pytest.approx(expected, rel=1e-12)

    def test_visibility_asymptote_frozen(self):
        value = dpnrm_asymptote(
            DetectorModel(resolution=1, visibility=0.998), alpha=math.sqrt(5.0)
        )
        assert value == pytest.approx(0.009900663346622374, rel=1e-12)

    @pytest.mark.parametrize("m", (1, 2, 3))
    def test_plateau_reached(self, m):
        detector = DetectorModel(resolution=m, dark_rate=1e-3)
        plateau = dpnrm_asymptote(detector)
        assert abs(dpnrm_error(5.0, detector).p_err - plateau) < 1e-9

    def test_visibility_asymptote_increases_with_energy(self):
        detector = DetectorModel(resolution=2, visibility=0.998)
        values = [dpnrm_asymptote(detector, alpha=math.sqrt(a)) for a in (5.0, 10.0, 20.0)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_noise_case_validation(self):
        with pytest.raises(ValueError):
            dpnrm_error(1.0, DetectorModel(resolution=2, visibility=0.998), NoiseCase.DARK_COUNTS)
        with pytest.raises(ValueError):
            dpnrm_error(1.0, DetectorModel(resolution=2, dark_rate=1e-3), NoiseCase.VISIBILITY)

    def test_combined_noise_flagged_extension(self):
        res = dpnrm_error(1.0, DetectorModel(resolution=2, dark_rate=1e-3, visibility=0.998))
        assert any("extension" in note for note in res.notes)

    def test_asymptote_requires_alpha_when_energy_dependent(self):
        with pytest.raises(ValueError):
            dpnrm_asymptote(DetectorModel(resolution=2, visibility=0.998))


class TestGlobalBounds:
    def test_no_receiver_beats_helstrom(self):
        for alpha_sq in (0.1, 0.5, 1.0, 2.0, 4.0):
            alpha = math.sqrt(alpha_sq)
            floor = helstrom_bound(alpha) - 1e-12
            assert kennedy_error(alpha) >= floor
            assert homodyne_sql(alpha) >= floor
            assert homodyne_like_error(alpha, Z5).p_err >= floor
            for tau in (0.0, 0.3, 0.7, 1.0):
                assert hybrid_error(SignalConfig(alpha=alpha, z=Z5, tau=tau)).p_err >= floor

    def test_probabilities_within_half(self):
        for alpha_sq in (0.0, 0.2, 1.0, 5.0):
            alpha = math.sqrt(alpha_sq)
            for tau in (0.0, 0.5, 1.0):
                for detector in (
                    IDEAL_DETECTOR,
                    DetectorModel(resolution=3, dark_rate=1e-3),
                    DetectorModel(resolution=2, visibility=0.998),
                ):
                    p = hybrid_error(SignalConfig(alpha=alpha, z=Z5, tau=tau), detector).p_err
                    assert 0.0 <= p <= 0.5 + 1e-12


class TestSignalConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alpha": -1.0},
            {"alpha": 1.0, "z": -2.0},
            {"alpha": 1.0, "tau": 1.5},
            {"alpha": 1.0, "q0": 0.7, "q1": 0.7},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SignalConfig(**kwargs)

    def test_alpha_sq(self):
        assert SignalConfig(alpha=2.0).alpha_sq == 4.0

    def test_unequal_priors_flagged_extension(self):
        res = hybrid_error(SignalConfig(alpha=1.0, z=Z5, tau=0.5, q0=0.7, q1=0.3))
        assert any("extension" in note for note in res.notes)
        assert res.p_err <= 0.5

    def test_certain_prior_never_errs(self):
        res = hybrid_error(SignalConfig(alpha=1.0, z=Z5, tau=0.5, q0=0.0, q1=1.0))
        assert res.p_err == 0.0
