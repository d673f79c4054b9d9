"""Sources, lossy channels, the intercept-resend attack, Born oracle."""

import math

import mpmath
import numpy as np
import pytest

from finitekey.channels import (INCONCLUSIVE, ChannelModel, born_oracle,
                                eb_emit, pm_transmit)
from finitekey.quantum import MeasurementSet, PreparedStateFamily


def chi2_sf(stat: float, df: int) -> float:
    """Upper tail of the chi-square distribution via incomplete gamma."""
    return float(mpmath.gammainc(df / 2, a=stat / 2, regularized=True))


def test_model_validation_and_json():
    with pytest.raises(ValueError):
        ChannelModel(variant="mystery")
    with pytest.raises(ValueError):
        ChannelModel(variant="eb_honest", eta=0.5)
    with pytest.raises(ValueError):
        ChannelModel(variant="pm_honest", attack_fraction=0.3)
    model = ChannelModel(variant="pm_intercept_resend", qber=0.02, eta=0.5,
                         attack_fraction=1.0)
    assert ChannelModel.from_json(model.to_json()) == model


def test_eb_emit_noiseless_and_symmetric():
    rng = np.random.default_rng(0)
    phi = rng.integers(0, 2, 1000, dtype=np.uint8)
    clean = ChannelModel(variant="eb_honest", qber=0.0)
    a, b = eb_emit(clean, phi, rng)
    assert np.array_equal(a, b)

    coin = ChannelModel(variant="eb_honest", qber=0.5)
    a, b = eb_emit(coin, np.zeros(100_000, dtype=np.uint8), rng)
    mism = np.mean(a != b)
    assert abs(mism - 0.5) <= 5 * np.sqrt(0.25 / 100_000)


def test_eb_emit_qber_and_uniform_marginal():
    rng = np.random.default_rng(1)
    model = ChannelModel(variant="eb_honest", qber=0.02)
    a, b = eb_emit(model, np.zeros(100_000, dtype=np.uint8), rng)
    p = 0.02
    assert abs(np.mean(a != b) - p) <= 5 * np.sqrt(p * (1 - p) / 100_000)
    assert abs(np.mean(a) - 0.5) <= 5 * np.sqrt(0.25 / 100_000)


def test_pm_transmit_identity_link():
    rng = np.random.default_rng(2)
    model = ChannelModel(variant="pm_honest", qber=0.0, eta=1.0)
    r = rng.integers(0, 2, 5000, dtype=np.uint8)
    phi = rng.integers(0, 2, 5000, dtype=np.uint8)
    u = pm_transmit(model, r, phi, phi, rng)
    assert np.array_equal(u, r)


def test_pm_transmit_matched_and_mismatched_statistics():
    rng = np.random.default_rng(7)
    M = 100_000
    model = ChannelModel(variant="pm_honest", qber=0.05, eta=1.0)
    r = rng.integers(0, 2, M, dtype=np.uint8)
    phi_a = rng.integers(0, 2, M, dtype=np.uint8)
    phi_b = rng.integers(0, 2, M, dtype=np.uint8)
    u = pm_transmit(model, r, phi_a, phi_b, rng)
    matched = phi_a == phi_b
    err_matched = np.mean(u[matched] != r[matched])
    n1 = matched.sum()
    assert abs(err_matched - 0.05) <= 5 * np.sqrt(0.05 * 0.95 / n1)
    err_mismatched = np.mean(u[~matched] != r[~matched])
    n2 = (~matched).sum()
    assert abs(err_mismatched - 0.5) <= 5 * np.sqrt(0.25 / n2)


def test_pm_transmit_loss_rate_and_independence():
    rng = np.random.default_rng(3)
    M = 100_000
    model = ChannelModel(variant="pm_honest", qber=0.0, eta=0.5)
    r = rng.integers(0, 2, M, dtype=np.uint8)
    phi_a = rng.integers(0, 2, M, dtype=np.uint8)
    phi_b = rng.integers(0, 2, M, dtype=np.uint8)
    u = pm_transmit(model, r, phi_a, phi_b, rng)
    conclusive = (u != INCONCLUSIVE).astype(int)
    assert abs(np.mean(conclusive) - 0.5) <= 5 * np.sqrt(0.25 / M)

    # chi-square independence of conclusiveness from the (r, phi_a, phi_b)
    # cell; eight cells against two outcomes, seven degrees of freedom
    cell = r * 4 + phi_a * 2 + phi_b
    stat = 0.0
    p_hat = conclusive.mean()
    for c in range(8):
        in_cell = cell == c
        n_c = int(in_cell.sum())
        for outcome, p_out in ((1, p_hat), (0, 1 - p_hat)):
            observed = int(np.sum(conclusive[in_cell] == outcome))
            expected = n_c * p_out
            stat += (observed - expected) ** 2 / expected
    assert chi2_sf(stat, df=7) > 1e-6


def test_intercept_resend_quarter_error():
    rng = np.random.default_rng(4)
    M = 100_000
    model = ChannelModel(variant="pm_intercept_resend", qber=0.0, eta=1.0,
                         attack_fraction=1.0)
    r = rng.integers(0, 2, M, dtype=np.uint8)
    phi = rng.integers(0, 2, M, dtype=np.uint8)
    u = pm_transmit(model, r, phi, phi, rng)
    err = np.mean(u != r)
    assert abs(err - 0.25) <= 5 * np.sqrt(0.25 * 0.75 / M)


def test_intercept_resend_composed_rate():
    # partial attack on a noisy link follows the exact composition law
    rng = np.random.default_rng(5)
    M = 200_000
    qber, frac = 0.05, 0.4
    model = ChannelModel(variant="pm_intercept_resend", qber=qber, eta=1.0,
                         attack_fraction=frac)
    r = rng.integers(0, 2, M, dtype=np.uint8)
    phi = rng.integers(0, 2, M, dtype=np.uint8)
    u = pm_transmit(model, r, phi, phi, rng)
    expected = qber + frac / 4 - qber * frac / 2
    err = np.mean(u != r)
    assert abs(err - expected) <= 5 * np.sqrt(expected * (1 - expected) / M)


def bb84_measurements():
    return {0: MeasurementSet.computational(), 1: MeasurementSet.hadamard()}


def test_born_oracle_ideal_bb84():
    fam = PreparedStateFamily.ideal_bb84()
    out = born_oracle(fam, bb84_measurements(), 10_000,
                      np.random.default_rng(6))
    matched = out["prep_basis"] == out["meas_basis"]
    assert np.all(out["outcome"][matched] == out["prep_bit"][matched])
    mismatched = ~matched
    n = int(mismatched.sum())
    agree = np.mean(out["outcome"][mismatched] == out["prep_bit"][mismatched])
    assert abs(agree - 0.5) <= 5 * np.sqrt(0.25 / n)


def test_born_oracle_depolarized_matches_bit_model():
    # mixing 2Q parts of identity produces matched-basis error Q, the
    # same conditional law the bit-level source uses; compare the
    # conditional outcome distributions configuration by configuration
    q = 0.05
    fam = PreparedStateFamily.depolarized_bb84(2 * q)
    out = born_oracle(fam, bb84_measurements(), 10_000,
                      np.random.default_rng(8))
    for pb in (0, 1):
        for bit in (0, 1):
            for mb in (0, 1):
                sel = ((out["prep_basis"] == pb) & (out["prep_bit"] == bit)
                       & (out["meas_basis"] == mb))
                n = int(sel.sum())
                freq1 = np.mean(out["outcome"][sel] == 1)
                want1 = (0.5 if pb != mb else (q if bit == 0 else 1 - q))
                tv = abs(freq1 - want1)  # two outcomes: TV = |diff|
                assert tv <= max(0.01, 5 * np.sqrt(0.25 / n))
    matched = out["prep_basis"] == out["meas_basis"]
    err = np.mean(out["outcome"][matched] != out["prep_bit"][matched])
    n = int(matched.sum())
    assert abs(err - q) <= 5 * np.sqrt(q * (1 - q) / n)


def test_born_oracle_caps():
    fam = PreparedStateFamily.ideal_bb84()
    with pytest.raises(ValueError):
        born_oracle(fam, bb84_measurements(), 20_000, np.random.default_rng(0))
