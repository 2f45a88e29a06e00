from __future__ import annotations

import numpy as np
import pytest

from groundcheck import (
    CalibSpec,
    ScoreSet,
    calibrate,
    ensemble_average,
    entropy,
    sigmoid_scores,
    softmax_with_temperature,
)


def test_uniform_logits_give_uniform_distribution():
    out = softmax_with_temperature([0.0, 0.0, 0.0], 1.0)
    assert np.allclose(out.values, 1 / 3)
    assert out.kind == "softmax"


def test_unit_temperature_is_plain_softmax():
    z = np.array([2.0, 1.0, 0.0])
    expected = np.exp(z) / np.exp(z).sum()
    out = softmax_with_temperature(z, 1.0)
    assert np.allclose(out.values, expected, atol=1e-15)


def test_high_temperature_flattens():
    out = softmax_with_temperature([2.0, 1.0, 0.0], 1000.0)
    assert np.abs(out.values - 1 / 3).max() < 1e-3


def test_temperature_must_be_positive():
    with pytest.raises(ValueError):
        softmax_with_temperature([1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        softmax_with_temperature([1.0, 2.0], -1.0)


def test_nonfinite_logits_rejected():
    with pytest.raises(ValueError):
        softmax_with_temperature([1.0, np.nan], 1.0)
    with pytest.raises(ValueError):
        sigmoid_scores([np.inf, 0.0])


def test_sigmoid_midpoint_and_saturation():
    assert sigmoid_scores([0.0]).values[0] == 0.5
    out = sigmoid_scores([-1e9, 1e9]).values
    assert out[0] == pytest.approx(0.0, abs=1e-12)
    assert out[1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.isfinite(out))


def test_sigmoid_preserves_argmax(rng):
    for _ in range(100):
        z = rng.normal(size=rng.integers(2, 20))
        assert int(np.argmax(sigmoid_scores(z).values)) == int(np.argmax(z))


def test_ensemble_average_single_member_is_softmax():
    row = np.array([0.3, -1.2, 2.0])
    scores = ScoreSet(members=row[None, :], kind="raw_logit")
    assert np.allclose(
        ensemble_average(scores, 1.0).values,
        softmax_with_temperature(row, 1.0).values,
        atol=1e-15,
    )


def test_ensemble_average_identical_rows_collapse():
    row = np.array([0.5, 0.1, -0.4])
    scores = ScoreSet(members=np.tile(row, (3, 1)), kind="raw_logit")
    assert np.allclose(
        ensemble_average(scores, 1.0).values,
        softmax_with_temperature(row, 1.0).values,
        atol=1e-12,
    )


def test_ensemble_average_hand_case():
    # softmax([0, ln 3]) = (1/4, 3/4); its mirror gives (3/4, 1/4); mean = (1/2, 1/2)
    rows = np.array([[0.0, np.log(3.0)], [np.log(3.0), 0.0]])
    out = ensemble_average(ScoreSet(members=rows, kind="raw_logit"), 1.0)
    assert np.allclose(out.values, [0.5, 0.5], atol=1e-12)


def test_ensemble_average_rejects_post_activation_scores():
    scores = ScoreSet(members=np.array([[0.2, 0.8]]), kind="softmax")
    with pytest.raises(ValueError):
        ensemble_average(scores, 1.0)


def test_calibrate_keep_members_applies_rowwise():
    rows = np.array([[0.0, 1.0], [2.0, -1.0], [0.5, 0.5], [3.0, 0.0]])
    scores = ScoreSet(members=rows, kind="raw_logit")
    outs = calibrate(scores, CalibSpec(ensemble_mode="keep_members"))
    assert len(outs) == 4
    for row, out in zip(rows, outs):
        assert np.allclose(out.values, softmax_with_temperature(row).values)


def test_calibrate_average_of_one_is_softmax():
    scores = ScoreSet(members=np.array([[1.0, 0.0, -1.0]]), kind="raw_logit")
    out = calibrate(scores, CalibSpec(ensemble_mode="average"))
    assert np.allclose(out.values, softmax_with_temperature([1.0, 0.0, -1.0]).values)


def test_calibrate_raw_is_identity():
    scores = ScoreSet(members=np.array([[0.2, -0.7, 0.9]]), kind="cosine")
    out = calibrate(scores, CalibSpec(output_fn="raw", ensemble_mode="single"))
    assert out.kind == "cosine"
    assert np.array_equal(out.values, scores.member(0))


def test_calibrate_single_out_of_range_member():
    scores = ScoreSet(members=np.zeros((2, 3)), kind="raw_logit")
    with pytest.raises(ValueError, match="member index"):
        calibrate(scores, CalibSpec(ensemble_mode="single", member_index=5))


def test_temperature_undefined_outside_softmax():
    with pytest.raises(ValueError):
        CalibSpec(output_fn="raw", temperature=1.5)
    with pytest.raises(ValueError):
        CalibSpec(output_fn="sigmoid", temperature=2.0)


def test_argmax_invariant_under_temperature(rng):
    for _ in range(200):
        z = rng.normal(scale=3.0, size=rng.integers(2, 30))
        for tau in (0.1, 0.5, 1.0, 2.0, 10.0, 1000.0):
            out = softmax_with_temperature(z, tau)
            assert int(np.argmax(out.values)) == int(np.argmax(z))


def test_entropy_monotone_in_temperature(rng):
    taus = (0.1, 0.5, 1.0, 2.0, 10.0, 1000.0)
    for _ in range(200):
        z = rng.normal(scale=3.0, size=rng.integers(2, 30))
        entropies = [entropy(softmax_with_temperature(z, tau)) for tau in taus]
        for lo, hi in zip(entropies, entropies[1:]):
            assert hi >= lo - 1e-12


def test_shift_invariance(rng):
    for _ in range(200):
        z = rng.normal(scale=3.0, size=rng.integers(2, 30))
        c = float(rng.uniform(-50, 50))
        tau = float(rng.choice([0.5, 1.0, 2.0]))
        base = softmax_with_temperature(z, tau).values
        shifted = softmax_with_temperature(z + c, tau).values
        assert np.abs(base - shifted).max() <= 1e-12


def test_ensemble_average_matches_reference_mean(rng):
    for _ in range(100):
        e, n = int(rng.integers(1, 6)), int(rng.integers(2, 12))
        rows = rng.normal(scale=2.0, size=(e, n))
        tau = float(rng.choice([0.5, 1.0, 3.0]))
        reference = np.mean(
            [softmax_with_temperature(row, tau).values for row in rows], axis=0
        )
        out = ensemble_average(ScoreSet(members=rows, kind="raw_logit"), tau)
        assert np.abs(out.values - reference).max() <= 1e-12
