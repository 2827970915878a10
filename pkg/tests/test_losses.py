import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmf.losses import (CLIP, FocalConfig, LossConfig, LossId, SoftCounts,
                        TverskyConfig, cb_dice_loss, class_weights, cross_entropy,
                        focal_loss, loss_gradient, loss_value, losses_with_grad,
                        mean_dice_loss, mean_iou_loss, one_hot, soft_counts,
                        softmax, tversky_index, tversky_loss)

ALL_LOSSES = [l.value for l in LossId]


def random_instance(rng, n_pixels=64, n_classes=2, scale=2.0):
    logits = scale * rng.standard_normal((n_pixels, n_classes))
    mask = rng.integers(0, n_classes, n_pixels)
    return logits, mask


def counts(tp, fp, fn):
    return SoftCounts(np.asarray(tp, float), np.asarray(fp, float), np.asarray(fn, float))


def finite_difference(loss_id, logits, mask, cfg, h=1e-4):
    """Central differences of the scalar loss with respect to each logit."""
    grad = np.zeros_like(logits)
    for idx in np.ndindex(*logits.shape):
        up, down = logits.copy(), logits.copy()
        up[idx] += h
        down[idx] -= h
        grad[idx] = (loss_value(loss_id, softmax(up), mask, cfg)
                     - loss_value(loss_id, softmax(down), mask, cfg)) / (2 * h)
    return grad


# -- soft counts ---------------------------------------------------------------

def test_perfect_prediction_counts():
    mask = np.array([0, 1, 1, 2, 0])
    c = soft_counts(one_hot(mask, 3), mask)
    np.testing.assert_array_equal(c.fp, 0)
    np.testing.assert_array_equal(c.fn, 0)
    np.testing.assert_array_equal(c.tp, [2, 2, 1])


def test_uniform_prediction_counts():
    mask = np.array([0, 0, 1, 1])
    c = soft_counts(np.full((4, 2), 0.5), mask)
    for arr in (c.tp, c.fp, c.fn):
        np.testing.assert_allclose(arr, [1, 1])


def test_empty_class_counts():
    mask = np.array([0, 0, 2])
    c = soft_counts(np.full((3, 3), 1 / 3), mask)
    assert c.tp[1] == 0 and c.fn[1] == 0


def test_counts_dimension_mismatch():
    with pytest.raises(ValueError):
        soft_counts(np.full((3, 2), 0.5), np.array([0, 1]))
    with pytest.raises(ValueError):
        soft_counts(np.full((2, 2), 0.5), np.array([0, 2]))


@given(st.integers(0, 10_000), st.integers(2, 4))
def test_counts_invariants(seed, c):
    rng = np.random.default_rng(seed)
    logits, mask = random_instance(rng, 50, c)
    sc = soft_counts(softmax(logits), mask)
    assert np.all(sc.tp >= 0) and np.all(sc.fp >= -1e-12) and np.all(sc.fn >= -1e-12)
    np.testing.assert_allclose(sc.tp + sc.fn, np.bincount(mask, minlength=c), atol=1e-12)


# -- cross entropy and focal -----------------------------------------------------

def test_cross_entropy_examples():
    mask = np.array([0, 1, 1, 0])
    assert cross_entropy(one_hot(mask, 2), mask) <= -math.log(1 - CLIP) + 1e-15
    assert cross_entropy(np.full((4, 2), 0.5), mask) == pytest.approx(math.log(2), abs=1e-12)
    mask4 = np.array([0, 1, 2, 3, 3])
    assert cross_entropy(np.full((5, 4), 0.25), mask4) == pytest.approx(math.log(4), abs=1e-12)


def test_focal_examples():
    p = np.array([[0.5, 0.5]])
    m = np.array([1])
    assert focal_loss(p, m, FocalConfig(1.0, 2.0)) == pytest.approx(0.25 * math.log(2), abs=1e-12)
    assert 0.25 * math.log(2) == pytest.approx(0.173287, abs=1e-6)


def test_focal_vanishes_faster_than_ce():
    m = np.array([0])
    for p in (0.9, 0.99, 0.999):
        probs = np.array([[p, 1 - p]])
        assert focal_loss(probs, m) < cross_entropy(probs, m) * (1 - p) ** 1.9


def test_focal_per_class_alpha():
    probs = np.array([[0.7, 0.3], [0.4, 0.6]])
    mask = np.array([0, 1])
    got = focal_loss(probs, mask, FocalConfig((2.0, 0.5), 1.0))
    want = (-2.0 * 0.3 * math.log(0.7) - 0.5 * 0.4 * math.log(0.6)) / 2
    assert got == pytest.approx(want, rel=1e-12)


# -- overlap losses --------------------------------------------------------------

def test_iou_examples():
    mask = np.array([0, 1, 1, 0])
    assert mean_iou_loss(soft_counts(one_hot(mask, 2), mask)) == pytest.approx(0, abs=1e-6)
    assert mean_iou_loss(counts([1, 1], [1, 1], [1, 1])) == pytest.approx(2 / 3, abs=1e-6)
    assert mean_iou_loss(counts([3, 1], [0, 1], [0, 1])) == pytest.approx(1 / 3, abs=1e-6)


def test_dice_examples():
    assert mean_dice_loss(counts([1, 1], [1, 1], [1, 1])) == pytest.approx(0.5, abs=1e-6)
    mask = np.array([0, 1, 1, 0])
    assert mean_dice_loss(soft_counts(one_hot(mask, 2), mask)) == pytest.approx(0, abs=1e-6)


def test_tversky_examples():
    c = counts([1, 3], [1, 0.5], [0, 2])
    assert tversky_loss(c, TverskyConfig(0.5, 0.5)) == mean_dice_loss(c)
    np.testing.assert_allclose(tversky_index(counts([1], [1], [0]), 1, 1), [0.5], atol=1e-6)
    mask = np.array([0, 1, 1, 0])
    assert tversky_loss(soft_counts(one_hot(mask, 2), mask)) == pytest.approx(0, abs=1e-6)


def test_absent_class_scores_one():
    c = counts([2, 0], [0, 0], [0, 0])
    np.testing.assert_allclose(tversky_index(c, 0.5, 0.5), [1, 1], atol=1e-6)
    assert mean_iou_loss(c) == pytest.approx(0, abs=1e-6)


@given(st.floats(0.01, 100), st.floats(0, 100), st.floats(0, 100))
def test_dice_iou_identity(tp, fp, fn):
    c = counts([tp], [fp], [fn])
    iou = tversky_index(c, 1, 1, smooth=0)[0]
    dice = tversky_index(c, 0.5, 0.5, smooth=0)[0]
    assert dice == pytest.approx(2 * iou / (1 + iou), rel=1e-12)


# -- class-balanced dice ---------------------------------------------------------

def test_class_weights_examples():
    np.testing.assert_allclose(class_weights(np.array([0, 1] * 50)), [0.5, 0.5])
    np.testing.assert_allclose(class_weights(np.array([0] * 75 + [1] * 25)), [0.25, 0.75])
    np.testing.assert_allclose(class_weights(np.array([0] * 90 + [1] * 10)), [0.1, 0.9])


def test_class_weights_edge_cases():
    np.testing.assert_array_equal(class_weights(np.zeros(10, int), 2), [1, 0])
    np.testing.assert_allclose(class_weights(np.array([0, 0, 2, 2]), 3), [0.5, 0, 0.5])
    np.testing.assert_allclose(class_weights(np.array([0, 0, 0, 1]), 2, "one_minus"), [0.25, 0.75])
    np.testing.assert_array_equal(class_weights(np.ones(4, int), 2, "one_minus"), [0, 1])
    with pytest.raises(ValueError):
        class_weights(np.array([0, 1]), 2, "sqrt")


def test_cb_dice_examples():
    c = counts([3, 1], [1, 3], [1, 3])
    assert cb_dice_loss(c, [0.5, 0.5]) == mean_dice_loss(c)
    # per-class dice exactly 1.0 and 0.5
    c = counts([2, 1], [0, 1], [0, 1])
    assert cb_dice_loss(c, [0.25, 0.75]) == pytest.approx(0.375, abs=1e-6)
    mask = np.array([0, 0, 0, 1])
    perfect = soft_counts(one_hot(mask, 2), mask)
    assert cb_dice_loss(perfect, class_weights(mask)) == pytest.approx(0, abs=1e-6)


# -- invariants ------------------------------------------------------------------

@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_losses_non_negative(seed, c):
    rng = np.random.default_rng(seed)
    logits, mask = random_instance(rng, 40, c)
    probs = softmax(logits)
    for loss in ALL_LOSSES:
        assert loss_value(loss, probs, mask) >= 0


@pytest.mark.parametrize("loss", ALL_LOSSES)
def test_zero_at_perfect_prediction(loss):
    mask = np.array([0, 1, 2, 2, 1, 0, 0])
    assert loss_value(loss, one_hot(mask, 3), mask) == pytest.approx(0, abs=1e-5)


@given(st.integers(0, 10_000))
def test_pixel_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    logits, mask = random_instance(rng, 30, 3)
    probs = softmax(logits)
    perm = rng.permutation(30)
    cfg = LossConfig(focal=FocalConfig((0.2, 0.3, 0.5), 2.0))
    for loss in ALL_LOSSES:
        a = loss_value(loss, probs, mask, cfg)
        b = loss_value(loss, probs[perm], mask[perm], cfg)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


@given(st.integers(0, 10_000))
def test_class_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    logits, mask = random_instance(rng, 30, 3)
    probs = softmax(logits)
    perm = rng.permutation(3)
    inv = np.argsort(perm)
    alpha = np.array([0.2, 0.3, 0.5])
    cfg = LossConfig(focal=FocalConfig(tuple(alpha), 2.0))
    cfg_p = LossConfig(focal=FocalConfig(tuple(alpha[perm]), 2.0))
    for loss in ALL_LOSSES:
        a = loss_value(loss, probs, mask, cfg)
        b = loss_value(loss, probs[:, perm], inv[mask], cfg_p)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_reductions_exact():
    rng = np.random.default_rng(11)
    for _ in range(20):
        logits, mask = random_instance(rng, 50, 3)
        probs = softmax(logits)
        c = soft_counts(probs, mask)
        assert abs(tversky_loss(c, TverskyConfig(0.5, 0.5)) - mean_dice_loss(c)) <= 1e-12
        assert abs(focal_loss(probs, mask, FocalConfig(1.0, 0.0)) - cross_entropy(probs, mask)) <= 1e-12


# -- gradients -------------------------------------------------------------------

def test_ce_gradient_identity():
    rng = np.random.default_rng(5)
    logits, mask = random_instance(rng, 20, 3)
    probs = softmax(logits)
    g = loss_gradient("ce", probs, mask)
    np.testing.assert_allclose(g, (probs - one_hot(mask, 3)) / 20, atol=1e-15)


@pytest.mark.parametrize("loss", ALL_LOSSES)
@pytest.mark.parametrize("n_classes", [2, 3])
def test_gradient_matches_finite_differences(loss, n_classes):
    rng = np.random.default_rng(100 + n_classes)
    logits, mask = random_instance(rng, 64, n_classes, scale=1.5)
    cfg = LossConfig(focal=FocalConfig(tuple(np.linspace(0.5, 1.5, n_classes)), 2.0))
    analytic = loss_gradient(loss, softmax(logits), mask, cfg)
    numeric = finite_difference(loss, logits, mask, cfg)
    rel = np.abs(analytic - numeric).max() / np.abs(numeric).max()
    assert rel < 1e-4


@pytest.mark.parametrize("loss", ["iou", "dice", "tversky", "cbdice"])
def test_overlap_gradient_tiny_at_perfect_prediction(loss):
    mask = np.array([0, 1, 1, 0, 0, 0])
    logits = 40.0 * (one_hot(mask, 2) - 0.5)
    g = loss_gradient(loss, softmax(logits), mask)
    assert np.abs(g).max() <= 1e-6


def test_shared_counts_match_single_calls():
    rng = np.random.default_rng(9)
    logits, mask = random_instance(rng, 40, 2)
    probs = softmax(logits)
    together = losses_with_grad(ALL_LOSSES, probs, mask)
    for loss, (v, g) in zip(ALL_LOSSES, together):
        v1, g1 = losses_with_grad([loss], probs, mask)[0]
        assert v == v1
        np.testing.assert_array_equal(g, g1)


def test_unknown_loss_id():
    with pytest.raises(ValueError):
        loss_gradient("hinge", np.full((2, 2), 0.5), np.array([0, 1]))
