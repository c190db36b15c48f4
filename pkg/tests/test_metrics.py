import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndeso.metrics import confusion_matrix, gmean, macro_prf


def test_confusion_matrix_counts():
    cm = confusion_matrix([0, 0, 1, 1], [0, 1, 1, 1], 2)
    assert cm.tolist() == [[1, 1], [0, 2]]


def test_confusion_matrix_perfect_and_degenerate():
    y = [0, 1, 2, 2, 1]
    assert np.array_equal(confusion_matrix(y, y, 3), np.diag([1, 2, 2]))
    cm = confusion_matrix(y, [0] * 5, 3)
    assert cm[:, 1:].sum() == 0 and cm[:, 0].sum() == 5


def test_confusion_matrix_length_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        confusion_matrix([0, 1], [0], 2)


def eq7_gmean(tp, fn, tn, fp):
    tpr = tp / (tp + fn)
    tnr = tn / (tn + fp)
    return math.sqrt(tpr * tnr)


def test_binary_worked_value():
    # positive class first: TP=40, FN=10; negatives TN=45, FP=5
    cm = np.array([[40, 10], [5, 45]])
    assert gmean(cm) == pytest.approx(math.sqrt(0.8 * 0.9), abs=1e-12)
    assert gmean(cm) == pytest.approx(0.848528137, abs=1e-9)


def test_three_class_worked_value():
    cm = np.array([[10, 0, 0], [5, 5, 0], [1, 1, 8]])
    assert gmean(cm) == pytest.approx(0.4 ** (1 / 3), abs=1e-12)
    assert gmean(cm) == pytest.approx(0.736806300, abs=1e-9)


def test_gmean_edges():
    assert gmean(np.diag([3, 4, 5])) == 1.0
    assert gmean(np.array([[3, 0], [4, 0]])) == 0.0
    # class 2 has no actual samples: excluded, not a zero
    assert gmean(np.array([[2, 0, 0], [0, 2, 0], [0, 0, 0]])) == 1.0
    with pytest.raises(ValueError):
        gmean(np.zeros((2, 2)))


matrices = st.lists(st.integers(0, 60), min_size=4, max_size=4).filter(
    lambda v: v[0] + v[1] > 0 and v[2] + v[3] > 0)


@settings(max_examples=200)
@given(matrices)
def test_binary_matches_sensitivity_specificity(v):
    tp, fn, fp, tn = v
    assert abs(gmean(np.array([[tp, fn], [fp, tn]])) - eq7_gmean(tp, fn, tn, fp)) < 1e-12


@settings(max_examples=100)
@given(st.integers(2, 5).flatmap(lambda c: st.lists(st.integers(0, 20), min_size=c * c, max_size=c * c)),
       st.integers(1, 7))
def test_gmean_bounds_and_scale_invariance(flat, factor):
    c = int(round(len(flat) ** 0.5))
    cm = np.array(flat).reshape(c, c)
    if cm.sum() == 0:
        return
    g = gmean(cm)
    assert 0.0 <= g <= 1.0
    assert gmean(cm * factor) == pytest.approx(g, abs=1e-12)
    present = cm.sum(axis=1) > 0
    off = cm - np.diag(np.diag(cm))
    assert (g == 1.0) == (off[present].sum() == 0)


def test_macro_prf_worked():
    p, r, f = macro_prf(np.array([[1, 1], [0, 2]]))
    assert p == pytest.approx((1 + 2 / 3) / 2)
    assert r == pytest.approx(0.75)
    assert f == pytest.approx(0.5 * (2 / 3 + 0.8))
    assert round(f, 3) == 0.733


def test_macro_prf_perfect_and_unpredicted_class():
    assert macro_prf(np.diag([2, 3])) == (1.0, 1.0, 1.0)
    p, r, f = macro_prf(np.array([[3, 0], [2, 0]]))
    assert p == pytest.approx(0.5 * 0.6)
