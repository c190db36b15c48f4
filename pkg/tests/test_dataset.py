import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndeso.dataset import (
    Dataset, DatasetError, bundled_datasets, class_stats, generate_synthetic, load_csv, write_csv,
)
from ndeso.dataset import _stats_from_counts


def test_load_with_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,label\n1,2,x\n3,4.5,y\n-1e-3,0,x\n")
    ds = load_csv(p, has_header=True)
    assert (ds.n, ds.d) == (3, 2)
    assert ds.feature_names == ("a", "b")
    assert ds.classes == ("x", "y")
    assert ds.labels.tolist() == [0, 1, 0]
    np.testing.assert_array_equal(ds.features[2], [-1e-3, 0.0])


def test_parse_error_names_row_and_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,2,x\n3,abc,y\n")
    with pytest.raises(DatasetError, match=r"row 2, column 2"):
        load_csv(p)


def test_three_distinct_labels_get_dense_ids(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,cat\n1,dog\n2,eel\n3,dog\n")
    ds = load_csv(p)
    assert ds.classes == ("cat", "dog", "eel")
    assert sorted(set(ds.labels.tolist())) == [0, 1, 2]


def test_label_column_override(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,1,2\ny,3,4\n")
    ds = load_csv(p, label_column=0)
    assert ds.classes == ("x", "y")
    np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4]])


@pytest.mark.parametrize("text, match", [
    ("", "empty"),
    ("1,2,x\n3,y\n", "row 2 has 2 fields"),
    ("1,nan,x\n", "non-finite"),
    ("1,2,\n", "empty label"),
])
def test_load_errors(tmp_path, text, match):
    p = tmp_path / "d.csv"
    p.write_text(text)
    with pytest.raises(DatasetError, match=match):
        load_csv(p)


def test_invariants_enforced():
    with pytest.raises(DatasetError):
        Dataset(np.zeros((3, 0)), [0, 0, 0], ("a",))
    with pytest.raises(DatasetError):
        Dataset(np.array([[np.inf]]), [0], ("a",))
    with pytest.raises(DatasetError, match="no members"):
        Dataset(np.zeros((2, 1)), [0, 0], ("a", "b"))


def test_features_are_read_only():
    ds = generate_synthetic(1, [3, 3], 1.0)
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0


def test_synthetic_counts_and_size(tmp_path):
    ds = generate_synthetic(7)
    assert ds.counts().tolist() == [50, 500, 100]
    write_csv(ds, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert len(lines) == 1 + 650


def test_synthetic_deterministic():
    a, b = generate_synthetic(3), generate_synthetic(3)
    assert a == b
    assert a.features.tobytes() == b.features.tobytes()
    assert not np.array_equal(a.features, generate_synthetic(4).features)


def test_synthetic_zero_noise_sits_on_centers():
    ds = generate_synthetic(5, noise_scale=0.0)
    centers = np.array([(0, 0), (3, 0), (1.5, 2.6)])
    np.testing.assert_array_equal(ds.features, centers[ds.labels])


def test_synthetic_rejects_bad_input():
    with pytest.raises(DatasetError):
        generate_synthetic(1, [0, 5])
    with pytest.raises(DatasetError):
        generate_synthetic(1, noise_scale=-1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.lists(st.integers(1, 40), min_size=1, max_size=6))
def test_synthetic_counts_exact_for_any_seed(seed, counts):
    assert generate_synthetic(seed, counts).counts().tolist() == counts


@pytest.mark.parametrize("counts, ir", [
    ([48, 46, 29, 20, 13, 3], 16.0),
    ([1706, 338, 123, 6, 2], 853.0),
    ([10, 10, 10], 1.0),
])
def test_imbalance_ratio(counts, ir):
    s = _stats_from_counts({str(i): c for i, c in enumerate(counts)})
    assert s.imbalance_ratio == ir
    assert s.n == sum(counts)


def test_class_stats_on_dataset():
    s = class_stats(generate_synthetic(1))
    assert s.counts == {"0": 50, "1": 500, "2": 100}
    assert (s.majority, s.minority, s.imbalance_ratio) == (500, 50, 10.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(1, 5), st.integers(0, 10_000))
def test_csv_round_trip(tmp_path_factory, n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d)) * 10.0 ** rng.integers(-300, 300, size=(n, d))
    labels = [f"c{v}" for v in rng.integers(0, 3, size=n)]
    ds = Dataset.from_raw(X, labels)
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(ds, path)
    back = load_csv(path, has_header=True)
    assert back.raw_labels() == ds.raw_labels()
    np.testing.assert_array_equal(back.features, ds.features)


def test_bundled_datasets_valid():
    sets = bundled_datasets()
    assert "synthetic" in sets
    assert sets["ecoli_shape"].counts().tolist() == [139, 77, 52, 35, 20, 5, 4, 2, 2]
