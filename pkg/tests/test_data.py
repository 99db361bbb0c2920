import numpy as np
import pytest

from tnstream.data import (
    add_instance,
    gaussian_blobs,
    generate_synthetic,
    load_csv,
    loop_clusters,
    minmax_normalize,
    multi_density,
    rings,
    segment_clusters,
    uniform_ball_blobs,
    with_noise,
    write_csv,
)
from tnstream.errors import ArityMismatch, InvalidSpec, ParseError
from tnstream.tn_graph import separability_class


def test_load_labeled_csv(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text("1.0,2.0,1\n3.0,4.0,1\n5.0,6.0,2\n7.0,8.0,2\n")
    ps, labels = load_csv(path, normalize=False)
    assert len(ps) == 4 and ps.dim == 2
    assert labels == [1, 1, 2, 2]
    assert ps.coords[0].tolist() == [1.0, 2.0]


def test_load_csv_header_and_blank_lines(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text("x,y,label\n\n1,2,1\n3,4,2\n")
    ps, labels = load_csv(path, normalize=False)
    assert len(ps) == 2 and labels == [1, 2]


def test_load_csv_ragged_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,1\n3,4\n")
    with pytest.raises(ArityMismatch) as err:
        load_csv(path)
    assert err.value.row == 2


def test_load_csv_parse_error_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,1\n3,oops,2\n")
    with pytest.raises(ParseError) as err:
        load_csv(path)
    assert err.value.row == 2


def test_minmax_normalization():
    out = minmax_normalize(np.array([[0.0], [5.0], [10.0]]))
    assert out.ravel().tolist() == [0.0, 0.5, 1.0]
    flat = minmax_normalize(np.array([[3.0], [3.0]]))
    assert flat.ravel().tolist() == [0.0, 0.0]


def test_csv_round_trip(tmp_path):
    ps, labels = gaussian_blobs(2, 30, 3, 0.1, 5.0, seed=1)
    path = tmp_path / "rt.csv"
    write_csv(path, ps, labels)
    ps2, labels2 = load_csv(path, normalize=False)
    assert labels2 == list(labels)
    assert np.array_equal(ps2.coords, ps.coords)


def test_blobs_are_add_separable():
    ps, labels = gaussian_blobs(2, 100, 2, sigma=0.1, separation=10.0, seed=0)
    report = separability_class(ps, 1.0)
    assert report.kind == "ADD"
    assert len(report.components) == 2
    # components coincide with the generator's labels
    by_label = {
        lab: {int(ps.ids[i]) for i in range(len(ps)) if labels[i] == lab} for lab in (1, 2)
    }
    assert {frozenset(c) for c in report.components} == {
        frozenset(v) for v in by_label.values()
    }


def test_blob_sizes_split_evenly():
    _, labels = gaussian_blobs(3, 100, 2, 0.05, 5.0, seed=2)
    counts = sorted(labels.count(lab) for lab in (1, 2, 3))
    assert counts == [33, 33, 34]


def test_noise_fraction_of_output():
    ps, labels = gaussian_blobs(2, 860, 2, 0.05, 5.0, seed=3)
    noisy_ps, noisy_labels = with_noise(ps, labels, 0.14, seed=4)
    n_noise = noisy_labels.count(0)
    assert n_noise == round(860 * 0.14 / 0.86)
    assert len(noisy_ps) == 860 + n_noise
    assert n_noise / len(noisy_ps) == pytest.approx(0.14, abs=0.005)


def test_rings_never_add_below_gap():
    # a single ring connects to itself at small thresholds; across-ring gaps
    # exceed them, so no threshold below the gap is ever clique-separable
    ps, _ = rings(120, [1.0, 2.0], noise=0.02, dim=2, seed=5)
    for d in np.linspace(0.05, 0.9, 8):
        assert separability_class(ps, float(d)).kind != "ADD"


def test_add_instance_certified():
    ps, labels, threshold = add_instance(3, 6, 2, gap=1.0, seed=6)
    report = separability_class(ps, threshold)
    assert report.kind == "ADD"
    assert sorted(len(c) for c in report.components) == [6, 6, 6]


def test_generators_emit_expected_counts():
    ps, labels = loop_clusters(3, 90, 3, 0.2, 0.01, 1.0, seed=7)
    assert sorted(set(labels)) == [1, 2, 3] and len(ps) == 90
    ps, labels = segment_clusters(2, 40, 3, 0.5, 0.02, 1.0, seed=8)
    assert sorted(set(labels)) == [1, 2] and len(ps) == 40
    ps, labels = uniform_ball_blobs(2, 50, 3, 0.1, 1.0, seed=9)
    assert sorted(set(labels)) == [1, 2]
    ps, labels = multi_density(30, 20, 2, 0.01, 0.1, 4.0, seed=10)
    assert labels.count(1) == 30 and labels.count(2) == 20


def test_multi_density_density_contrast():
    ps, labels = multi_density(100, 100, 2, 0.01, 0.2, 8.0, seed=11)
    dense = ps.coords[np.array(labels) == 1]
    sparse = ps.coords[np.array(labels) == 2]
    assert dense.std() < sparse.std() / 5


def test_generate_synthetic_strings():
    ps, labels = generate_synthetic("blobs:k=2,n=60,d=2,sigma=0.05,sep=5", seed=1)
    assert len(ps) == 60
    ps, labels = generate_synthetic("rings:n=40,radii=1+2,noise=0.02", seed=2)
    assert len(ps) == 40 and set(labels) == {1, 2}
    ps, labels = generate_synthetic("blobs:k=2,n=50,d=2,sigma=0.05,sep=5,noise_frac=0.2", seed=3)
    assert labels.count(0) > 0


def test_generate_synthetic_dict_and_nested_noise():
    ps, labels = generate_synthetic(
        {"kind": "noisy", "base": {"kind": "blobs", "k": 2, "n": 40, "d": 2, "sigma": 0.05, "sep": 4}, "fraction": 0.1},
        seed=4,
    )
    assert labels.count(0) == round(40 * 0.1 / 0.9)


def test_generate_synthetic_invalid():
    with pytest.raises(InvalidSpec):
        generate_synthetic("mystery:k=2", seed=0)
    with pytest.raises(InvalidSpec):
        generate_synthetic("blobs:k=2", seed=0)  # missing params
    with pytest.raises(InvalidSpec):
        generate_synthetic("blobs:k=two,n=10,d=2,sigma=0.1,sep=2", seed=0)
    with pytest.raises(InvalidSpec):
        with_noise(*gaussian_blobs(2, 20, 2, 0.1, 5.0), 1.5)


def test_determinism_of_generators():
    a = gaussian_blobs(3, 90, 2, 0.1, 3.0, seed=42)
    b = gaussian_blobs(3, 90, 2, 0.1, 3.0, seed=42)
    assert np.array_equal(a[0].coords, b[0].coords) and a[1] == b[1]
