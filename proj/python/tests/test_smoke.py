import numpy as np
import pytest

import aof_spectral as aof


def cloud(n, seed):
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, 3))


def test_lfc_split_sums_to_input():
    x = cloud(64, 1)
    lfc, hfc = aof.lfc_split(x, 20, k=10)
    assert lfc.shape == (64, 3)
    assert np.max(np.abs(lfc + hfc - x)) <= 1e-12
    full, rest = aof.lfc_split(x, 64, k=10)
    assert np.array_equal(full, x)
    assert np.max(np.abs(rest)) == 0.0


def test_spectrum_matches_numpy():
    x = cloud(32, 2)
    values, vectors = aof.spectral_basis(x, k=6)
    ref = np.linalg.eigvalsh(aof.laplacian(x, k=6))
    assert np.max(np.abs(values - ref)) <= 1e-9
    assert np.max(np.abs(vectors.T @ vectors - np.eye(32))) <= 1e-8
    assert values[0] >= -1e-10


def test_errors_map_to_python():
    with pytest.raises(aof.InvalidArgument):
        aof.lfc_split(cloud(10, 3), 11, k=3)
    with pytest.raises(aof.AofError):
        aof.Classifier.load("/nonexistent/model.bin")


def test_classifier_save_load(tmp_path):
    model = aof.Classifier.random(aof.ModelDims(8, 16, 8, 3), 4)
    x = cloud(20, 5)
    path = tmp_path / "m.bin"
    model.save(path)
    back = aof.Classifier.load(path)
    assert np.array_equal(back.logits(x), model.logits(x))
    assert back.predict(x) == model.predict(x)
    # permutation invariance
    assert np.allclose(model.logits(x[::-1].copy()), model.logits(x), atol=1e-12)


def test_attack_respects_budget():
    model = aof.Classifier.random(aof.ModelDims(8, 16, 8, 5), 6)
    x = cloud(32, 7)
    r = aof.attack(model, x, 1, m=10, k=6, iters=10, inits=1, eps_inf=0.05, seed=3)
    assert np.max(np.abs(r["perturbation"])) <= 0.05 + 1e-12
    assert np.allclose(r["adversarial"], x + r["perturbation"], atol=0.0)
    assert r["iterations_used"] == 10
    assert r["victim_pred"] == model.predict(r["adversarial"])
    assert r["success"] == (r["victim_pred"] != 1)


def test_defenses_and_asr():
    x = cloud(40, 8)
    assert aof.srs(x, 20, seed=1).shape == (20, 3)
    assert aof.sor(x).shape[0] <= 40
    model = aof.Classifier.random(aof.ModelDims(8, 16, 8, 5), 9)
    clouds = [cloud(16, s) for s in range(6)]
    labels = [model.predict(c) for c in clouds]
    r = aof.asr(model, clouds, labels, clouds)
    assert r["attacked"] == 6
    assert r["asr"] == 0.0


def test_shape_dataset():
    items, names = aof.shape_dataset(2, 32, seed=1)
    assert len(names) == 5
    assert len(items) == 10
    pts, label, split = items[0]
    assert pts.shape == (32, 3)
    assert 0 <= label < 5
    assert split in ("train", "test")
