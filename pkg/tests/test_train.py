import math

import numpy as np
import pytest

import reference_edcnn as ref
from ehdcnn import data, nn, train
from ehdcnn.autodiff import NonFiniteError
from ehdcnn.data import Dataset
from ehdcnn.train import TrainConfig


@pytest.fixture(scope="module")
def tiny_task():
    return data.synthetic_task("sinc", m=60, dim=4, seed=1)


def test_sgd_examples():
    assert train.sgd_step([np.array([1.0])], [np.array([1.0])], 0.01, 0.0)[0][0] == pytest.approx(0.99)
    assert train.sgd_step([np.array([1.0])], [np.array([0.0])], 0.01, 0.0005)[0][0] == pytest.approx(0.999995)


def test_sgd_decay_only_contracts_every_parameter():
    p = nn.init_params(5, 2, 2, 1.0, seed=0)
    out = train.sgd_step(p, [np.zeros_like(a) for a in p.arrays()], 0.1, 0.01)
    for before, after in zip(p.arrays(), out.arrays()):
        np.testing.assert_allclose(after, before * (1 - 0.1 * 0.01), rtol=1e-15)


def test_sgd_rejects_bad_gradients():
    with pytest.raises(NonFiniteError):
        train.sgd_step([np.ones(2)], [np.array([1.0, np.nan])], 0.1)
    with pytest.raises(ValueError):
        train.sgd_step([np.ones(2)], [np.ones(3)], 0.1)


def test_momentum_accumulates():
    vel = [np.zeros(1)]
    p = [np.array([0.0])]
    p = train.sgd_step(p, [np.ones(1)], 1.0, 0.0, vel, 0.5)
    p = train.sgd_step(p, [np.ones(1)], 1.0, 0.0, vel, 0.5)
    assert p[0][0] == pytest.approx(-2.5)


def test_empirical_risk():
    assert train.empirical_risk([1.0, 2.0], [1.0, 4.0]) == 2.0


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(lr=-1)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(curvature=-0.5)
    with pytest.raises(ValueError):
        TrainConfig(task="classification")
    assert math.isinf(TrainConfig(curvature=0).truncation_limit)
    assert TrainConfig(curvature=1).truncation_limit == pytest.approx(math.atanh(1 - 1e-5))


@pytest.mark.parametrize("seed", range(5))
def test_euclidean_run_matches_reference_trainer(seed):
    rng = np.random.default_rng(seed)
    n, s, L = int(rng.integers(4, 8)), int(rng.integers(2, 4)), int(rng.integers(1, 4))
    tr, te = data.synthetic_task("cosc", m=80, dim=n, seed=seed)
    cfg = TrainConfig(curvature=0.0, layers=L, filter_span=s, batch_size=16, epochs=4, seed=seed, lr=0.005)
    hist = train.fit(cfg, tr, te)
    assert not hist.diverged

    p0 = nn.init_params(n, s, L, 0.0, seed=seed)
    order = train.shuffle_rng(seed)
    batches = [train.minibatches(tr.m, 16, order) for _ in range(cfg.epochs)]
    expected = ref.train(p0.arrays(), tr.features, tr.targets, te.features, te.targets,
                         cfg.lr, cfg.weight_decay, cfg.epochs, batches)
    for rec, (loss, metric) in zip(hist.records, expected):
        assert abs(rec.train_loss - loss) <= 1e-9
        assert abs(rec.test_metric - metric) <= 1e-9


def test_reference_gradients_agree_with_tape():
    rng = np.random.default_rng(3)
    p = nn.init_params(6, 3, 3, 0.0, seed=2)
    p = p.with_arrays([a + rng.normal(size=a.shape) * 0.1 for a in p.arrays()])
    x, y = rng.uniform(-1, 1, size=(9, 6)), rng.normal(size=9)
    loss, grads = train.loss_and_grads(p, x, y, TrainConfig(curvature=0.0))
    assert loss == pytest.approx(ref.loss(p.arrays(), x, y), abs=1e-13)
    for g, r in zip(grads, ref.grads(p.arrays(), x, y)):
        np.testing.assert_allclose(g, r, atol=1e-12)


def test_zero_learning_rate_keeps_loss_constant(tiny_task):
    hist = train.fit(TrainConfig(curvature=1.0, layers=2, filter_span=2, lr=0.0, weight_decay=0.0,
                                 epochs=3, batch_size=16), *tiny_task)
    assert np.all(hist.train_losses == hist.initial_train_loss)


def test_history_shape_and_determinism(tiny_task):
    cfg = TrainConfig(curvature=0.5, layers=2, filter_span=2, epochs=3, batch_size=16, seed=4)
    a, b = train.fit(cfg, *tiny_task), train.fit(cfg, *tiny_task)
    assert [r.epoch for r in a.records] == [1, 2, 3]
    np.testing.assert_array_equal(a.train_losses, b.train_losses)
    np.testing.assert_array_equal(a.test_metrics, b.test_metrics)


def test_full_batch_is_one_step_per_epoch():
    assert len(train.minibatches(10, None, np.random.default_rng(0))) == 1
    sizes = [len(b) for b in train.minibatches(10, 4, np.random.default_rng(0))]
    assert sizes == [4, 4, 2]


def test_single_sample_descent():
    # one small step on one sample lowers that sample's loss
    rng = np.random.default_rng(11)
    cfg = TrainConfig(curvature=1.0)
    failures = 0
    for _ in range(100):
        n, s, L = int(rng.integers(3, 7)), 2, int(rng.integers(1, 4))
        c = float(rng.choice([0.0, 0.5, 1.0, 2.0]))
        p = nn.init_params(n, s, L, c, seed=int(rng.integers(1e6)))
        x, y = rng.uniform(-1, 1, size=(1, n)), rng.normal(size=1)
        loss, grads = train.loss_and_grads(p, x, y, cfg)
        if sum(float(np.sum(g * g)) for g in grads) < 1e-20:
            continue
        after, _ = train.loss_and_grads(train.sgd_step(p, grads, 1e-4), x, y, cfg)
        failures += after >= loss
    assert failures == 0


def test_divergence_is_reported(tiny_task):
    hist = train.fit(TrainConfig(curvature=0.0, layers=2, filter_span=2, lr=1e6, epochs=5, batch_size=8),
                     *tiny_task)
    assert hist.diverged and "diverged" in hist.message
    assert len(hist.records) < 5


def test_truncation_applied_to_predictions():
    p = nn.init_params(3, 2, 1, 1.0, seed=0)
    p = p.with_arrays([*p.arrays()[:-1], p.output_vec * 1e3])
    x = np.ones((4, 3)) * 0.5
    cfg = TrainConfig(curvature=1.0)
    raw = train.predict(p, x, cfg)
    clipped = train.predict(p, x, cfg, truncated=True)
    assert np.max(np.abs(raw)) > cfg.truncation_limit
    assert np.max(np.abs(clipped)) <= cfg.truncation_limit


def test_classification_fit():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(60, 6))
    y = (x[:, 0] > 0).astype(int) + (x[:, 1] > 0).astype(int)
    ds = Dataset(x, y, task="classification", n_classes=3)
    cfg = TrainConfig(curvature=1.0, layers=2, filter_span=2, task="classification", n_classes=3,
                      epochs=2, batch_size=20)
    hist = train.fit(cfg, ds, ds)
    assert all(0 <= m <= 1 for m in hist.test_metrics)
    with pytest.raises(ValueError):
        train.fit(TrainConfig(layers=2, filter_span=2, epochs=1), ds, ds)


def test_sweep_rows_and_csv(tiny_task, tmp_path):
    base = TrainConfig(layers=2, filter_span=2, epochs=2, batch_size=30, seed=7)
    hists = train.curvature_sweep(base, train.DEFAULT_CURVATURES, *tiny_task)
    assert [h.curvature for h in hists] == list(train.DEFAULT_CURVATURES)
    path = train.write_sweep_csv(hists, tmp_path / "sweep.csv")
    rows = train.read_history_csv(path)
    assert len(rows) == 12
    assert rows[0][:2] == (1, 0.0) and rows[-1][:2] == (2, 4.0)
    # shared seed gives identical initial losses at c=0 across repeated sweeps
    again = train.curvature_sweep(base, [0.0], *tiny_task)
    assert again[0].initial_train_loss == hists[0].initial_train_loss


def test_sweep_rejects_duplicates(tiny_task):
    with pytest.raises(ValueError):
        train.curvature_sweep(TrainConfig(epochs=1), [1.0, 1.0], *tiny_task)


def test_ablation_grid(tiny_task):
    base = TrainConfig(epochs=1, batch_size=60)
    grid = train.ablation_grid(base, [2, 3], [1, 2], [0.0, 1.0], *tiny_task)
    assert sorted(grid) == [(2, 1), (2, 2), (3, 1), (3, 2)]
    assert all(len(v) == 2 for v in grid.values())


def test_epochs_to_reach():
    assert train.epochs_to_reach([10.0, 5.0, 2.05, 2.0]) == 3
    assert train.epochs_to_reach([1.0, 1.0]) == 1
