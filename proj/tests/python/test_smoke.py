import json

import numpy as np
import pytest

import apfnet


def test_potentials_hand_values():
    assert apfnet.attractive_potential((5.0, 0.0), (0.0, 0.0), xi=1.0) == pytest.approx(12.5, abs=1e-12)
    # 0.5 * 2 * (1/2 - 1/8)^2
    assert apfnet.repulsive_potential((0.0, 0.0), [(2.0, 0.0)]) == pytest.approx(0.140625, abs=1e-12)
    assert apfnet.repulsive_potential((0.0, 0.0), [(9.0, 0.0)]) == 0.0
    total = apfnet.total_potential((5.0, 0.0), (0.0, 0.0), [(7.0, 0.0)], xi=1.0)
    assert total == pytest.approx(12.5 + 0.140625, abs=1e-12)


def test_bad_params_raise_value_error():
    with pytest.raises(ValueError):
        apfnet.total_potential((0.0, 0.0), (1.0, 0.0), [], d0=-1.0)


def test_generate_is_deterministic_and_parses():
    a = apfnet.generate_suite(4, seed=3)
    assert a == apfnet.generate_suite(4, seed=3)
    assert len(json.loads(a)) == 4
    assert len(apfnet.split_suite(a)) == 4


def test_maps_have_grid_shape_and_range():
    scenario = apfnet.split_suite(apfnet.generate_suite(1, seed=5, difficulty="static"))[0]
    occ = apfnet.rasterize(scenario)
    ideal = apfnet.ideal_field(scenario)
    assert occ.shape == ideal.shape == (10, 36, 9)
    assert set(np.unique(occ)) <= {0.0, 1.0}
    assert occ.sum() > 0
    assert ideal.min() >= 0.0 and ideal.max() <= 1.0


def test_model_predict_and_checkpoint_round_trip(tmp_path):
    model = apfnet.Model.initialized(1, lstm_hidden=8)
    x = np.zeros((3, 36, 9))
    y = model.predict(x)
    assert y.shape == (3, 36, 9)
    assert np.all((y > 0.0) & (y < 1.0))
    path = tmp_path / "m.ckpt"
    model.save(path)
    loaded = apfnet.Model.load(path)
    assert loaded.lstm_hidden == 8
    np.testing.assert_array_equal(loaded.predict(x), y)


def test_predict_rejects_wrong_shape():
    model = apfnet.Model.initialized(1, lstm_hidden=4)
    with pytest.raises(ValueError):
        model.predict(np.zeros((2, 10, 9)))


def test_train_reports_history_and_callback():
    suite = apfnet.generate_suite(6, seed=2)
    seen = []
    model, history = apfnet.train(suite, epochs=2, seed=1, lstm_hidden=8,
                                  on_epoch=lambda e, tr, te: seen.append(e))
    assert seen == [1, 2]
    assert [h[0] for h in history] == [1, 2]
    assert all(np.isfinite(h[1]) and np.isfinite(h[2]) for h in history)
    assert model.horizon == 10


def test_analytic_plan_on_empty_road_reaches_goal():
    scenario = apfnet.split_suite(apfnet.generate_suite(1, seed=9, difficulty="empty"))[0]
    outcome, traj = apfnet.plan(scenario)
    assert outcome == "reached_goal"
    assert traj.shape[1] == 5
    goal = json.loads(scenario)["goal"]
    assert np.hypot(traj[-1, 1] - goal[0], traj[-1, 2] - goal[1]) <= 1.0 + 1e-9
    m = apfnet.metrics(scenario)
    assert m["completed"] and m["ttc_min"] == pytest.approx(10.0)


def test_learned_plan_runs():
    scenario = apfnet.split_suite(apfnet.generate_suite(1, seed=9))[0]
    outcome, traj = apfnet.plan(scenario, apfnet.Model.initialized(2, lstm_hidden=4))
    assert outcome in {"reached_goal", "collided", "timed_out"}
    assert len(traj) >= 1


def test_run_command_generate(tmp_path):
    assert apfnet.run_command("generate", {"out": tmp_path, "count": 3, "seed": 1}) == 0
    assert len(json.loads((tmp_path / "suite.json").read_text())) == 3
    assert apfnet.run_command("bogus", {"out": tmp_path}) == 1
    with pytest.raises(ValueError):
        apfnet.run_command("generate", {"nope": 1})
