import json
import math

import pytest

import matchlab as ml


def toy_instance():
    inst = ml.ProblemInstance()
    inst.num_offline = 2
    inst.capacities = [1, 1]
    inst.weight_caps = [9.0, 9.0]
    inst.arrivals = [[3.0, 2.0], [4.0, 1.0]]
    return inst


def test_generate_is_deterministic():
    a = ml.generate_instance(3, 8, seed=7, sparsity=0.3)
    b = ml.generate_instance(3, 8, seed=7, sparsity=0.3)
    assert a == b
    assert ml.validate(a) == []


def test_round_trip(tmp_path):
    instances = [ml.generate_instance(2, 5, seed=s) for s in range(3)]
    instances[0].weight_caps = [ml.UNBOUNDED, 1.0]
    path = str(tmp_path / "instances.jsonl")
    ml.save_instances(instances, path)
    loaded = ml.load_instances(path)
    assert loaded == instances
    assert math.isinf(loaded[0].weight_caps[0])


def test_validation_reports_violations():
    inst = toy_instance()
    inst.capacities = [0, 1]
    messages = ml.validate(inst)
    assert any("capacity" in m for m in messages)


def test_free_disposal_primitives():
    assert ml.top_set([5.0, 1.0, 2.0], 2) == [2.0, 5.0]
    assert ml.f_value([5.0, 1.0, 2.0], 2) == 7.0
    assert ml.delta_f([3.0], 1, 5.0) == 2.0
    assert ml.p_os(0.0, 1.0) == 0.5


def test_oracles_agree():
    for seed in range(20):
        inst = ml.generate_instance(3, 6, seed=seed, capacity_high=2, sparsity=0.3)
        exhaustive, _ = ml.opt_exhaustive(inst)
        flow, assignment = ml.opt_flow(inst)
        assert flow == pytest.approx(exhaustive, abs=1e-9)
        assert len(assignment) == inst.num_online


def test_switching_respects_the_bound():
    policy = ml.init_policy([ml.FEATURE_DIM, 8, 8, 1], seed=3)
    for seed in range(10):
        inst = ml.generate_instance(4, 20, seed=seed, sparsity=0.4)
        for setting in ("nfd", "fd"):
            trace = ml.run_lomar(inst, policy, rho=0.75, setting=setting)
            bound = 0.75 * trace["final_expert_reward"] - 1e-9
            assert trace["final_reward"] >= bound
            assert min(trace["slack"]) >= -1e-9


def test_scripted_walkthrough():
    trace = ml.run_scripted(toy_instance(), [1, 1], rho=0.5)
    assert trace["actual"] == [0, 1]
    assert trace["final_reward"] == 4.0


def test_train_and_evaluate():
    instances = [ml.generate_instance(3, 10, seed=s, sparsity=0.5) for s in range(12)]
    policy = ml.train(instances, epochs=2, batch_size=4, learning_rate=0.01, rho=0.4, seed=1)
    report = json.loads(
        ml.evaluate(
            instances,
            [
                {"algo": "greedy"},
                {"algo": "opt"},
                {"algo": "lomar", "rho": 0.5, "policy": policy},
            ],
        )
    )
    assert [row["algo"] for row in report["algorithms"]] == ["greedy", "opt", "lomar"]
    opt_row = report["algorithms"][1]
    assert opt_row["cr"] == pytest.approx(1.0)
    for row in report["algorithms"]:
        assert row["avg"] <= opt_row["avg"] + 1e-9
