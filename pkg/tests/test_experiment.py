"""Tests for the experiment runner and its writers."""

import dataclasses
import pickle

import pytest

from capsched.core import Schedule, SchedulingError, Slot
from capsched.experiment import (
    ALGORITHMS,
    AggregateRow,
    ExperimentConfig,
    ExperimentVerificationError,
    ResultRow,
    aggregate_rows,
    config_from_obj,
    run_experiment,
    sweep_points,
    write_aggregates,
    write_results_csv,
    write_timings_csv,
)
from capsched.topogen import DEFAULT_MODEL_PARAMS, TopologySpec


def small_config(**overrides) -> ExperimentConfig:
    base = dict(
        topology=TopologySpec(family="random", n=6, seed=0, l_max=5.0, field_size=50.0),
        repetitions=2,
        algorithms=("A-repeated", "B-repeated", "first-fit-baseline"),
        base_seed=11,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def strip_time(row: ResultRow) -> ResultRow:
    return dataclasses.replace(row, wall_time_ms=0.0)


# --- config parsing ---------------------------------------------------------


def test_config_from_obj_full():
    cfg = config_from_obj(
        {
            "topology": {"family": "clustered", "n": 40, "r_cluster": 5.0},
            "params": {"alpha": 3.5, "beta": 1.0},
            "sweep": [["n", [40, 80]], ["alpha", [3.0, 3.5]]],
            "algorithms": ["A-repeated"],
            "repetitions": 3,
            "base_seed": 99,
            "output": "out.csv",
        }
    )
    assert cfg.topology.family == "clustered"
    assert cfg.topology.r_cluster == 5.0
    assert cfg.params.alpha == 3.5
    assert cfg.params.beta == 1.0
    assert cfg.sweep == (("n", (40, 80)), ("alpha", (3.0, 3.5)))
    assert cfg.repetitions == 3
    assert cfg.base_seed == 99
    assert cfg.output == "out.csv"
    assert cfg.timings is None


def test_config_defaults():
    cfg = config_from_obj({"topology": {"family": "random", "n": 5}})
    assert cfg.params == DEFAULT_MODEL_PARAMS
    assert cfg.sweep == ()
    assert cfg.algorithms == ("A-repeated",)
    assert cfg.repetitions == 1
    assert cfg.base_seed == 0


def test_config_sweep_as_mapping():
    cfg = config_from_obj(
        {"topology": {"family": "random", "n": 5}, "sweep": {"n": [5, 10]}}
    )
    assert cfg.sweep == (("n", (5, 10)),)


@pytest.mark.parametrize(
    "obj",
    [
        {"topology": {"family": "random", "n": 5}, "bogus": 1},
        {"topology": {"family": "random", "n": 5, "seed": 3}},
        {"topology": {"family": "random", "n": 5}, "params": {"gamma": 2}},
        {"topology": {"family": "random", "n": 5}, "algorithms": ["magic"]},
        {"topology": {"family": "random", "n": 5}, "repetitions": 0},
        {"topology": {"family": "random", "n": 5}, "sweep": [["beta", [1, 2]]]},
        {"topology": {"family": "random", "n": 5}, "sweep": [["n", []]]},
    ],
)
def test_config_rejects_bad_input(obj):
    with pytest.raises(ValueError):
        config_from_obj(obj)


def test_sweep_points_cross_product():
    cfg = small_config(sweep=(("n", (4, 8)), ("alpha", (3.0, 4.0))))
    points = sweep_points(cfg)
    assert points == [
        {"n": 4, "alpha": 3.0},
        {"n": 4, "alpha": 4.0},
        {"n": 8, "alpha": 3.0},
        {"n": 8, "alpha": 4.0},
    ]


def test_sweep_points_empty():
    assert sweep_points(small_config()) == [{}]


# --- runner -----------------------------------------------------------------


def test_run_experiment_shape_and_seeds():
    cfg = small_config()
    rows, aggregates = run_experiment(cfg)
    assert len(rows) == 2 * 3
    assert all(row.verified for row in rows)
    assert all(row.slot_count >= 1 for row in rows)
    assert all(row.wall_time_ms >= 0.0 for row in rows)
    assert {row.seed for row in rows} == {11, 12}
    assert {row.algorithm for row in rows} == set(cfg.algorithms)
    # one aggregate cell per algorithm here (no sweep)
    assert len(aggregates) == 3
    assert all(agg.reps == 2 for agg in aggregates)


def test_run_experiment_sweep_applies_parameters():
    cfg = small_config(
        sweep=(("n", (4, 6)), ("alpha", (3.0, 4.0))),
        algorithms=("A-repeated",),
        repetitions=1,
    )
    rows, _ = run_experiment(cfg)
    assert len(rows) == 4
    assert {(row.n, row.alpha) for row in rows} == {(4, 3.0), (4, 4.0), (6, 3.0), (6, 4.0)}


def test_run_experiment_deterministic():
    cfg = small_config()
    rows_a, agg_a = run_experiment(cfg)
    rows_b, agg_b = run_experiment(cfg)
    assert [strip_time(r) for r in rows_a] == [strip_time(r) for r in rows_b]
    assert agg_a == agg_b


def test_run_experiment_workers_match_sequential():
    cfg = small_config(repetitions=2, algorithms=("A-repeated", "first-fit-baseline"))
    seq_rows, seq_agg = run_experiment(cfg, workers=1)
    par_rows, par_agg = run_experiment(cfg, workers=2)
    assert [strip_time(r) for r in seq_rows] == [strip_time(r) for r in par_rows]
    assert seq_agg == par_agg


def test_run_experiment_rows_sorted_canonically():
    cfg = small_config(algorithms=("first-fit-baseline", "A-repeated"))
    rows, _ = run_experiment(cfg)
    keys = [(r.algorithm, r.family, r.n, r.alpha, r.l_max, r.r_cluster, r.seed) for r in rows]
    assert keys == sorted(keys)


def test_run_experiment_flags_bad_partition(monkeypatch):
    cfg = small_config(algorithms=("A-repeated",), repetitions=1)

    def drop_one(instance):
        ids = [link.id for link in instance.links]
        return Schedule((Slot(frozenset(ids[:-1])),))

    monkeypatch.setitem(ALGORITHMS, "A-repeated", drop_one)
    with pytest.raises(ExperimentVerificationError) as err:
        run_experiment(cfg)
    assert err.value.instance is not None
    assert err.value.schedule is not None


def test_run_experiment_wraps_scheduler_errors(monkeypatch):
    cfg = small_config(algorithms=("A-repeated",), repetitions=1)

    def blow_up(instance):
        raise SchedulingError("synthetic failure")

    monkeypatch.setitem(ALGORITHMS, "A-repeated", blow_up)
    with pytest.raises(ExperimentVerificationError) as err:
        run_experiment(cfg)
    assert err.value.schedule is None


def test_verification_error_survives_pickling():
    cfg = small_config(algorithms=("A-repeated",), repetitions=1)
    rows, _ = run_experiment(cfg)
    # build a real instance to embed
    from capsched.topogen import generate

    inst = generate(dataclasses.replace(cfg.topology, seed=11), cfg.params)
    exc = ExperimentVerificationError("boom", instance=inst, schedule=Schedule(()))
    clone = pickle.loads(pickle.dumps(exc))
    assert clone.instance == inst
    assert clone.schedule == Schedule(())
    assert str(clone) == "boom"
    assert rows  # runner itself unaffected


# --- aggregation ------------------------------------------------------------


def make_row(algo="A-repeated", seed=0, slots=3) -> ResultRow:
    return ResultRow(
        algorithm=algo,
        family="random",
        n=5,
        alpha=3.0,
        beta=1.2,
        l_max=20.0,
        r_cluster=10.0,
        seed=seed,
        slot_count=slots,
        wall_time_ms=1.5,
        verified=True,
    )


def test_aggregate_mean_and_ci():
    rows = [make_row(seed=0, slots=3), make_row(seed=1, slots=5)]
    (agg,) = aggregate_rows(rows)
    assert agg.mean_slots == pytest.approx(4.0)
    # stdev([3,5]) = sqrt(2); 1.96*sqrt(2)/sqrt(2) = 1.96
    assert agg.ci95 == pytest.approx(1.96)
    assert agg.reps == 2


def test_aggregate_single_rep_has_zero_ci():
    (agg,) = aggregate_rows([make_row()])
    assert agg.ci95 == 0.0
    assert agg.reps == 1


def test_aggregate_groups_by_algorithm():
    rows = [make_row("A-repeated"), make_row("first-fit-baseline", slots=9)]
    aggs = aggregate_rows(rows)
    assert [a.algorithm for a in aggs] == ["A-repeated", "first-fit-baseline"]
    assert [a.mean_slots for a in aggs] == [3.0, 9.0]


# --- writers ----------------------------------------------------------------


def test_results_csv_exact_bytes(tmp_path):
    path = tmp_path / "results.csv"
    write_results_csv([make_row(seed=7, slots=2)], path)
    expected = (
        "algorithm,family,n,alpha,beta,l_max,r_cluster,seed,slot_count,verified\n"
        "A-repeated,random,5,3,1.2,20,10,7,2,true\n"
    )
    assert path.read_bytes().decode("utf-8") == expected


def test_timings_csv_has_wall_time(tmp_path):
    path = tmp_path / "timings.csv"
    write_timings_csv([make_row()], path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].endswith(",seed,wall_time_ms")
    assert lines[1].endswith(",0,1.5")


def test_aggregate_file_format(tmp_path):
    path = tmp_path / "agg.dat"
    agg = AggregateRow(
        algorithm="A-repeated",
        family="random",
        n=5,
        alpha=3.0,
        l_max=20.0,
        r_cluster=10.0,
        mean_slots=4.0,
        ci95=1.96,
        reps=2,
    )
    write_aggregates([agg], path)
    text = path.read_text(encoding="utf-8")
    assert text == (
        "# algorithm family n alpha l_max r_cluster mean_slots ci95 reps\n"
        "A-repeated random 5 3 20 10 4 1.96 2\n"
    )


def test_results_csv_rerun_identical(tmp_path):
    cfg = small_config(algorithms=("A-repeated",))
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    rows, _ = run_experiment(cfg)
    write_results_csv(rows, first)
    rows2, _ = run_experiment(cfg)
    write_results_csv(rows2, second)
    assert first.read_bytes() == second.read_bytes()
