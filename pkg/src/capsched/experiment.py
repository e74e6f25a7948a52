"""Seeded experiment sweeps: run algorithms over topology families, verify
every schedule, and emit CSV rows plus per-point aggregates.

The main results table is fully deterministic for a given config. Wall times
are measured and kept on the rows, but written only to an opt-in sidecar
file so reruns stay byte-identical.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import math
import os
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import (
    Instance,
    ModelParams,
    Schedule,
    SchedulingError,
    VerificationError,
    is_feasible,
    partition_report,
)
from .schedulers import (
    first_fit_baseline,
    schedule_repeated,
    single_shot_greedy,
    single_shot_guarded,
)
from .topogen import DEFAULT_MODEL_PARAMS, TopologySpec, generate

SWEEPABLE = ("n", "alpha", "r_cluster", "l_max")

ALGORITHMS: dict[str, Callable[[Instance], Schedule]] = {
    "A-repeated": lambda inst: schedule_repeated(inst, single_shot_greedy),
    "B-repeated": lambda inst: schedule_repeated(inst, single_shot_guarded),
    "first-fit-baseline": first_fit_baseline,
}


class ExperimentVerificationError(VerificationError):
    """A produced schedule failed verification; carries the offending pair."""

    def __init__(self, message: str, instance: Instance, schedule: Schedule | None):
        super().__init__(message)
        self.instance = instance
        self.schedule = schedule

    def __reduce__(self):
        # default exception reduction drops the keyword state; needed so the
        # error survives the trip back from a worker process
        return (type(self), (self.args[0], self.instance, self.schedule))


@dataclass(frozen=True)
class ExperimentConfig:
    """A full sweep description.

    The topology field is a template: its seed is ignored and replaced by
    base_seed + repetition index, so all algorithms and sweep points see
    the same instance stream per repetition.
    """

    topology: TopologySpec
    params: ModelParams = DEFAULT_MODEL_PARAMS
    sweep: tuple[tuple[str, tuple[float, ...]], ...] = ()
    algorithms: tuple[str, ...] = ("A-repeated",)
    repetitions: int = 1
    base_seed: int = 0
    output: str | None = None
    timings: str | None = None

    def __post_init__(self) -> None:
        for name, values in self.sweep:
            if name not in SWEEPABLE:
                raise ValueError(
                    f"cannot sweep {name!r}; supported: {', '.join(SWEEPABLE)}"
                )
            if not values:
                raise ValueError(f"sweep over {name!r} has no values")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(
                    f"unknown algorithm {algo!r}; supported: "
                    f"{', '.join(sorted(ALGORITHMS))}"
                )
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if not (0 <= self.base_seed < 2**64):
            raise ValueError(f"base_seed must fit in 64 bits, got {self.base_seed}")


@dataclass(frozen=True)
class ResultRow:
    """One verified algorithm run on one generated instance."""

    algorithm: str
    family: str
    n: int
    alpha: float
    beta: float
    l_max: float
    r_cluster: float
    seed: int
    slot_count: int
    wall_time_ms: float
    verified: bool


@dataclass(frozen=True)
class AggregateRow:
    """Mean slot count and normal-approximation 95% CI for one sweep cell."""

    algorithm: str
    family: str
    n: int
    alpha: float
    l_max: float
    r_cluster: float
    mean_slots: float
    ci95: float
    reps: int


def config_from_obj(obj: dict) -> ExperimentConfig:
    """Parse the JSON form of a config, rejecting unknown or misplaced keys."""
    known = {
        "topology",
        "params",
        "sweep",
        "algorithms",
        "repetitions",
        "base_seed",
        "output",
        "timings",
    }
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    topo_obj = dict(obj["topology"])
    if "seed" in topo_obj:
        raise ValueError(
            "topology template must not carry a seed; seeds come from "
            "base_seed + repetition"
        )
    topology = TopologySpec(seed=0, **topo_obj)
    params = DEFAULT_MODEL_PARAMS
    if "params" in obj:
        params_obj = dict(obj["params"])
        unknown = set(params_obj) - {"alpha", "beta", "noise", "default_power"}
        if unknown:
            raise ValueError(f"unknown params keys: {sorted(unknown)}")
        params = dataclasses.replace(DEFAULT_MODEL_PARAMS, **params_obj)
    raw_sweep = obj.get("sweep", [])
    pairs = raw_sweep.items() if isinstance(raw_sweep, dict) else raw_sweep
    sweep = tuple((name, tuple(values)) for name, values in pairs)
    return ExperimentConfig(
        topology=topology,
        params=params,
        sweep=sweep,
        algorithms=tuple(obj.get("algorithms", ("A-repeated",))),
        repetitions=obj.get("repetitions", 1),
        base_seed=obj.get("base_seed", 0),
        output=obj.get("output"),
        timings=obj.get("timings"),
    )


def load_experiment_config(path: str | os.PathLike) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_obj(json.load(fh))


def sweep_points(config: ExperimentConfig) -> list[dict[str, float]]:
    """Cross product of the swept values, in the order they were listed."""
    points: list[dict[str, float]] = [{}]
    for name, values in config.sweep:
        points = [dict(p, **{name: v}) for p in points for v in values]
    return points


def _apply_point(
    config: ExperimentConfig, point: dict[str, float]
) -> tuple[TopologySpec, ModelParams]:
    spec, params = config.topology, config.params
    for name, value in point.items():
        if name == "alpha":
            params = dataclasses.replace(params, alpha=float(value))
        elif name == "n":
            spec = dataclasses.replace(spec, n=int(value))
        else:
            spec = dataclasses.replace(spec, **{name: float(value)})
    return spec, params


def _row_sort_key(row: ResultRow):
    return (
        row.algorithm,
        row.family,
        row.n,
        row.alpha,
        row.l_max,
        row.r_cluster,
        row.seed,
    )


def _run_cell(spec: TopologySpec, params: ModelParams, algo: str) -> ResultRow:
    """Generate, schedule, and verify one experiment cell.

    Regenerates the instance from its seed so cells stay independent and
    picklable; generation is deterministic, so every algorithm at a given
    (sweep point, repetition) sees the same instance.
    """
    instance = generate(spec, params)
    start = time.perf_counter()
    try:
        schedule = ALGORITHMS[algo](instance)
    except SchedulingError as exc:
        raise ExperimentVerificationError(
            f"{algo} failed on seed {spec.seed}: {exc}",
            instance=instance,
            schedule=None,
        ) from exc
    elapsed_ms = (time.perf_counter() - start) * 1e3
    report = partition_report(instance, schedule)
    bad_slot = None
    if report.is_partition:
        for idx, slot in enumerate(schedule.slots):
            if not is_feasible(instance.resolve(slot), params).feasible:
                bad_slot = idx
                break
    if not report.is_partition or bad_slot is not None:
        detail = (
            f"slot {bad_slot} infeasible"
            if bad_slot is not None
            else f"not a partition: {report}"
        )
        raise ExperimentVerificationError(
            f"{algo} on seed {spec.seed}: {detail}",
            instance=instance,
            schedule=schedule,
        )
    return ResultRow(
        algorithm=algo,
        family=spec.family,
        n=spec.n,
        alpha=params.alpha,
        beta=params.beta,
        l_max=spec.l_max,
        r_cluster=spec.r_cluster,
        seed=spec.seed,
        slot_count=schedule.slot_count,
        wall_time_ms=elapsed_ms,
        verified=True,
    )


def run_experiment(
    config: ExperimentConfig, workers: int = 1
) -> tuple[list[ResultRow], list[AggregateRow]]:
    """Run every (sweep point x repetition x algorithm) cell and verify it.

    Cells are independent; with workers > 1 they run in a process pool.
    Rows come back canonically sorted either way, so the output does not
    depend on execution order.

    Raises:
        ExperimentVerificationError: on a schedule that fails verification,
            carrying the instance and schedule for dumping.
    """
    cells: list[tuple[TopologySpec, ModelParams, str]] = []
    for point in sweep_points(config):
        spec, params = _apply_point(config, point)
        for rep in range(config.repetitions):
            seeded = dataclasses.replace(spec, seed=config.base_seed + rep)
            for algo in config.algorithms:
                cells.append((seeded, params, algo))
    if workers > 1 and len(cells) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, *zip(*cells), chunksize=4))
    else:
        rows = [_run_cell(*cell) for cell in cells]
    rows.sort(key=_row_sort_key)
    return rows, aggregate_rows(rows)


def aggregate_rows(rows: Sequence[ResultRow]) -> list[AggregateRow]:
    """Group rows by sweep cell and compute mean slot count and 95% CI."""
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        key = (row.algorithm, row.family, row.n, row.alpha, row.l_max, row.r_cluster)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups):
        members = groups[key]
        counts = [r.slot_count for r in members]
        mean = sum(counts) / len(counts)
        if len(counts) > 1:
            ci = 1.96 * statistics.stdev(counts) / math.sqrt(len(counts))
        else:
            ci = 0.0
        out.append(AggregateRow(*key, mean_slots=mean, ci95=ci, reps=len(counts)))
    return out


# --- writers -------------------------------------------------------------------


def _csv_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


RESULT_COLUMNS = (
    "algorithm",
    "family",
    "n",
    "alpha",
    "beta",
    "l_max",
    "r_cluster",
    "seed",
    "slot_count",
    "verified",
)

TIMING_COLUMNS = RESULT_COLUMNS[:-2] + ("wall_time_ms",)


def write_results_csv(rows: Sequence[ResultRow], path: str | os.PathLike) -> None:
    """Deterministic results table (wall time deliberately excluded)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for row in rows:
            fh.write(
                ",".join(_csv_value(getattr(row, col)) for col in RESULT_COLUMNS) + "\n"
            )


def write_timings_csv(rows: Sequence[ResultRow], path: str | os.PathLike) -> None:
    """Wall-time sidecar; inherently non-deterministic across runs."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(TIMING_COLUMNS) + "\n")
        for row in rows:
            fh.write(
                ",".join(_csv_value(getattr(row, col)) for col in TIMING_COLUMNS) + "\n"
            )


def write_aggregates(rows: Sequence[AggregateRow], path: str | os.PathLike) -> None:
    """Plot-ready aggregate table (gnuplot-style commented header)."""
    columns = (
        "algorithm",
        "family",
        "n",
        "alpha",
        "l_max",
        "r_cluster",
        "mean_slots",
        "ci95",
        "reps",
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for row in rows:
            fh.write(" ".join(_csv_value(getattr(row, col)) for col in columns) + "\n")
