"""Command-line interface.

Subcommands: gen, schedule, verify, refine, experiment, oracle, reduce-graph.

Exit codes are a fixed contract: 0 success, 1 verification failure,
2 input error, 3 size limit exceeded.

Every schedule-producing command re-verifies its output through the direct
SINR route before writing it and exiting 0. All outputs are deterministic
for fixed inputs; wall times are only written when a config opts in.
"""

from __future__ import annotations

import argparse
import dataclasses
import functools
import json
import math
import os
import sys

from .abstract import (
    correspondence_check,
    graph_to_instance,
    load_graph,
    save_gain_matrix,
)
from .core import (
    Instance,
    ModelParams,
    PreconditionError,
    Schedule,
    SchedulingError,
    SizeLimitError,
    THRESHOLD_SLACK,
    VerificationError,
    affectance,
    is_feasible,
    is_p_signal,
    is_q_dispersed,
    partition_report,
)
from .experiment import (
    ExperimentVerificationError,
    load_experiment_config,
    run_experiment,
    write_aggregates,
    write_results_csv,
    write_timings_csv,
)
from .io import load_instance, load_schedule, save_instance, save_schedule, write_canonical
from .oracles import max_feasible_subset, max_p_signal_subset, min_schedule
from .schedulers import (
    PowerStrategy,
    disperse,
    disperse_slot,
    first_fit_baseline,
    schedule_nonuniform,
    schedule_repeated,
    single_shot_greedy,
    single_shot_guarded,
    strengthen,
)
from .topogen import DEFAULT_MODEL_PARAMS, TopologySpec, generate


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _add_model_flags(sub: argparse.ArgumentParser, with_defaults: bool) -> None:
    """Model parameter flags; None defaults mean "keep the file's values"."""
    d = DEFAULT_MODEL_PARAMS
    sub.add_argument("--alpha", type=float, default=d.alpha if with_defaults else None)
    sub.add_argument("--beta", type=float, default=d.beta if with_defaults else None)
    sub.add_argument("--noise", type=float, default=d.noise if with_defaults else None)
    sub.add_argument(
        "--power", type=float, default=d.default_power if with_defaults else None
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capsched",
        description="Generate, schedule, verify, refine, and benchmark "
        "SINR link-scheduling instances.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate an instance file")
    gen.add_argument("--family", choices=("random", "clustered"), required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--field", type=float, default=1000.0, help="square field side")
    gen.add_argument("--lmax", type=float, default=20.0, help="maximum link length")
    gen.add_argument("--clusters", type=int, default=None, help="cluster count (default n/10)")
    gen.add_argument("--rc", type=float, default=10.0, help="cluster radius")
    gen.add_argument("--out", default="instance.json")
    _add_model_flags(gen, with_defaults=True)
    gen.set_defaults(func=cmd_gen)

    sched = subs.add_parser("schedule", help="schedule an instance file")
    sched.add_argument("instance")
    sched.add_argument("--algo", choices=("A", "B", "firstfit"), default="A")
    sched.add_argument("--out", default="schedule.json")
    _add_model_flags(sched, with_defaults=False)
    sched.add_argument(
        "--power-mode",
        choices=("uniform", "scaled-threshold", "power-regimes"),
        default=None,
        help="strategy for non-uniform power with --algo A",
    )
    sched.add_argument("--regime-base", type=float, default=2.0)
    sched.add_argument(
        "--b-rule",
        choices=("symmetric", "literal"),
        default="symmetric",
        help="separation rule used by algorithm B",
    )
    sched.set_defaults(func=cmd_schedule)

    ver = subs.add_parser("verify", help="verify a schedule against an instance")
    ver.add_argument("instance")
    ver.add_argument("schedule")
    ver.add_argument("--p", type=float, default=None, help="also require a p-signal schedule")
    ver.add_argument("--q", type=float, default=None, help="also require q-dispersed slots")
    ver.add_argument(
        "--theta",
        type=float,
        default=None,
        help="re-verify with every affectance scaled up by this factor",
    )
    ver.set_defaults(func=cmd_verify)

    ref = subs.add_parser("refine", help="strengthen or disperse a schedule")
    ref.add_argument("instance")
    ref.add_argument("schedule")
    group = ref.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--strengthen", nargs=2, type=float, metavar=("P", "PPRIME"), default=None
    )
    group.add_argument("--disperse", type=float, metavar="Q", default=None)
    ref.add_argument("--out", default="refined.json")
    ref.set_defaults(func=cmd_refine)

    exp = subs.add_parser("experiment", help="run a configured sweep")
    exp.add_argument("--config", required=True)
    exp.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="process count for concurrent cells (results are order-independent)",
    )
    exp.set_defaults(func=cmd_experiment)

    orc = subs.add_parser("oracle", help="run an exact small-instance oracle")
    orc.add_argument("instance")
    orc.add_argument("--mode", choices=("subset", "psignal", "schedule"), required=True)
    orc.add_argument("--p", type=float, default=None)
    orc.add_argument("--out", default="oracle.json")
    orc.set_defaults(func=cmd_oracle)

    red = subs.add_parser(
        "reduce-graph", help="reduce an edge-list graph to a gain matrix"
    )
    red.add_argument("graph")
    red.add_argument("--out", default="gains.json")
    red.add_argument(
        "--check",
        action="store_true",
        help="verify feasible-subset / independent-set correspondence",
    )
    red.set_defaults(func=cmd_reduce_graph)

    return parser


# --- subcommand implementations --------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    spec = TopologySpec(
        family=args.family,
        n=args.n,
        seed=args.seed,
        field_size=args.field,
        l_max=args.lmax,
        n_clusters=args.clusters,
        r_cluster=args.rc,
    )
    params = ModelParams(
        alpha=args.alpha, beta=args.beta, noise=args.noise, default_power=args.power
    )
    instance = generate(spec, params)
    save_instance(instance, args.out)
    print(f"generated family={spec.family} n={len(instance)} seed={spec.seed} -> {args.out}")
    return 0


def _apply_overrides(instance: Instance, args: argparse.Namespace) -> Instance:
    fields = {
        "alpha": args.alpha,
        "beta": args.beta,
        "noise": args.noise,
        "default_power": args.power,
    }
    overrides = {k: v for k, v in fields.items() if v is not None}
    if not overrides:
        return instance
    params = dataclasses.replace(instance.params, **overrides)
    return Instance(params=params, links=instance.links)


def _check_emitted(instance: Instance, schedule: Schedule) -> None:
    """Independent verification gate for every schedule the CLI writes."""
    report = partition_report(instance, schedule)
    if not report.is_partition:
        raise VerificationError(
            f"schedule is not a partition: missing={report.missing} "
            f"duplicated={report.duplicated} dangling={report.dangling}"
        )
    for idx, slot in enumerate(schedule.slots):
        fr = is_feasible(instance.resolve(slot), instance.params)
        if not (fr.feasible and fr.sinr_feasible):
            raise VerificationError(
                f"slot {idx} failed verification (worst link {fr.worst_link}, "
                f"margin {_fmt(fr.margin)})",
                link_id=fr.worst_link,
                slot_index=idx,
            )


def cmd_schedule(args: argparse.Namespace) -> int:
    instance = _apply_overrides(load_instance(args.instance), args)
    if args.algo == "A":
        if instance.has_uniform_power and args.power_mode in (None, "uniform"):
            schedule = schedule_repeated(instance, single_shot_greedy)
        else:
            mode = args.power_mode or "power-regimes"
            strategy = PowerStrategy(mode=mode, regime_base=args.regime_base)
            schedule = schedule_nonuniform(instance, strategy)
    elif args.algo == "B":
        shot = functools.partial(single_shot_guarded, separation_rule=args.b_rule)
        schedule = schedule_repeated(instance, shot)
    else:
        schedule = first_fit_baseline(instance)
    _check_emitted(instance, schedule)
    save_schedule(schedule, args.out)
    print(
        f"schedule: algo={args.algo} links={len(instance)} "
        f"slots={schedule.slot_count} verified=true -> {args.out}"
    )
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    schedule = load_schedule(args.schedule)
    report = partition_report(instance, schedule)
    if report.dangling:
        raise ValueError(f"schedule references unknown link ids: {list(report.dangling)}")
    ok = True
    if not report.is_partition:
        ok = False
        print(
            f"partition: FAIL missing={list(report.missing)} "
            f"duplicated={list(report.duplicated)}"
        )
    else:
        print("partition: ok")
    inv_beta = 1.0 / instance.params.beta
    for idx, slot in enumerate(schedule.slots):
        links = instance.resolve(slot)
        fr = is_feasible(links, instance.params)
        slot_ok = fr.feasible and fr.sinr_feasible
        line = (
            f"slot {idx}: size={len(links)} margin={_fmt(fr.margin)} "
            f"sinr_margin={_fmt(fr.sinr_margin)}"
        )
        if args.theta is not None:
            if not args.theta > 0:
                raise ValueError(f"--theta must be positive, got {args.theta}")
            worst = max(
                (affectance(links, v, instance.params) for v in links), default=0.0
            )
            theta_ok = args.theta * worst <= inv_beta + THRESHOLD_SLACK
            slot_ok = slot_ok and theta_ok
            line += f" theta_margin={_fmt(inv_beta - args.theta * worst)}"
        if not slot_ok:
            line += " FAIL"
            ok = False
        print(line)
    if args.p is not None:
        p_ok = is_p_signal(instance, schedule, args.p)
        print(f"p-signal(p={_fmt(args.p)}): {'ok' if p_ok else 'FAIL'}")
        ok = ok and p_ok
    if args.q is not None:
        q_ok = all(
            is_q_dispersed(instance.resolve(slot), args.q, instance.params)
            for slot in schedule.slots
        )
        print(f"dispersed(q={_fmt(args.q)}): {'ok' if q_ok else 'FAIL'}")
        ok = ok and q_ok
    print(f"verified={'true' if ok else 'false'}")
    return 0 if ok else 1


def cmd_refine(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    schedule = load_schedule(args.schedule)
    if args.strengthen is not None:
        p, p_prime = args.strengthen
        refined = strengthen(instance, schedule, p, p_prime)
        bound = math.ceil(2.0 * p_prime / p) ** 2
        observed = refined.slot_count / max(schedule.slot_count, 1)
        print(
            f"strengthen: slots {schedule.slot_count} -> {refined.slot_count}, "
            f"blow-up {_fmt(observed)}, bound {bound}"
        )
    else:
        q = args.disperse
        refined = disperse(instance, schedule, q)
        alpha = instance.params.alpha
        stated = math.ceil((q + 2.0) ** alpha)
        counting = math.ceil((q + 2.0) ** alpha / instance.params.beta)
        growth = max(
            (len(disperse_slot(instance, slot, q)) for slot in schedule.slots),
            default=0,
        )
        print(
            f"disperse: slots {schedule.slot_count} -> {refined.slot_count}, "
            f"worst per-slot growth {growth}, stated bound {stated}, "
            f"counting bound {counting}"
        )
    _check_emitted(instance, refined)
    save_schedule(refined, args.out)
    print(f"refined schedule -> {args.out}")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    out = config.output or "results.csv"
    try:
        rows, aggregates = run_experiment(config, workers=max(args.workers, 1))
    except ExperimentVerificationError as exc:
        directory = os.path.dirname(out) or "."
        inst_path = os.path.join(directory, "failed_instance.json")
        save_instance(exc.instance, inst_path)
        dumped = [inst_path]
        if exc.schedule is not None:
            sched_path = os.path.join(directory, "failed_schedule.json")
            save_schedule(exc.schedule, sched_path)
            dumped.append(sched_path)
        print(f"error: {exc} (dumped {', '.join(dumped)})", file=sys.stderr)
        return 1
    write_results_csv(rows, out)
    base, _ = os.path.splitext(out)
    agg_path = base + "_aggregate.dat"
    write_aggregates(aggregates, agg_path)
    print(f"wrote {len(rows)} rows -> {out}")
    print(f"wrote {len(aggregates)} aggregate rows -> {agg_path}")
    if config.timings:
        write_timings_csv(rows, config.timings)
        print(f"wrote timings -> {config.timings}")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    if args.mode == "psignal":
        if args.p is None:
            raise ValueError("--mode psignal requires --p")
        slot = max_p_signal_subset(instance, args.p)
        obj = {"mode": "psignal", "p": args.p, "size": len(slot), "members": list(slot.sorted_members)}
        summary = f"oracle psignal: size={len(slot)}"
    elif args.mode == "subset":
        if args.p is not None:
            raise ValueError("--p only applies to --mode psignal")
        slot = max_feasible_subset(instance)
        obj = {"mode": "subset", "size": len(slot), "members": list(slot.sorted_members)}
        summary = f"oracle subset: size={len(slot)}"
    else:
        if args.p is not None:
            raise ValueError("--p only applies to --mode psignal")
        schedule = min_schedule(instance)
        obj = {
            "mode": "schedule",
            "slot_count": schedule.slot_count,
            "slots": [list(s.sorted_members) for s in schedule.slots],
        }
        summary = f"oracle schedule: slots={schedule.slot_count}"
    write_canonical(args.out, obj)
    print(f"{summary} -> {args.out}")
    return 0


def cmd_reduce_graph(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    matrix = graph_to_instance(graph)
    if args.check:
        report = correspondence_check(graph)
        if not report.ok:
            print(
                f"correspondence: FAIL counterexample={sorted(report.counterexample)}",
                file=sys.stderr,
            )
            return 1
        print(f"correspondence: ok subsets={report.subsets_checked}")
    save_gain_matrix(matrix, args.out)
    print(f"gain matrix: n={matrix.n} -> {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (VerificationError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SchedulingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
