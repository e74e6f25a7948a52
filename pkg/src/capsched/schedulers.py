"""Link scheduling algorithms on top of the affectance machinery.

The module provides the greedy single-shot selector and its guarded variant,
repeated application for full schedules, two schedule refinement passes
(signal strengthening and spatial dispersion), non-uniform power handling,
and a first-fit baseline for comparisons.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    THRESHOLD_SLACK,
    HeuristicInfeasibilityError,
    Instance,
    Link,
    ModelParams,
    PreconditionError,
    Schedule,
    SchedulingError,
    Slot,
    UnsupportedConfigurationError,
    VerificationError,
    _require_uniform_power,
    affectance_matrix,
    distance,
    effective_power,
    is_feasible,
    noise_factor,
    p_signal_violation,
)

INTERFERENCE_CONSTANT = 72.0


@dataclass(frozen=True)
class AlgoConstants:
    """Deterministic constants driving the greedy selectors.

    C is the ring-summation interference constant (72 exactly); tau sets the
    admission threshold c = tau**-alpha of the analyzed selector; c_hat is
    the separation multiplier of the guarded heuristic; nu is the signal
    level at which the optimum is compared against the greedy output.
    """

    C: float
    tau: float
    c: float
    c_hat: float
    nu: float


def compute_constants(params: ModelParams) -> AlgoConstants:
    """Derive the selector constants from the model parameters.

    Raises:
        SchedulingError: if the derived threshold fails the internal
            consistency inequality (tau - 2)**alpha >= (C+1)*beta*(alpha-1)
            /(alpha-2) beyond float rounding. Cannot happen for valid
            parameters; kept as a guard on the formula rendering.
    """
    alpha, beta = params.alpha, params.beta
    ratio = (alpha - 1.0) / (alpha - 2.0)
    rhs = (INTERFERENCE_CONSTANT + 1.0) * beta * ratio
    tau = 2.0 + max(2.0, rhs ** (1.0 / alpha))
    # float round-trip of x**(1/alpha) back through **alpha can undershoot,
    # hence the relative tolerance
    if (tau - 2.0) ** alpha < rhs * (1.0 - 1e-9):
        raise SchedulingError(
            f"threshold consistency violated: (tau-2)^alpha = "
            f"{(tau - 2.0) ** alpha} < {rhs}"
        )
    c_hat = max(2.0, (288.0 * beta * ratio) ** (1.0 / alpha))
    return AlgoConstants(
        C=INTERFERENCE_CONSTANT,
        tau=tau,
        c=tau**-alpha,
        c_hat=c_hat,
        nu=2.0 * (1.5 * tau) ** alpha,
    )


@dataclass(frozen=True)
class PowerStrategy:
    """How to handle per-link transmission powers when scheduling.

    mode "uniform" requires equal powers and runs the plain machinery;
    "scaled-threshold" shrinks the admission threshold by P_min/P_max and
    admits on true non-uniform affectance; "power-regimes" buckets links
    whose powers agree up to regime_base and schedules buckets separately.
    """

    mode: str = "uniform"
    regime_base: float = 2.0

    def __post_init__(self) -> None:
        if self.mode not in ("uniform", "scaled-threshold", "power-regimes"):
            raise ValueError(f"unknown power strategy mode {self.mode!r}")
        if not (self.regime_base > 1.0):
            raise ValueError(f"regime_base must exceed 1, got {self.regime_base}")


def _length_order(links: Sequence[Link]) -> list[int]:
    """Indices into ``links`` in non-decreasing length order, ties by id."""
    return sorted(range(len(links)), key=lambda i: (links[i].length, links[i].id))


def single_shot_greedy(
    instance: Instance, constants: AlgoConstants | None = None
) -> Slot:
    """One-sweep greedy selection of a feasible set, shortest links first.

    A link is admitted when the accumulated affectance on it from previously
    admitted links is at most the threshold c. The output is SINR-feasible
    and (tau - 2)-dispersed; for every rejected link the admitted shorter
    links already affect it by more than c.

    Raises:
        UnsupportedConfigurationError: on non-uniform power. Route such
            instances through schedule_nonuniform instead.
    """
    _require_uniform_power(instance.links, instance.params)
    if not instance.links:
        return Slot()
    if constants is None:
        constants = compute_constants(instance.params)
    mat = affectance_matrix(instance)
    acc = np.zeros(len(instance.links))
    chosen: list[int] = []
    for i in _length_order(instance.links):
        if acc[i] <= constants.c + THRESHOLD_SLACK:
            chosen.append(instance.links[i].id)
            acc += mat[i]
    return Slot(frozenset(chosen))


def single_shot_guarded(
    instance: Instance,
    constants: AlgoConstants | None = None,
    separation_rule: str = "symmetric",
) -> Slot:
    """Guarded greedy heuristic: affectance cap 2/3 plus a separation test.

    Links are swept in non-decreasing length order and admitted when the
    accumulated affectance is at most 2/3 and each admitted link keeps a
    sender-to-receiver distance above c_hat times the candidate's length.
    The heuristic carries no feasibility proof, so the output is always
    re-verified and an error is raised instead of silently trimming.

    Args:
        instance: uniform-power instance to select from.
        constants: precomputed AlgoConstants; derived from the instance
            parameters when omitted.
        separation_rule: "symmetric" requires both cross distances
            min(d(s_w, r_v), d(s_v, r_w)) to exceed c_hat * len(v);
            "literal" admits when len(v) > c_hat * d(s_v, r_w), kept only
            for comparison runs.

    Raises:
        HeuristicInfeasibilityError: if the selected set fails verification.
        UnsupportedConfigurationError: on non-uniform power.
        ValueError: on an unknown separation_rule.
    """
    if separation_rule not in ("symmetric", "literal"):
        raise ValueError(f"unknown separation rule {separation_rule!r}")
    _require_uniform_power(instance.links, instance.params)
    if not instance.links:
        return Slot()
    if constants is None:
        constants = compute_constants(instance.params)
    params = instance.params
    mat = affectance_matrix(instance)
    acc = np.zeros(len(instance.links))
    chosen: list[int] = []

    def separated(v: Link, w: Link) -> bool:
        if separation_rule == "literal":
            return v.length > constants.c_hat * distance(v.sender, w.receiver)
        gap = min(distance(w.sender, v.receiver), distance(v.sender, w.receiver))
        return gap > constants.c_hat * v.length

    for i in _length_order(instance.links):
        v = instance.links[i]
        if acc[i] <= 2.0 / 3.0 + THRESHOLD_SLACK and all(
            separated(v, instance.links[j]) for j in chosen
        ):
            chosen.append(i)
            acc += mat[i]
    members = [instance.links[i].id for i in chosen]
    report = is_feasible([instance.links[i] for i in chosen], params)
    if not report.feasible:
        raise HeuristicInfeasibilityError(
            f"guarded selection is not SINR-feasible (worst link "
            f"{report.worst_link}, margin {report.margin:.3e})",
            link_id=report.worst_link,
        )
    return Slot(frozenset(members))


def schedule_repeated(
    instance: Instance,
    single_shot: Callable[[Instance], Slot] = single_shot_greedy,
) -> Schedule:
    """Partition all links by repeatedly running a single-shot selector.

    Each round runs ``single_shot`` on the still-unscheduled links and fixes
    its output as the next slot. Terminates because a singleton always
    passes the admission test.
    """
    remaining = list(instance.links)
    slots: list[Slot] = []
    while remaining:
        sub = Instance(params=instance.params, links=tuple(remaining))
        slot = single_shot(sub)
        if not slot.members:
            raise SchedulingError(
                "single-shot selector returned an empty slot on a nonempty "
                "instance"
            )
        slots.append(slot)
        remaining = [l for l in remaining if l.id not in slot.members]
    return Schedule(tuple(slots))


def _first_fit_partition(
    order: Sequence[int],
    mat: np.ndarray,
    threshold: float,
) -> list[list[int]]:
    """First-fit links (given as indices in admission order) into sets.

    A link joins the first set whose accumulated affectance on it is at most
    ``threshold``; mat[i] must give the affectance of link i on every link.
    """
    sets: list[list[int]] = []
    accs: list[np.ndarray] = []
    for i in order:
        for members, acc in zip(sets, accs):
            if acc[i] <= threshold + THRESHOLD_SLACK:
                members.append(i)
                acc += mat[i]
                break
        else:
            sets.append([i])
            accs.append(mat[i].copy())
    return sets


def strengthen_slot(
    instance: Instance, slot: Slot, p_prime: float
) -> tuple[Slot, ...]:
    """Split one slot into sets whose affectance stays at or below 1/p_prime.

    Two first-fit passes with per-set admission threshold 1/(2*p_prime): the
    first over links in decreasing length order, the second re-partitioning
    each resulting set in increasing length order. Affectance on every link
    of an output set is then at most 1/(2p') from longer links (pass one)
    plus 1/(2p') from shorter ones (pass two).
    """
    links = instance.resolve(slot)
    if len(links) <= 1:
        return (slot,) if links else ()
    sub = Instance(params=instance.params, links=links)
    mat = affectance_matrix(sub)
    threshold = 1.0 / (2.0 * p_prime)
    decreasing = sorted(
        range(len(links)), key=lambda i: (-links[i].length, links[i].id)
    )
    out: list[Slot] = []
    for first_pass_set in _first_fit_partition(decreasing, mat, threshold):
        increasing = sorted(first_pass_set, key=lambda i: (links[i].length, links[i].id))
        for final_set in _first_fit_partition(increasing, mat, threshold):
            out.append(Slot(frozenset(links[i].id for i in final_set)))
    return tuple(out)


def strengthen(
    instance: Instance, schedule: Schedule, p: float, p_prime: float
) -> Schedule:
    """Refine a p-signal schedule into a p_prime-signal schedule.

    The slot count grows by a factor of at most ceil(2*p_prime/p)**2.

    Raises:
        PreconditionError: if the input schedule is not p-signal, naming the
            violating link, or if p_prime <= p.
    """
    if not (p > 0) or not (p_prime > p):
        raise PreconditionError(
            f"signal levels must satisfy 0 < p < p_prime, got p={p}, "
            f"p_prime={p_prime}"
        )
    violation = p_signal_violation(instance, schedule, p)
    if violation is not None:
        slot_idx, link_id, value = violation
        raise PreconditionError(
            f"input schedule is not a {p}-signal schedule: link {link_id} in "
            f"slot {slot_idx} has affectance {value:.6e} > 1/p = {1.0 / p:.6e}"
        )
    out: list[Slot] = []
    for slot in schedule.slots:
        out.extend(strengthen_slot(instance, slot, p_prime))
    return Schedule(tuple(out))


def disperse_slot(instance: Instance, slot: Slot, q: float) -> tuple[Slot, ...]:
    """Split one feasible slot into q-dispersed sets.

    Links are processed in increasing length order and first-fit into the
    first set where the candidate's receiver lies at distance at least
    (q * c_v**(1/alpha) + 2) * len(v) from every sender and receiver already
    in the set. Output sets are q-dispersed, and remain feasible because
    affectance only shrinks on subsets.
    """
    params = instance.params
    links = instance.resolve(slot)
    if len(links) <= 1:
        return (slot,) if links else ()
    ordered = sorted(links, key=lambda l: (l.length, l.id))
    sets: list[list[Link]] = []
    for v in ordered:
        bound = (q * noise_factor(v, params) ** (1.0 / params.alpha) + 2.0) * v.length
        for members in sets:
            if all(
                distance(w.sender, v.receiver) >= bound
                and distance(w.receiver, v.receiver) >= bound
                for w in members
            ):
                members.append(v)
                break
        else:
            sets.append([v])
    return tuple(Slot(frozenset(l.id for l in s)) for s in sets)


def disperse(instance: Instance, schedule: Schedule, q: float) -> Schedule:
    """Refine a feasible uniform-power schedule into a q-dispersed one.

    Per-slot blow-up is at most ceil((q+2)**alpha); the underlying counting
    argument even gives ceil((q+2)**alpha / beta). Feasibility of every
    output slot is preserved.

    Raises:
        PreconditionError: if q is not positive or some input slot is not
            SINR-feasible.
        UnsupportedConfigurationError: on non-uniform power.
    """
    if not (q > 0):
        raise PreconditionError(f"dispersion level must be positive, got {q}")
    _require_uniform_power(instance.links, instance.params)
    for idx, slot in enumerate(schedule.slots):
        report = is_feasible(instance.resolve(slot), instance.params)
        if not report.feasible:
            raise PreconditionError(
                f"input slot {idx} is not SINR-feasible (worst link "
                f"{report.worst_link})"
            )
    out: list[Slot] = []
    for slot in schedule.slots:
        out.extend(disperse_slot(instance, slot, q))
    return Schedule(tuple(out))


def _verified(instance: Instance, schedule: Schedule) -> Schedule:
    for idx, slot in enumerate(schedule.slots):
        report = is_feasible(instance.resolve(slot), instance.params)
        if not report.feasible:
            raise VerificationError(
                f"slot {idx} fails SINR verification under true powers "
                f"(worst link {report.worst_link}, margin {report.margin:.3e})",
                link_id=report.worst_link,
                slot_index=idx,
            )
    return schedule


def _schedule_scaled_threshold(instance: Instance) -> Schedule:
    constants = compute_constants(instance.params)
    powers = [effective_power(l, instance.params) for l in instance.links]
    scaled_c = constants.c * min(powers) / max(powers)
    remaining = list(instance.links)
    slots: list[Slot] = []
    while remaining:
        sub = Instance(params=instance.params, links=tuple(remaining))
        mat = affectance_matrix(sub)
        acc = np.zeros(len(sub.links))
        chosen: list[int] = []
        for i in _length_order(sub.links):
            if acc[i] <= scaled_c + THRESHOLD_SLACK:
                chosen.append(i)
                acc += mat[i]
        if not chosen:
            raise SchedulingError("scaled-threshold selection stalled")
        slots.append(Slot(frozenset(sub.links[i].id for i in chosen)))
        ids = {sub.links[i].id for i in chosen}
        remaining = [l for l in remaining if l.id not in ids]
    return Schedule(tuple(slots))


def _schedule_power_regimes(instance: Instance, base: float) -> Schedule:
    powers = {l.id: effective_power(l, instance.params) for l in instance.links}
    p_min = min(powers.values())
    buckets: dict[int, list[Link]] = {}
    for link in instance.links:
        # epsilon keeps exact powers of the base in their own bucket
        k = math.floor(math.log(powers[link.id] / p_min) / math.log(base) + 1e-12)
        buckets.setdefault(k, []).append(link)
    slots: list[Slot] = []
    for k in sorted(buckets):
        bucket = buckets[k]
        worst_case = min(powers[l.id] for l in bucket)
        uniform = tuple(dataclasses.replace(l, power=worst_case) for l in bucket)
        sub = Instance(params=instance.params, links=uniform)
        slots.extend(schedule_repeated(sub).slots)
    return Schedule(tuple(slots))


def schedule_nonuniform(instance: Instance, strategy: PowerStrategy) -> Schedule:
    """Schedule an instance whose links may transmit at different powers.

    See PowerStrategy for the available modes. Whatever the mode, the
    returned schedule is verified slot by slot under the true link powers.

    Raises:
        VerificationError: if any produced slot fails that final check.
        UnsupportedConfigurationError: in uniform mode on non-uniform input.
    """
    if not instance.links:
        return Schedule(())
    if strategy.mode == "uniform":
        schedule = schedule_repeated(instance)
    elif strategy.mode == "scaled-threshold":
        schedule = _schedule_scaled_threshold(instance)
    else:
        schedule = _schedule_power_regimes(instance, strategy.regime_base)
    return _verified(instance, schedule)


def first_fit_baseline(instance: Instance) -> Schedule:
    """First-fit scheduling in input order, for baseline comparisons.

    Each link lands in the first existing slot that stays SINR-feasible
    after the addition, else it opens a new slot.
    """
    if not instance.links:
        return Schedule(())
    params = instance.params
    mat = affectance_matrix(instance)
    inv_beta = 1.0 / params.beta
    sets: list[list[int]] = []
    accs: list[np.ndarray] = []
    for i, link in enumerate(instance.links):
        placed = False
        for members, acc in zip(sets, accs):
            if acc[i] > inv_beta + THRESHOLD_SLACK:
                continue
            if all(acc[j] + mat[i, j] <= inv_beta + THRESHOLD_SLACK for j in members):
                members.append(i)
                acc += mat[i]
                placed = True
                break
        if not placed:
            sets.append([i])
            accs.append(mat[i].copy())
    return Schedule(
        tuple(Slot(frozenset(instance.links[i].id for i in s)) for s in sets)
    )
