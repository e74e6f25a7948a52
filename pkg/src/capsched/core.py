"""Geometry, propagation model, and affectance calculus for SINR link scheduling.

This is the measurement layer the rest of the package trusts: points, links,
model parameters, received power under polynomial path loss, the affectance
of a set of transmitting links on a victim link, SINR feasibility of a slot,
signal-level (p-signal) and spatial-separation (q-dispersed) predicates.

Conventions used throughout:

- The interference a link ``w`` inflicts on a link ``v`` is always measured
  from w's sender to v's receiver, d(s_w, r_v).
- Equal-length links are allowed; whenever an ordering by length is needed,
  ties are broken by link id.
- Threshold comparisons use ``<=`` with an absolute slack of 1e-12
  (``THRESHOLD_SLACK``); verifiers report margins so borderline cases are
  visible instead of silently flipping.

All types are immutable after construction and every function is pure, so
everything here is safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

# Absolute slack for feasibility-style threshold comparisons (a <= bound + slack).
THRESHOLD_SLACK = 1e-12


class SchedulingError(Exception):
    """Base class for all domain errors raised by this package."""


class SingularityError(SchedulingError):
    """A distance that must be positive is zero (coincident points)."""


class InfeasibleLinkError(SchedulingError):
    """A link cannot meet the SINR threshold even transmitting alone (P_vv <= beta*N)."""

    def __init__(self, link_id: int, message: str):
        super().__init__(message)
        self.link_id = link_id


class UnsupportedConfigurationError(SchedulingError):
    """The operation does not support this configuration (e.g. nonuniform power)."""


class PreconditionError(SchedulingError):
    """An input schedule does not satisfy the property the operation requires."""


class VerificationError(SchedulingError):
    """A produced schedule failed the independent feasibility verification."""

    def __init__(self, message: str, link_id: int | None = None, slot_index: int | None = None):
        super().__init__(message)
        self.link_id = link_id
        self.slot_index = slot_index


class HeuristicInfeasibilityError(VerificationError):
    """The separation heuristic accepted a set that the verifier rejects."""


class SizeLimitError(SchedulingError):
    """Instance exceeds the configured limit for an exhaustive computation."""


@dataclass(frozen=True)
class Point:
    """A point in the Euclidean plane (abstract distance units)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Link:
    """A communication request from a sender to a receiver.

    ``power`` is the per-link transmission power; ``None`` means "use the
    instance-wide default".
    """

    id: int
    sender: Point
    receiver: Point
    power: float | None = None

    def __post_init__(self) -> None:
        if self.sender == self.receiver:
            raise SingularityError(f"link {self.id} has zero length (sender equals receiver)")
        if self.power is not None and not (self.power > 0 and math.isfinite(self.power)):
            raise ValueError(f"link {self.id}: power must be positive and finite")

    @property
    def length(self) -> float:
        return distance(self.sender, self.receiver)


@dataclass(frozen=True)
class ModelParams:
    """Physical-model parameters: path-loss exponent, SINR threshold, noise, default power."""

    alpha: float
    beta: float
    noise: float = 0.0
    default_power: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 2):
            raise ValueError(f"alpha must be finite and > 2, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")
        if not (math.isfinite(self.noise) and self.noise >= 0):
            raise ValueError(f"noise must be finite and >= 0, got {self.noise}")
        if not (math.isfinite(self.default_power) and self.default_power > 0):
            raise ValueError(f"default_power must be finite and > 0, got {self.default_power}")


@dataclass(frozen=True)
class Slot:
    """A set of link ids scheduled to transmit concurrently."""

    members: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        for m in self.members:
            if not isinstance(m, int):
                raise ValueError(f"slot members must be integer link ids, got {m!r}")

    @property
    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Schedule:
    """An ordered list of slots; a full schedule partitions the instance's links."""

    slots: tuple[Slot, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(self.slots))

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    def all_ids(self) -> list[int]:
        """All scheduled ids, with multiplicity (a valid schedule has no repeats)."""
        out: list[int] = []
        for s in self.slots:
            out.extend(s.members)
        return out


@dataclass(frozen=True)
class Instance:
    """A scheduling instance: model parameters plus an ordered collection of links.

    Construction validates that ids are distinct and that every link clears the
    noise margin P_vv > beta*N; dead links are rejected here with
    InfeasibleLinkError rather than silently dropped later.

    ``metadata`` carries generator annotations (e.g. cluster assignment); it is
    not part of the canonical file format and does not affect equality.
    """

    params: ModelParams
    links: tuple[Link, ...]
    metadata: Mapping[str, object] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", tuple(self.links))
        seen: set[int] = set()
        for link in self.links:
            if link.id in seen:
                raise ValueError(f"duplicate link id {link.id}")
            seen.add(link.id)
        for link in self.links:
            noise_factor(link, self.params)  # raises InfeasibleLinkError on dead links

    @cached_property
    def by_id(self) -> dict[int, Link]:
        return {link.id: link for link in self.links}

    @cached_property
    def has_uniform_power(self) -> bool:
        powers = {effective_power(link, self.params) for link in self.links}
        return len(powers) <= 1

    def __len__(self) -> int:
        return len(self.links)

    def resolve(self, slot: Slot) -> tuple[Link, ...]:
        """Member links of ``slot`` in ascending id order.

        Raises KeyError on ids that do not belong to this instance.
        """
        return tuple(self.by_id[i] for i in slot.sorted_members)


def distance(p: Point, q: Point) -> float:
    """Euclidean distance between two points."""
    return math.hypot(p.x - q.x, p.y - q.y)


def effective_power(link: Link, params: ModelParams) -> float:
    """The transmission power of a link, falling back to the instance default."""
    return link.power if link.power is not None else params.default_power


def received_power(source_sender: Point, target_receiver: Point, power: float, params: ModelParams) -> float:
    """Received power under polynomial path loss: power / distance^alpha.

    Raises SingularityError when sender and receiver coincide.
    """
    d = distance(source_sender, target_receiver)
    if d == 0.0:
        raise SingularityError("received power undefined at distance 0")
    return power / d ** params.alpha


def noise_factor(link: Link, params: ModelParams) -> float:
    """Noise factor c_v = 1 / (1 - beta*N / P_vv) of a link.

    Equals 1 exactly in the absence of noise and grows as ambient noise eats
    into the link's SINR budget; for uniform power it is monotone nondecreasing
    in link length. Raises InfeasibleLinkError when P_vv <= beta*N (the link
    cannot meet the threshold even alone).
    """
    pvv = received_power(link.sender, link.receiver, effective_power(link, params), params)
    bn = params.beta * params.noise
    if pvv <= bn:
        raise InfeasibleLinkError(
            link.id,
            f"link {link.id} is infeasible even alone: received power {pvv:.6g} <= beta*noise {bn:.6g}",
        )
    return 1.0 / (1.0 - bn / pvv)


def relative_interference(w: Link, v: Link, params: ModelParams) -> float:
    """Interference from w's sender relative to v's own signal, at v's receiver.

    Ratio of the power received at r_v from s_w over the power received at r_v
    from s_v. Zero when w and v are the same link (self-interference is
    defined away). Raises SingularityError when s_w coincides with r_v.
    """
    if w.id == v.id:
        return 0.0
    num = received_power(w.sender, v.receiver, effective_power(w, params), params)
    den = received_power(v.sender, v.receiver, effective_power(v, params), params)
    return num / den


def single_affectance(w: Link, v: Link, params: ModelParams) -> float:
    """Affectance of a single link w on v: c_v * RI_w(v)."""
    return noise_factor(v, params) * relative_interference(w, v, params)


def affectance(members: Iterable[Link], v: Link, params: ModelParams) -> float:
    """Affectance of a set of links on v: c_v times the summed relative interference.

    The self term contributes 0, so the victim may be a member of the set.
    Summation follows the iteration order of ``members`` (resolve slots in id
    order for reproducible floats). Additive over disjoint sets.
    """
    cv = noise_factor(v, params)
    total = 0.0
    for w in members:
        total += relative_interference(w, v, params)
    return cv * total


def affectance_matrix(instance: Instance) -> np.ndarray:
    """Pairwise single-link affectances as an n x n array.

    Entry [i, j] is the affectance of links[i] on links[j] (indices follow
    instance.links order); the diagonal is zero. This is the vectorized
    acceleration used by schedulers and oracles; it agrees with
    single_affectance entrywise up to float rounding and is cross-checked in
    tests.
    """
    n = len(instance.links)
    if n == 0:
        return np.zeros((0, 0))
    params = instance.params
    sx = np.array([l.sender.x for l in instance.links])
    sy = np.array([l.sender.y for l in instance.links])
    rx = np.array([l.receiver.x for l in instance.links])
    ry = np.array([l.receiver.y for l in instance.links])
    powers = np.array([effective_power(l, params) for l in instance.links])

    dvv = np.hypot(sx - rx, sy - ry)
    # dist[i, j] = d(s_i, r_j)
    dist = np.hypot(sx[:, None] - rx[None, :], sy[:, None] - ry[None, :])
    off_diag = ~np.eye(n, dtype=bool)
    if np.any((dist == 0.0) & off_diag):
        i, j = np.argwhere((dist == 0.0) & off_diag)[0]
        raise SingularityError(
            f"sender of link {instance.links[i].id} coincides with receiver of link {instance.links[j].id}"
        )
    pvv = powers / dvv ** params.alpha
    cv = 1.0 / (1.0 - params.beta * params.noise / pvv)
    mat = cv[None, :] * (powers[:, None] / powers[None, :]) * (dvv[None, :] / dist) ** params.alpha
    np.fill_diagonal(mat, 0.0)
    mat.flags.writeable = False
    return mat


@dataclass(frozen=True)
class FeasibilityReport:
    """Verdict and diagnostics of a slot feasibility check.

    ``feasible`` is the affectance-criterion verdict (a_S(v) <= 1/beta, with
    slack); ``sinr_feasible`` is the independent direct-SINR-ratio verdict.
    ``margin`` = min over links of (1/beta - a_S(v)); ``sinr_margin`` = min
    over links of (SINR/beta - 1). ``worst_link`` attains the minimum
    affectance margin (smallest id on ties). Empty slots are feasible with
    infinite margins.
    """

    feasible: bool
    sinr_feasible: bool
    worst_link: int | None
    margin: float
    sinr_margin: float


def _sinr_ratio(members: Sequence[Link], v: Link, params: ModelParams) -> float:
    """Direct SINR of v against the other members: P_vv / (sum of P_vw + N)."""
    pvv = received_power(v.sender, v.receiver, effective_power(v, params), params)
    interference = 0.0
    for w in members:
        if w.id != v.id:
            interference += received_power(w.sender, v.receiver, effective_power(w, params), params)
    denom = interference + params.noise
    if denom == 0.0:
        return math.inf
    return pvv / denom


def is_feasible(members: Sequence[Link], params: ModelParams) -> FeasibilityReport:
    """Check a slot against the SINR condition, via two independent routes.

    Route one evaluates the SINR ratio directly for every member; route two
    checks the affectance criterion a_S(v) <= 1/beta. Both verdicts and both
    worst-case margins are reported; the headline ``feasible`` flag is the
    affectance verdict.
    """
    inv_beta = 1.0 / params.beta
    feasible = True
    sinr_feasible = True
    worst_link: int | None = None
    margin = math.inf
    sinr_margin = math.inf
    ordered = sorted(members, key=lambda l: l.id)
    for v in ordered:
        a = affectance(ordered, v, params)
        m = inv_beta - a
        if m < margin:
            margin = m
            worst_link = v.id
        if not a <= inv_beta + THRESHOLD_SLACK:
            feasible = False
        ratio = _sinr_ratio(ordered, v, params)
        sm = ratio / params.beta - 1.0 if math.isfinite(ratio) else math.inf
        sinr_margin = min(sinr_margin, sm)
        if not sm >= -THRESHOLD_SLACK:
            sinr_feasible = False
    return FeasibilityReport(feasible, sinr_feasible, worst_link, margin, sinr_margin)


def is_p_signal(instance: Instance, schedule: Schedule, p: float) -> bool:
    """True iff in every slot, every member's in-slot affectance is <= 1/p."""
    return p_signal_violation(instance, schedule, p) is None


def p_signal_violation(instance: Instance, schedule: Schedule, p: float) -> tuple[int, int, float] | None:
    """First (slot index, link id, affectance) exceeding the 1/p level, or None."""
    if not (p > 0):
        raise ValueError(f"p must be positive, got {p}")
    bound = 1.0 / p
    for idx, slot in enumerate(schedule.slots):
        links = instance.resolve(slot)
        for v in links:
            a = affectance(links, v, params=instance.params)
            if not a <= bound + THRESHOLD_SLACK:
                return (idx, v.id, a)
    return None


def _require_uniform_power(links: Sequence[Link], params: ModelParams) -> None:
    powers = {effective_power(l, params) for l in links}
    if len(powers) > 1:
        raise UnsupportedConfigurationError(
            "dispersion predicates require uniform power across the set"
        )


def is_q_near(w: Link, v: Link, q: float, params: ModelParams) -> bool:
    """True iff w sits too close to v for separation level q.

    Defined through the affectance duality: w is q-near v iff the single-link
    affectance a_w(v) exceeds q^-alpha, equivalently iff
    d(s_w, r_v) < q * c_v^(1/alpha) * d_vv. Requires uniform power.
    """
    if not (q > 0):
        raise ValueError(f"q must be positive, got {q}")
    _require_uniform_power((w, v), params)
    if w.id == v.id:
        return False
    return single_affectance(w, v, params) > q ** (-params.alpha)


def is_q_dispersed(members: Sequence[Link], q: float, params: ModelParams) -> bool:
    """True iff no ordered pair of distinct links in the set is q-near."""
    if not (q > 0):
        raise ValueError(f"q must be positive, got {q}")
    _require_uniform_power(members, params)
    for v in members:
        for w in members:
            if w.id != v.id and is_q_near(w, v, q, params):
                return False
    return True


@dataclass(frozen=True)
class PartitionReport:
    """Whether a schedule exactly partitions an instance's link ids."""

    is_partition: bool
    missing: tuple[int, ...]
    duplicated: tuple[int, ...]
    dangling: tuple[int, ...]


def partition_report(instance: Instance, schedule: Schedule) -> PartitionReport:
    """Compare scheduled ids against the instance: missing, duplicated, dangling."""
    counts: dict[int, int] = {}
    for i in schedule.all_ids():
        counts[i] = counts.get(i, 0) + 1
    known = set(instance.by_id)
    dangling = tuple(sorted(i for i in counts if i not in known))
    duplicated = tuple(sorted(i for i, c in counts.items() if c > 1 and i in known))
    missing = tuple(sorted(i for i in known if i not in counts))
    ok = not (dangling or duplicated or missing)
    return PartitionReport(ok, missing, duplicated, dangling)
