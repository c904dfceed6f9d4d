"""Desk-scale emulation of shortlisted designs on a single host.

The emulator rebuilds a design as a mesh of actors on one event loop:
sources emit timestamped messages at configured rates, per-link channels
inject the modeled one-way latency and shape throughput with a token bucket,
service actors burn calibrated CPU work sized so a node that is twice as
fast finishes the same service in half the time, and sinks record real
end-to-end latencies per application path.

Design choices that matter for reproducibility on small hosts:

- Service work burns real CPU in millisecond-sized cooperative chunks, so
  the event loop keeps delivering messages on time. Virtual nodes model
  independent machines: overlapping burns on different nodes share the desk
  host fairly (chunk round-robin) instead of queueing behind each other.
- Channel state (token bucket, FIFO head) is advanced synchronously at send
  time, and deliveries fire through a spin-guarded timer: the callback is
  scheduled slightly early and busy-waits the last fraction of a
  millisecond, sidestepping the ~1 ms granularity of poll-based timers.
  Injected latency is therefore applied with microsecond precision and is
  never delivered early.
- The garbage collector is paused during a run (collected between runs), so
  collection pauses cannot land in the middle of a timed burn.
- Sources with equal periods are phase-staggered deterministically (the
  i-th of n starts i/n of its period late, ordered by id), so periodic
  workloads do not collide in lockstep and repeats see identical arrivals.
- One shared monotonic clock timestamps everything; there is no cross-host
  clock skew to correct.
"""
from __future__ import annotations

import asyncio
import gc
import statistics
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .enumeration import DesignOption
from .errors import (
    CalibrationUnstable,
    EmptyInput,
    ResourceExhausted,
    Starvation,
    ValidationError,
)
from .model import InfrastructureModel, SoftwareModel
from .simulator import SimulationMetrics, host_of, routed_flows

# One cooperative burn slice; small enough to keep timers punctual, large
# enough that slicing overhead stays in the noise.
CHUNK_MS = 0.5

DEFAULT_REFERENCE_UNITS = 150_000


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


def burn(units: int) -> int:
    """Fixed integer kernel: one unit is one step of a modular recurrence."""
    acc = 1
    for _ in range(units):
        acc = (acc * 1103515245 + 12345) % 2147483647
    return acc


@dataclass(frozen=True)
class CalibrationProfile:
    """Host throughput on the burn kernel, in units per millisecond."""

    units_per_ms: float
    reference_units: int
    sample_ms: tuple[float, ...]

    def units_for(self, ref_delay_ms: float, rpi: float) -> int:
        """Busy-work units so the service takes ref_delay_ms ÷ rpi on this host."""
        return max(1, round(self.units_per_ms * ref_delay_ms / rpi))

    def to_dict(self) -> dict[str, Any]:
        return {
            "unitsPerMs": self.units_per_ms,
            "referenceUnits": self.reference_units,
            "sampleMs": list(self.sample_ms),
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "CalibrationProfile":
        return cls(
            units_per_ms=float(doc["unitsPerMs"]),
            reference_units=int(doc["referenceUnits"]),
            sample_ms=tuple(float(x) for x in doc.get("sampleMs", ())),
        )


def _time_burn(units: int) -> float:
    start = time.perf_counter()
    burn(units)
    return (time.perf_counter() - start) * 1000.0


def calibrate(
    reference_work_units: int = DEFAULT_REFERENCE_UNITS,
    *,
    samples: int = 5,
    tolerance: float = 0.10,
) -> CalibrationProfile:
    """Measure host throughput on the burn kernel.

    Takes ``samples`` timed runs after two warmups; if any sample deviates
    from the median by more than ``tolerance``, one fresh round is attempted
    before giving up.

    Raises:
        CalibrationUnstable: repeated measurements deviate beyond tolerance.
    """
    if reference_work_units < 1:
        raise ValidationError(
            "calibration", "reference_work_units must be positive"
        )
    spread = 0.0
    for _ in range(2):
        burn(reference_work_units)
        burn(reference_work_units)
        timings = tuple(_time_burn(reference_work_units) for _ in range(samples))
        center = statistics.median(timings)
        spread = max(abs(t - center) for t in timings) / center
        if spread <= tolerance:
            return CalibrationProfile(
                units_per_ms=reference_work_units / center,
                reference_units=reference_work_units,
                sample_ms=timings,
            )
    raise CalibrationUnstable(
        f"burn timings deviate {spread * 100:.1f}% from the median "
        f"(> {tolerance * 100:.0f}%) after retry; host too noisy to calibrate"
    )


# ---------------------------------------------------------------------------
# Testbed plan (pure data, deterministic)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VirtualNode:
    node_id: str
    compute_scale: float
    memory_cap_bytes: float


@dataclass(frozen=True)
class VirtualLink:
    link_id: str
    latency_ms: float
    bandwidth_bytes_per_sec: float


@dataclass(frozen=True)
class ActorSpec:
    """One component instance in the testbed."""

    component_id: str
    kind: str
    host: str
    burn_units: int = 0
    output_ratio: float = 1.0
    memory_bytes: float = 0.0
    outputs: tuple[str, ...] = ()
    # sinks: origin source id → path ids whose latency this arrival samples
    path_of_origin: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __hash__(self) -> int:  # the Mapping field is excluded
        return hash((self.component_id, self.kind, self.host))


@dataclass(frozen=True)
class VirtualTestbed:
    """Deterministic execution plan for one design option."""

    option: DesignOption
    virtual_nodes: tuple[VirtualNode, ...]
    virtual_links: tuple[VirtualLink, ...]
    actors: tuple[ActorSpec, ...]
    # (producer, consumer) → link ids along the routed path, in order
    routing_table: Mapping[tuple[str, str], tuple[str, ...]]
    slo_ms: Mapping[str, float]
    calibration: CalibrationProfile

    def node(self, node_id: str) -> VirtualNode:
        for n in self.virtual_nodes:
            if n.node_id == node_id:
                return n
        raise KeyError(f"unknown virtual node {node_id!r}")


def build_testbed(
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
    calibration: CalibrationProfile,
) -> VirtualTestbed:
    """Plan a virtual testbed for one option. Pure and deterministic."""
    flows = routed_flows(option, infra, software)
    routing: dict[tuple[str, str], tuple[str, ...]] = {
        (f.producer, f.consumer): f.links for f in flows
    }
    hardware = option.hardware
    hosts = {c.id: host_of(c, option, software) for c in software.components}
    used_nodes = sorted(set(hosts.values()))
    vnodes = []
    for nid in used_nodes:
        node = infra.node(nid)
        if nid in hardware:
            selected = node.option(hardware[nid])
        else:
            # Pinned-only node outside the option's service placement: the
            # first (cheapest) hardware option stands in for the fixed gear.
            selected = node.hardware_options[0]
        vnodes.append(
            VirtualNode(
                node_id=nid,
                compute_scale=selected.rpi,
                memory_cap_bytes=selected.memory_bytes,
            )
        )
    used_links = sorted({lid for links in routing.values() for lid in links})
    link_by_id = {l.id: l for l in infra.links}
    vlinks = tuple(
        VirtualLink(
            link_id=lid,
            latency_ms=link_by_id[lid].latency_ms,
            bandwidth_bytes_per_sec=link_by_id[lid].bandwidth_bytes_per_sec,
        )
        for lid in used_links
    )
    # Map each sink to the paths sampled per origin source.
    sink_paths: dict[str, dict[str, list[str]]] = {}
    for path in software.paths:
        members = [software.component(m) for m in path.members]
        sink = next(c for c in members if c.kind == "sink")
        for src in (c for c in members if c.kind == "source"):
            sink_paths.setdefault(sink.id, {}).setdefault(src.id, []).append(
                path.id
            )
    actors = []
    for comp in sorted(software.components, key=lambda c: c.id):
        outputs = tuple(
            c.consumer
            for c in sorted(software.outgoing(comp.id), key=lambda c: c.consumer)
        )
        if comp.kind == "service":
            scale = next(
                v.compute_scale for v in vnodes if v.node_id == hosts[comp.id]
            )
            actors.append(
                ActorSpec(
                    component_id=comp.id,
                    kind="service",
                    host=hosts[comp.id],
                    burn_units=calibration.units_for(
                        comp.ref_delay_ms or 0.0, scale
                    ),
                    output_ratio=comp.output_ratio or 1.0,
                    memory_bytes=comp.required_memory_bytes or 0.0,
                    outputs=outputs,
                )
            )
        elif comp.kind == "source":
            actors.append(
                ActorSpec(
                    component_id=comp.id,
                    kind="source",
                    host=hosts[comp.id],
                    outputs=outputs,
                )
            )
        else:
            actors.append(
                ActorSpec(
                    component_id=comp.id,
                    kind="sink",
                    host=hosts[comp.id],
                    path_of_origin={
                        src: tuple(sorted(pids))
                        for src, pids in sorted(sink_paths.get(comp.id, {}).items())
                    },
                )
            )
    return VirtualTestbed(
        option=option,
        virtual_nodes=tuple(vnodes),
        virtual_links=vlinks,
        actors=tuple(actors),
        routing_table=routing,
        slo_ms={p.id: p.slo_latency_ms for p in software.paths},
        calibration=calibration,
    )


# ---------------------------------------------------------------------------
# Workload
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceLoad:
    """Traffic description for one source."""

    mode: str = "constant-rate"
    rate_bytes_per_sec: float = 0.0
    message_size_bytes: int = 1
    trace: tuple[tuple[float, int], ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("constant-rate", "trace-replay"):
            raise ValidationError("workload", f"unknown source mode {self.mode!r}")
        if self.mode == "constant-rate":
            if self.rate_bytes_per_sec <= 0 or self.message_size_bytes <= 0:
                raise ValidationError(
                    "workload",
                    "constant-rate sources need positive rate and size",
                )
        elif not self.trace:
            raise ValidationError(
                "workload", "trace-replay sources need a non-empty trace"
            )

    @property
    def interval_sec(self) -> float:
        return self.message_size_bytes / self.rate_bytes_per_sec


@dataclass(frozen=True)
class WorkloadSpec:
    """Experiment envelope: per-source traffic, duration, warmup, repeats."""

    sources: Mapping[str, SourceLoad]
    duration_sec: float
    warmup_sec: float = 0.0
    repeats: int = 1

    def __post_init__(self) -> None:
        if not self.duration_sec > self.warmup_sec >= 0:
            raise ValidationError("workload", "need durationSec > warmupSec ≥ 0")
        if self.repeats < 1:
            raise ValidationError("workload", "repeats must be ≥ 1")

    @classmethod
    def for_models(
        cls,
        software: SoftwareModel,
        message_size_bytes: Mapping[str, int],
        *,
        duration_sec: float,
        warmup_sec: float = 0.0,
        repeats: int = 1,
    ) -> "WorkloadSpec":
        """Constant-rate workload at each source's modeled output rate."""
        sources = {}
        for src in software.sources():
            size = int(message_size_bytes.get(src.id, 1000))
            sources[src.id] = SourceLoad(
                mode="constant-rate",
                rate_bytes_per_sec=src.output_rate or 0.0,
                message_size_bytes=size,
            )
        return cls(
            sources=sources,
            duration_sec=duration_sec,
            warmup_sec=warmup_sec,
            repeats=repeats,
        )


# ---------------------------------------------------------------------------
# Runtime mesh
# ---------------------------------------------------------------------------


@dataclass
class _Message:
    msg_id: int
    origin: str
    origin_ts: float
    size: int


class _LinkState:
    """Token bucket plus FIFO head for one virtual link."""

    __slots__ = ("rate", "capacity", "tokens", "last_refill", "last_deliver",
                 "latency_s")

    def __init__(self, vlink: VirtualLink) -> None:
        self.rate = vlink.bandwidth_bytes_per_sec
        self.capacity = self.rate
        self.tokens = self.rate
        self.last_refill = 0.0
        self.last_deliver = 0.0
        self.latency_s = vlink.latency_ms / 1000.0

    def deliver_time(self, now: float, size: float) -> float:
        """Advance bucket/FIFO state; return the delivery instant."""
        self.tokens = min(
            self.capacity, self.tokens + (now - self.last_refill) * self.rate
        )
        self.last_refill = now
        if size <= self.tokens:
            self.tokens -= size
            start = now
        else:
            wait = (size - self.tokens) / self.rate
            self.tokens = 0.0
            start = now + wait
        deliver_at = max(start + self.latency_s, self.last_deliver)
        self.last_deliver = deliver_at
        return deliver_at


class _Mesh:
    """Live actor mesh for one run. Built fresh per repeat."""

    def __init__(self, testbed: VirtualTestbed, workload: WorkloadSpec) -> None:
        self.testbed = testbed
        self.workload = workload
        self.loop = asyncio.get_running_loop()
        self.outstanding = 0
        self.drained = asyncio.Event()
        self.emitted: dict[str, int] = {}
        self.delivered: dict[str, int] = {}
        self.samples: dict[str, list[tuple[float, float]]] = {
            pid: [] for pid in testbed.slo_ms
        }
        self.next_id = 0
        self.start_ts = 0.0
        self.in_flight = 0
        self.inboxes: dict[str, asyncio.Queue] = {
            a.component_id: asyncio.Queue()
            for a in testbed.actors
            if a.kind != "source"
        }
        self.links = {v.link_id: _LinkState(v) for v in testbed.virtual_links}
        self.node_locks = {
            v.node_id: asyncio.Lock() for v in testbed.virtual_nodes
        }
        chunk = max(1, round(testbed.calibration.units_per_ms * CHUNK_MS))
        self.chunk_units = chunk
        self.timers: list[asyncio.TimerHandle] = []

    # -- message transport ---------------------------------------------------

    def _track(self, delta: int) -> None:
        self.outstanding += delta
        if self.outstanding == 0:
            self.drained.set()
        else:
            self.drained.clear()

    def send(self, producer: str, consumer: str, msg: _Message) -> None:
        links = self.testbed.routing_table[(producer, consumer)]
        if not links:
            self.inboxes[consumer].put_nowait(msg)
            return
        self._hop(links, 0, msg, consumer)

    def _hop(
        self, links: tuple[str, ...], idx: int, msg: _Message, consumer: str
    ) -> None:
        state = self.links[links[idx]]
        deliver_at = state.deliver_time(self.loop.time(), msg.size)
        self.timers.append(
            self.loop.call_at(deliver_at, self._arrive, links, idx, msg, consumer)
        )

    def _arrive(
        self, links: tuple[str, ...], idx: int, msg: _Message, consumer: str
    ) -> None:
        if idx + 1 < len(links):
            self._hop(links, idx + 1, msg, consumer)
        else:
            self.inboxes[consumer].put_nowait(msg)

    # -- actors ----------------------------------------------------------------

    def _new_message(self, origin: str, size: int) -> _Message:
        self.next_id += 1
        return _Message(
            msg_id=self.next_id,
            origin=origin,
            origin_ts=self.loop.time(),
            size=size,
        )

    async def _source_actor(self, spec: ActorSpec, offset_sec: float) -> None:
        load = self.workload.sources[spec.component_id]
        end = self.start_ts + self.workload.duration_sec
        if load.mode == "trace-replay":
            emissions = [(self.start_ts + t, size) for t, size in load.trace]
        else:
            interval = load.interval_sec
            emissions = []
            t = self.start_ts + offset_sec
            while t < end:
                emissions.append((t, load.message_size_bytes))
                t += interval
        for due, size in emissions:
            delay = due - self.loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            if self.loop.time() >= end:
                break
            self.emitted[spec.component_id] = (
                self.emitted.get(spec.component_id, 0) + 1
            )
            for consumer in spec.outputs:
                msg = self._new_message(spec.component_id, size)
                self._track(+1)
                self.send(spec.component_id, consumer, msg)

    async def _burn_on_node(self, host: str, units: int) -> None:
        """Burn calibrated work while holding the node's single CPU."""
        async with self.node_locks[host]:
            remaining = units
            while remaining > 0:
                step = self.chunk_units if remaining > self.chunk_units else remaining
                burn(step)
                remaining -= step
                if remaining:
                    await asyncio.sleep(0)

    async def _service_actor(self, spec: ActorSpec) -> None:
        inbox = self.inboxes[spec.component_id]
        while True:
            msg = await inbox.get()
            if spec.burn_units:
                await self._burn_on_node(spec.host, spec.burn_units)
            out_size = max(1, round(spec.output_ratio * msg.size))
            # Count the forwards before releasing the input, so the
            # in-flight total never dips to zero mid-chain.
            for consumer in spec.outputs:
                fwd = _Message(
                    msg_id=msg.msg_id,
                    origin=msg.origin,
                    origin_ts=msg.origin_ts,
                    size=out_size,
                )
                self._track(+1)
                self.send(spec.component_id, consumer, fwd)
            self._track(-1)

    async def _sink_actor(self, spec: ActorSpec) -> None:
        inbox = self.inboxes[spec.component_id]
        while True:
            msg = await inbox.get()
            arrival = self.loop.time()
            latency_ms = (arrival - msg.origin_ts) * 1000.0
            for pid in spec.path_of_origin.get(msg.origin, ()):
                self.samples[pid].append((msg.origin_ts, latency_ms))
                self.delivered[pid] = self.delivered.get(pid, 0) + 1
            self._track(-1)

    # -- run -------------------------------------------------------------------

    async def run(self) -> None:
        workers = []
        for spec in self.testbed.actors:
            if spec.kind == "service":
                workers.append(asyncio.ensure_future(self._service_actor(spec)))
            elif spec.kind == "sink":
                workers.append(asyncio.ensure_future(self._sink_actor(spec)))
        self.start_ts = self.loop.time() + 0.02
        source_specs = sorted(
            (a for a in self.testbed.actors if a.kind == "source"),
            key=lambda a: a.component_id,
        )
        emitters = []
        for i, spec in enumerate(source_specs):
            load = self.workload.sources.get(spec.component_id)
            if load is None:
                raise ValidationError(
                    "workload", f"no workload for source {spec.component_id!r}"
                )
            offset = 0.0
            if load.mode == "constant-rate":
                offset = load.interval_sec * i / len(source_specs)
            emitters.append(asyncio.ensure_future(self._source_actor(spec, offset)))
        await asyncio.gather(*emitters)
        if self.outstanding == 0:
            self.drained.set()
        try:
            await asyncio.wait_for(self.drained.wait(), timeout=5.0)
        except asyncio.TimeoutError:
            pass
        self.in_flight = self.outstanding
        for w in workers:
            w.cancel()
        for t in self.timers:
            t.cancel()
        await asyncio.gather(*workers, return_exceptions=True)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathRunStats:
    mean_ms: float
    stddev_ms: float
    sample_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "meanMs": self.mean_ms,
            "stddevMs": self.stddev_ms,
            "sampleCount": self.sample_count,
        }


@dataclass(frozen=True)
class RunReport:
    per_path: Mapping[str, PathRunStats]
    emitted: Mapping[str, int]
    delivered: Mapping[str, int]
    in_flight_at_shutdown: int
    samples: Mapping[str, tuple[tuple[float, float], ...]] = field(
        default_factory=dict
    )

    def to_dict(self) -> dict[str, Any]:
        return {
            "perPath": {p: s.to_dict() for p, s in sorted(self.per_path.items())},
            "emitted": dict(sorted(self.emitted.items())),
            "delivered": dict(sorted(self.delivered.items())),
            "inFlightAtShutdown": self.in_flight_at_shutdown,
        }


@dataclass(frozen=True)
class EmulationReport:
    """Measured behaviour of one design option across repeated runs."""

    runs: tuple[RunReport, ...]
    median_run: Mapping[str, PathRunStats]
    cov: Mapping[str, float | None]
    slo_ms: Mapping[str, float]

    @property
    def slo_met(self) -> bool:
        return all(
            self.median_run[pid].mean_ms <= slo
            for pid, slo in self.slo_ms.items()
        )

    def worst_path_ms(self) -> float:
        return max(s.mean_ms for s in self.median_run.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "runs": [r.to_dict() for r in self.runs],
            "medianRun": {
                p: s.to_dict() for p, s in sorted(self.median_run.items())
            },
            "coefficientOfVariation": {p: self.cov[p] for p in sorted(self.cov)},
            "sloMs": dict(sorted(self.slo_ms.items())),
            "sloMet": self.slo_met,
        }


def _memory_precheck(testbed: VirtualTestbed) -> None:
    per_node: dict[str, float] = {}
    for actor in testbed.actors:
        if actor.kind == "service":
            per_node[actor.host] = per_node.get(actor.host, 0.0) + actor.memory_bytes
    for nid in sorted(per_node):
        cap = testbed.node(nid).memory_cap_bytes
        if per_node[nid] > cap:
            raise ResourceExhausted(
                nid,
                f"services need {per_node[nid]:.0f} B on {nid!r} but its "
                f"virtual memory cap is {cap:.0f} B",
            )


def run_experiment(
    testbed: VirtualTestbed,
    workload: WorkloadSpec,
    *,
    keep_samples: bool = False,
) -> EmulationReport:
    """Execute the workload against the testbed, repeats back-to-back.

    Raises:
        ResourceExhausted: configured service footprints exceed a node cap.
        Starvation: a path collected zero samples after warmup.
    """
    _memory_precheck(testbed)
    runs: list[RunReport] = []
    for _ in range(workload.repeats):
        runs.append(_run_once(testbed, workload, keep_samples))
    median_run: dict[str, PathRunStats] = {}
    cov: dict[str, float | None] = {}
    for pid in sorted(testbed.slo_ms):
        means = [r.per_path[pid].mean_ms for r in runs]
        order = sorted(range(len(runs)), key=lambda i: means[i])
        median_idx = order[(len(order) - 1) // 2]
        median_run[pid] = runs[median_idx].per_path[pid]
        if len(means) >= 2:
            mu = statistics.fmean(means)
            cov[pid] = (statistics.stdev(means) / mu) if mu > 0 else 0.0
        else:
            cov[pid] = None
    return EmulationReport(
        runs=tuple(runs),
        median_run=median_run,
        cov=cov,
        slo_ms=dict(testbed.slo_ms),
    )


def _run_once(
    testbed: VirtualTestbed, workload: WorkloadSpec, keep_samples: bool
) -> RunReport:
    async def _go() -> _Mesh:
        mesh = _Mesh(testbed, workload)
        await mesh.run()
        return mesh

    mesh = asyncio.run(_go())
    per_path: dict[str, PathRunStats] = {}
    kept: dict[str, tuple[tuple[float, float], ...]] = {}
    cutoff = mesh.start_ts + workload.warmup_sec
    for pid in sorted(testbed.slo_ms):
        values = [
            lat for (origin_ts, lat) in mesh.samples[pid] if origin_ts >= cutoff
        ]
        if not values:
            raise Starvation(
                pid,
                f"path {pid!r} collected no samples after the "
                f"{workload.warmup_sec}s warmup",
            )
        per_path[pid] = PathRunStats(
            mean_ms=statistics.fmean(values),
            stddev_ms=statistics.stdev(values) if len(values) >= 2 else 0.0,
            sample_count=len(values),
        )
        if keep_samples:
            kept[pid] = tuple(
                (origin_ts - mesh.start_ts, lat)
                for (origin_ts, lat) in mesh.samples[pid]
                if origin_ts >= cutoff
            )
    return RunReport(
        per_path=per_path,
        emitted=dict(mesh.emitted),
        delivered=dict(mesh.delivered),
        in_flight_at_shutdown=mesh.in_flight,
        samples=kept,
    )


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ranking:
    """compare() output: verdict-ordered options plus chart data."""

    entries: tuple[tuple[DesignOption, SimulationMetrics, EmulationReport], ...]
    chart_csv: str

    @property
    def winner(self) -> tuple[DesignOption, SimulationMetrics, EmulationReport]:
        return self.entries[0]


def compare(
    reports: Sequence[tuple[DesignOption, SimulationMetrics, EmulationReport]],
) -> Ranking:
    """Rank measured options.

    Order: options meeting every measured SLO first, then by simulated total
    monthly cost, then by measured worst-path latency.

    Raises:
        EmptyInput: no reports given.
    """
    if not reports:
        raise EmptyInput("compare() needs at least one report")
    ranked = sorted(
        reports,
        key=lambda e: (
            not e[2].slo_met,
            e[1].total_cost_month,
            e[2].worst_path_ms(),
            e[0].sort_key(),
        ),
    )
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["rank", "optionKey", "path", "medianMeanMs", "medianStddevMs",
         "sloMs", "sloMet", "totalCostMonth"]
    )
    for rank, (option, sim, report) in enumerate(ranked, start=1):
        for pid in sorted(report.median_run):
            stats = report.median_run[pid]
            writer.writerow(
                [
                    rank,
                    option.key,
                    pid,
                    f"{stats.mean_ms:.3f}",
                    f"{stats.stddev_ms:.3f}",
                    f"{report.slo_ms[pid]:.3f}",
                    int(stats.mean_ms <= report.slo_ms[pid]),
                    f"{sim.total_cost_month:.6f}",
                ]
            )
    return Ranking(entries=tuple(ranked), chart_csv=buf.getvalue())


def samples_csv(
    entries: Sequence[tuple[DesignOption, EmulationReport]],
) -> str:
    """Per-sample dump (only populated when runs kept samples)."""
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["optionKey", "run", "path", "originOffsetSec", "latencyMs"])
    for option, report in entries:
        for run_idx, run in enumerate(report.runs):
            for pid in sorted(run.samples):
                for origin_offset, latency in run.samples[pid]:
                    writer.writerow(
                        [option.key, run_idx, pid,
                         f"{origin_offset:.6f}", f"{latency:.6f}"]
                    )
    return buf.getvalue()
