"""Analytic evaluation of design options: routing, feasibility, metrics.

Semantics:

- Routing picks the path with the lowest total bandwidth price; ties break
  by fewer hops, then by lexicographic node sequence. Any node may relay.
- Per application path, processing time sums referenceProcessingDelay ÷ rPI
  over the services of a source→sink chain; transmission time sums the link
  latencies of the chain's routed connections; the path's end-to-end value is
  the maximum over its source chains.
- Processing cost bills each service-hosting node's selected hardware option
  once per month; transmission cost bills every connection's data rate times
  the bandwidth price of each link its route traverses.

Everything here is pure and deterministic: identical inputs give
bit-identical outputs, which the batch evaluator and golden tests rely on.
"""
from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

from .enumeration import CandidateSets, DesignOption, validate_option
from .errors import EmptyInput, Unreachable
from .model import (
    ApplicationPath,
    Connection,
    InfrastructureModel,
    SoftwareComponent,
    SoftwareModel,
    source_chains,
)


# ---------------------------------------------------------------------------
# Routing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoutedFlow:
    """One connection's resolved route through the infrastructure."""

    connection: Connection
    node_path: tuple[str, ...]
    links: tuple[str, ...]
    data_rate: float

    @property
    def producer(self) -> str:
        return self.connection.producer

    @property
    def consumer(self) -> str:
        return self.connection.consumer


def cheapest_route(
    infra: InfrastructureModel, start: str, goal: str
) -> tuple[tuple[str, ...], tuple[str, ...], float]:
    """Cheapest-price route between two nodes.

    Returns (node sequence, link ids, total bandwidth price). Ties break by
    hop count, then lexicographic node sequence. Results are memoized on the
    infrastructure instance.

    Raises:
        Unreachable: no path exists.
    """
    cache: dict[tuple[str, str], tuple] = getattr(infra, "_route_cache", None) or {}
    if not hasattr(infra, "_route_cache"):
        infra._route_cache = cache  # type: ignore[attr-defined]
    hit = cache.get((start, goal))
    if hit is not None:
        return hit
    if start == goal:
        result = ((start,), (), 0.0)
        cache[(start, goal)] = result
        return result
    infra.node(start), infra.node(goal)  # existence check
    # Heap entries compare as (price, hops, node sequence) — the node
    # sequence makes the tie-break lexicographic and the entries unique.
    heap: list[tuple[float, int, tuple[str, ...], tuple[str, ...]]] = [
        (0.0, 0, (start,), ())
    ]
    best: dict[str, tuple[float, int, tuple[str, ...]]] = {}
    while heap:
        price, hops, nodes, links = heapq.heappop(heap)
        current = nodes[-1]
        seen = best.get(current)
        if seen is not None and seen <= (price, hops, nodes):
            continue
        best[current] = (price, hops, nodes)
        if current == goal:
            result = (nodes, links, price)
            cache[(start, goal)] = result
            return result
        for link in infra.links_of(current):
            nxt = link.other(current)
            if nxt in nodes:
                continue
            heapq.heappush(
                heap,
                (
                    price + link.bandwidth_price_month,
                    hops + 1,
                    nodes + (nxt,),
                    links + (link.id,),
                ),
            )
    raise Unreachable(f"no route from {start!r} to {goal!r}")


def host_of(
    component: SoftwareComponent, option: DesignOption, software: SoftwareModel
) -> str:
    """Node hosting a component under the given option."""
    if component.pinned_node is not None:
        return component.pinned_node
    placement = option.placement
    try:
        return placement[component.id]
    except KeyError:
        raise Unreachable(f"service {component.id!r} is not placed") from None


def route(
    connection: Connection,
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
) -> RoutedFlow:
    """Route one connection between its producer's and consumer's hosts."""
    producer = software.component(connection.producer)
    consumer = software.component(connection.consumer)
    a = host_of(producer, option, software)
    b = host_of(consumer, option, software)
    nodes, links, _ = cheapest_route(infra, a, b)
    return RoutedFlow(
        connection=connection,
        node_path=nodes,
        links=links,
        data_rate=connection.data_rate or 0.0,
    )


def routed_flows(
    option: DesignOption, infra: InfrastructureModel, software: SoftwareModel
) -> tuple[RoutedFlow, ...]:
    """Route every connection of the software model."""
    return tuple(route(c, option, infra, software) for c in software.connections)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathMetrics:
    processing_time_ms: float
    transmission_time_ms: float

    @property
    def end_to_end_ms(self) -> float:
        return self.processing_time_ms + self.transmission_time_ms

    def to_dict(self) -> dict[str, float]:
        return {
            "processingTimeMs": self.processing_time_ms,
            "transmissionTimeMs": self.transmission_time_ms,
            "endToEndMs": self.end_to_end_ms,
        }


@dataclass(frozen=True)
class SimulationMetrics:
    """The four metrics plus feasibility for one design option."""

    per_path: Mapping[str, PathMetrics]
    processing_cost_month: float
    transmission_cost_month: float
    feasible: bool
    violations: tuple[dict[str, Any], ...]

    @property
    def total_cost_month(self) -> float:
        return self.processing_cost_month + self.transmission_cost_month

    def to_dict(self) -> dict[str, Any]:
        return {
            "perPath": {pid: m.to_dict() for pid, m in sorted(self.per_path.items())},
            "processingCostMonth": self.processing_cost_month,
            "transmissionCostMonth": self.transmission_cost_month,
            "totalCostMonth": self.total_cost_month,
            "feasible": self.feasible,
            "violations": list(self.violations),
        }


def check_resources(
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
    flows: Sequence[RoutedFlow] | None = None,
) -> list[dict[str, Any]]:
    """Memory and bandwidth violations for an option (empty list = feasible)."""
    if flows is None:
        flows = routed_flows(option, infra, software)
    violations: list[dict[str, Any]] = []
    placement = option.placement
    hardware = option.hardware
    load: dict[str, float] = {}
    for sid, nid in placement.items():
        load[nid] = load.get(nid, 0.0) + (
            software.component(sid).required_memory_bytes or 0.0
        )
    for nid in sorted(load):
        selected = infra.node(nid).option(hardware[nid])
        if load[nid] > selected.memory_bytes:
            violations.append(
                {
                    "kind": "memory",
                    "subject": nid,
                    "detail": (
                        f"services need {load[nid]:.0f} B but option "
                        f"{selected.id!r} provides {selected.memory_bytes:.0f} B"
                    ),
                }
            )
    link_load: dict[str, float] = {}
    for flow in flows:
        for link_id in flow.links:
            link_load[link_id] = link_load.get(link_id, 0.0) + flow.data_rate
    for link in infra.links:
        used = link_load.get(link.id, 0.0)
        if used > link.bandwidth_bytes_per_sec:
            violations.append(
                {
                    "kind": "bandwidth",
                    "subject": link.id,
                    "detail": (
                        f"flows need {used:.0f} B/s but the link provides "
                        f"{link.bandwidth_bytes_per_sec:.0f} B/s"
                    ),
                }
            )
    return violations


def _link_latency(infra: InfrastructureModel) -> dict[str, float]:
    return {l.id: l.latency_ms for l in infra.links}


def path_latency(
    path: ApplicationPath,
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
    flow_by_connection: Mapping[tuple[str, str], RoutedFlow] | None = None,
) -> PathMetrics:
    """Per-path latency decomposition (max over the path's source chains)."""
    if flow_by_connection is None:
        flow_by_connection = {
            (f.producer, f.consumer): f
            for f in routed_flows(option, infra, software)
        }
    latency = _link_latency(infra)
    hardware = option.hardware
    best: PathMetrics | None = None
    chains = source_chains(software, path)
    for source_id in sorted(chains):
        for chain in chains[source_id]:
            processing = 0.0
            transmission = 0.0
            for conn in chain:
                flow = flow_by_connection[(conn.producer, conn.consumer)]
                transmission += sum(latency[l] for l in flow.links)
                consumer = software.component(conn.consumer)
                if consumer.is_service:
                    node = infra.node(host_of(consumer, option, software))
                    rpi = node.option(hardware[node.id]).rpi
                    processing += (consumer.ref_delay_ms or 0.0) / rpi
            candidate = PathMetrics(processing, transmission)
            if best is None or candidate.end_to_end_ms > best.end_to_end_ms:
                best = candidate
    return best if best is not None else PathMetrics(0.0, 0.0)


def costs(
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
    flows: Sequence[RoutedFlow] | None = None,
) -> tuple[float, float]:
    """(processing, transmission) monthly cost for an option."""
    if flows is None:
        flows = routed_flows(option, infra, software)
    hardware = option.hardware
    processing = sum(
        infra.node(nid).option(hardware[nid]).price_month
        for nid in option.used_nodes
    )
    price = {l.id: l.bandwidth_price_month for l in infra.links}
    transmission = sum(
        flow.data_rate * sum(price[l] for l in flow.links) for flow in flows
    )
    return processing, transmission


def simulate(
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
) -> SimulationMetrics:
    """Evaluate one option: metrics, resource feasibility, SLO violations.

    Infeasible options still carry metrics (for diagnostics); ``feasible``
    reflects resource checks only, while SLO breaches are listed among the
    violations with kind ``slo``.
    """
    validate_option(option, infra, software)
    flows = routed_flows(option, infra, software)
    by_conn = {(f.producer, f.consumer): f for f in flows}
    per_path = {
        p.id: path_latency(p, option, infra, software, by_conn)
        for p in software.paths
    }
    processing_cost, transmission_cost = costs(option, infra, software, flows)
    violations = check_resources(option, infra, software, flows)
    feasible = not violations
    for p in software.paths:
        e2e = per_path[p.id].end_to_end_ms
        if e2e > p.slo_latency_ms:
            violations.append(
                {
                    "kind": "slo",
                    "subject": p.id,
                    "detail": (
                        f"end-to-end {e2e:.3f} ms exceeds the "
                        f"{p.slo_latency_ms:.3f} ms bound"
                    ),
                }
            )
    return SimulationMetrics(
        per_path=per_path,
        processing_cost_month=processing_cost,
        transmission_cost_month=transmission_cost,
        feasible=feasible,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Result records, SLO filter, percentile selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimRecord:
    """One evaluated option, exportable as a line-delimited record."""

    option: DesignOption
    metrics: SimulationMetrics

    @property
    def slo_ok(self) -> bool:
        return self.metrics.feasible and not any(
            v["kind"] == "slo" for v in self.metrics.violations
        )

    def to_record(self) -> dict[str, Any]:
        doc = self.option.to_dict()
        doc.update(self.metrics.to_dict())
        doc["optionKey"] = self.option.key
        return doc


def filter_slo(results: Iterable[SimRecord]) -> list[SimRecord]:
    """Keep feasible options meeting every path's SLO."""
    return [r for r in results if r.slo_ok]


def select_percentile(
    results: Sequence[SimRecord], fraction: float = 0.05
) -> list[SimRecord]:
    """Cheapest max(1, floor(n×fraction)) records by total monthly cost.

    Ties break by the deterministic enumeration order of the options.

    Raises:
        EmptyInput: results is empty.
        ValueError: fraction outside (0, 1].
    """
    if not results:
        raise EmptyInput("no records to select from")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    ranked = sorted(
        results, key=lambda r: (r.metrics.total_cost_month, r.option.sort_key())
    )
    take = max(1, math.floor(len(ranked) * fraction))
    return ranked[:take]


# ---------------------------------------------------------------------------
# Batch evaluation
# ---------------------------------------------------------------------------

_WORKER_STATE: dict[str, Any] = {}


def _placement_records(
    infra: InfrastructureModel,
    software: SoftwareModel,
    placement: dict[str, str],
) -> list[SimRecord]:
    """All distinct hardware expansions of one placement, evaluated.

    Routing, transmission latency/cost, and bandwidth checks depend only on
    the placement, so they are computed once and shared across the hardware
    combinations.
    """
    import itertools

    base_option = DesignOption.make(
        placement,
        {n: infra.node(n).hardware_options[0].id
         for n in sorted(set(placement.values()))},
    )
    flows = routed_flows(base_option, infra, software)
    by_conn = {(f.producer, f.consumer): f for f in flows}
    used = base_option.used_nodes
    records = []
    for combo in itertools.product(
        *([o.id for o in infra.node(n).hardware_options] for n in used)
    ):
        option = DesignOption.make(placement, dict(zip(used, combo)))
        per_path = {
            p.id: path_latency(p, option, infra, software, by_conn)
            for p in software.paths
        }
        processing_cost, transmission_cost = costs(option, infra, software, flows)
        violations = check_resources(option, infra, software, flows)
        feasible = not violations
        for p in software.paths:
            e2e = per_path[p.id].end_to_end_ms
            if e2e > p.slo_latency_ms:
                violations.append(
                    {
                        "kind": "slo",
                        "subject": p.id,
                        "detail": (
                            f"end-to-end {e2e:.3f} ms exceeds the "
                            f"{p.slo_latency_ms:.3f} ms bound"
                        ),
                    }
                )
        records.append(
            SimRecord(
                option,
                SimulationMetrics(
                    per_path=per_path,
                    processing_cost_month=processing_cost,
                    transmission_cost_month=transmission_cost,
                    feasible=feasible,
                    violations=tuple(violations),
                ),
            )
        )
    return records


def _init_worker(infra: InfrastructureModel, software: SoftwareModel) -> None:
    _WORKER_STATE["infra"] = infra
    _WORKER_STATE["software"] = software


def _eval_chunk(placements: list[dict[str, str]]) -> list[SimRecord]:
    infra = _WORKER_STATE["infra"]
    software = _WORKER_STATE["software"]
    out: list[SimRecord] = []
    for placement in placements:
        out.extend(_placement_records(infra, software, placement))
    return out


def evaluate_space(
    infra: InfrastructureModel,
    software: SoftwareModel,
    candidates: CandidateSets,
    *,
    placement_filter: Callable[[dict[str, str]], bool] | None = None,
    jobs: int = 1,
) -> list[SimRecord]:
    """Evaluate every distinct design in the candidate space.

    Results arrive in deterministic enumeration order regardless of ``jobs``
    (worker outputs are merged in submission order).
    """
    import itertools

    service_ids = sorted(c.id for c in software.services())
    domains = [sorted(set(candidates[s])) for s in service_ids]
    placements = [
        dict(zip(service_ids, combo))
        for combo in itertools.product(*domains)
        if placement_filter is None or placement_filter(dict(zip(service_ids, combo)))
    ]
    if jobs <= 1 or len(placements) < 4:
        records: list[SimRecord] = []
        for placement in placements:
            records.extend(_placement_records(infra, software, placement))
        return records
    chunk_size = max(1, len(placements) // (jobs * 8))
    chunks = [
        placements[i: i + chunk_size] for i in range(0, len(placements), chunk_size)
    ]
    records = []
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_worker, initargs=(infra, software)
    ) as pool:
        for result in pool.map(_eval_chunk, chunks):
            records.extend(result)
    return records


def to_csv(records: Iterable[SimRecord], path_ids: Sequence[str]) -> str:
    """Compact CSV for plotting: one row per option."""
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["optionKey", "feasible", "sloOk", "processingCostMonth",
         "transmissionCostMonth", "totalCostMonth"]
        + [f"{pid}EndToEndMs" for pid in path_ids]
    )
    for r in records:
        writer.writerow(
            [
                r.option.key,
                int(r.metrics.feasible),
                int(r.slo_ok),
                f"{r.metrics.processing_cost_month:.6f}",
                f"{r.metrics.transmission_cost_month:.6f}",
                f"{r.metrics.total_cost_month:.6f}",
            ]
            + [f"{r.metrics.per_path[p].end_to_end_ms:.6f}" for p in path_ids]
        )
    return buf.getvalue()
