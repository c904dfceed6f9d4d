"""Infrastructure and software models: schemas, validation, derived rates.

The two model documents are plain JSON (or already-parsed mappings). Field
names in the documents are normative::

    infrastructure: {tierOrder, nodes: [{id, name, tier, pinned,
        hardwareOptions: [{id, rpi, memoryBytes, priceMonth}]}],
        links: [{id, a, b, latencyMs, bandwidthBytesPerSec,
        bandwidthPriceMonthPerBytePerSec, latencyClass?}]}
    software: {components: [{id, kind, outputRateBytesPerSec?, outputRatio?,
        refDelayMs?, requiredMemoryBytes?, role?, pinnedNode?}],
        connections: [{producer, consumer}],
        paths: [{id, class, members, sloLatencyMs}]}

Units are normalized at load time: bytes/second for rates and bandwidth,
milliseconds for latencies, currency/month for prices. Loaded models are
immutable in spirit (nothing mutates them after validation) and safe to share
across worker processes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .errors import (
    CyclicSoftwareGraph,
    DisconnectedGraph,
    MissingRate,
    SchemaError,
    ValidationError,
)

#: latencyClass is defaulted from these thresholds when absent:
#: low < LOW_MS <= medium < HIGH_MS <= high.
DEFAULT_CLASS_THRESHOLDS = (5.0, 50.0)
LATENCY_CLASSES = ("low", "medium", "high")
COMPONENT_KINDS = ("source", "service", "sink")
SERVICE_ROLES = ("event-processor", "preprocessor", "heavy-analytics")
PATH_CLASSES = ("event-processing", "data-analytics")


# ---------------------------------------------------------------------------
# Dataclasses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HardwareOption:
    """One machine choice for a node: speed, memory, and monthly price."""

    id: str
    rpi: float
    memory_bytes: float
    price_month: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "rpi": self.rpi,
            "memoryBytes": self.memory_bytes,
            "priceMonth": self.price_month,
        }


@dataclass(frozen=True)
class InfraNode:
    """An infrastructure node with its tier and hardware options."""

    id: str
    name: str
    tier: str
    pinned: tuple[str, ...]
    hardware_options: tuple[HardwareOption, ...]

    def option(self, option_id: str) -> HardwareOption:
        for opt in self.hardware_options:
            if opt.id == option_id:
                return opt
        raise KeyError(f"node {self.id!r} has no hardware option {option_id!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "tier": self.tier,
            "pinned": list(self.pinned),
            "hardwareOptions": [o.to_dict() for o in self.hardware_options],
        }


@dataclass(frozen=True)
class NetworkLink:
    """An undirected link between two nodes."""

    id: str
    a: str
    b: str
    latency_ms: float
    bandwidth_bytes_per_sec: float
    bandwidth_price_month: float
    latency_class: str

    def other(self, node_id: str) -> str:
        return self.b if node_id == self.a else self.a

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "a": self.a,
            "b": self.b,
            "latencyMs": self.latency_ms,
            "bandwidthBytesPerSec": self.bandwidth_bytes_per_sec,
            "bandwidthPriceMonthPerBytePerSec": self.bandwidth_price_month,
            "latencyClass": self.latency_class,
        }


@dataclass
class InfrastructureModel:
    """Validated infrastructure graph with an ordered tier list."""

    tier_order: tuple[str, ...]
    nodes: tuple[InfraNode, ...]
    links: tuple[NetworkLink, ...]
    _by_id: dict[str, InfraNode] = field(default_factory=dict, repr=False)
    _adjacency: dict[str, tuple[NetworkLink, ...]] = field(
        default_factory=dict, repr=False
    )

    def __post_init__(self) -> None:
        self._by_id = {n.id: n for n in self.nodes}
        adj: dict[str, list[NetworkLink]] = {n.id: [] for n in self.nodes}
        for link in self.links:
            adj[link.a].append(link)
            adj[link.b].append(link)
        self._adjacency = {
            nid: tuple(sorted(ls, key=lambda l: l.id)) for nid, ls in adj.items()
        }

    def node(self, node_id: str) -> InfraNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise KeyError(f"unknown node {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def links_of(self, node_id: str) -> tuple[NetworkLink, ...]:
        return self._adjacency[node_id]

    def tier_index(self, node_id: str) -> int:
        return self.tier_order.index(self.node(node_id).tier)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tierOrder": list(self.tier_order),
            "nodes": [n.to_dict() for n in self.nodes],
            "links": [l.to_dict() for l in self.links],
        }


@dataclass(frozen=True)
class SoftwareComponent:
    """A source, service, or sink in the dataflow graph."""

    id: str
    kind: str
    output_rate: float | None = None
    output_ratio: float | None = None
    ref_delay_ms: float | None = None
    required_memory_bytes: float | None = None
    role: str | None = None
    pinned_node: str | None = None

    @property
    def is_service(self) -> bool:
        return self.kind == "service"

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"id": self.id, "kind": self.kind}
        if self.output_rate is not None:
            doc["outputRateBytesPerSec"] = self.output_rate
        if self.output_ratio is not None:
            doc["outputRatio"] = self.output_ratio
        if self.ref_delay_ms is not None:
            doc["refDelayMs"] = self.ref_delay_ms
        if self.required_memory_bytes is not None:
            doc["requiredMemoryBytes"] = self.required_memory_bytes
        if self.role is not None:
            doc["role"] = self.role
        if self.pinned_node is not None:
            doc["pinnedNode"] = self.pinned_node
        return doc


@dataclass(frozen=True)
class Connection:
    """A producer→consumer edge; dataRate is filled by :func:`derive_rates`."""

    producer: str
    consumer: str
    data_rate: float | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"producer": self.producer, "consumer": self.consumer}
        if self.data_rate is not None:
            doc["dataRate"] = self.data_rate
        return doc


@dataclass(frozen=True)
class ApplicationPath:
    """A source(s)→…→sink flow carrying one end-to-end latency SLO."""

    id: str
    path_class: str
    members: tuple[str, ...]
    slo_latency_ms: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "class": self.path_class,
            "members": list(self.members),
            "sloLatencyMs": self.slo_latency_ms,
        }


@dataclass
class SoftwareModel:
    """Validated dataflow DAG grouped into application paths."""

    components: tuple[SoftwareComponent, ...]
    connections: tuple[Connection, ...]
    paths: tuple[ApplicationPath, ...]
    _by_id: dict[str, SoftwareComponent] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._by_id = {c.id: c for c in self.components}

    def component(self, component_id: str) -> SoftwareComponent:
        try:
            return self._by_id[component_id]
        except KeyError:
            raise KeyError(f"unknown component {component_id!r}") from None

    def has_component(self, component_id: str) -> bool:
        return component_id in self._by_id

    def services(self) -> tuple[SoftwareComponent, ...]:
        return tuple(c for c in self.components if c.kind == "service")

    def sources(self) -> tuple[SoftwareComponent, ...]:
        return tuple(c for c in self.components if c.kind == "source")

    def sinks(self) -> tuple[SoftwareComponent, ...]:
        return tuple(c for c in self.components if c.kind == "sink")

    def path(self, path_id: str) -> ApplicationPath:
        for p in self.paths:
            if p.id == path_id:
                return p
        raise KeyError(f"unknown path {path_id!r}")

    def paths_of(self, component_id: str) -> tuple[ApplicationPath, ...]:
        return tuple(p for p in self.paths if component_id in p.members)

    def incoming(self, component_id: str) -> tuple[Connection, ...]:
        return tuple(c for c in self.connections if c.consumer == component_id)

    def outgoing(self, component_id: str) -> tuple[Connection, ...]:
        return tuple(c for c in self.connections if c.producer == component_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "components": [c.to_dict() for c in self.components],
            "connections": [c.to_dict() for c in self.connections],
            "paths": [p.to_dict() for p in self.paths],
        }


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def _as_mapping(doc: str | bytes | Mapping[str, Any], what: str) -> Mapping[str, Any]:
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{what} document is not valid JSON: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{what} document must be a mapping")
    return doc


def _require(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in doc:
        raise SchemaError(f"{where}: missing required field {key!r}")
    return doc[key]


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{where}: expected a non-empty string, got {value!r}")
    return value


def _string_list(value: Any, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(f"{where}: expected a list of strings")
    return list(value)


# ---------------------------------------------------------------------------
# Infrastructure
# ---------------------------------------------------------------------------


def parse_infrastructure(
    doc: str | bytes | Mapping[str, Any],
    *,
    class_thresholds: tuple[float, float] = DEFAULT_CLASS_THRESHOLDS,
) -> InfrastructureModel:
    """Parse and validate an infrastructure document.

    Args:
        doc: JSON text or an already-parsed mapping.
        class_thresholds: (low_upper, medium_upper) in ms used to default
            ``latencyClass`` when a link does not declare one.

    Raises:
        SchemaError: malformed document.
        ValidationError: an invariant is violated (subclasses name specifics).
    """
    data = _as_mapping(doc, "infrastructure")
    tier_order = tuple(_string_list(_require(data, "tierOrder", "infrastructure"),
                                    "tierOrder"))
    if len(set(tier_order)) != len(tier_order) or not tier_order:
        raise ValidationError("tier-order", "tierOrder must be non-empty and unique")

    raw_nodes = _require(data, "nodes", "infrastructure")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise SchemaError("infrastructure: 'nodes' must be a non-empty list")
    nodes = []
    for nd in raw_nodes:
        nd = _as_mapping(nd, "node")
        nid = _string(_require(nd, "id", "node"), "node.id")
        where = f"node {nid!r}"
        tier = _string(_require(nd, "tier", where), f"{where}.tier")
        if tier not in tier_order:
            raise ValidationError(
                "tier-known", f"{where}: tier {tier!r} not in tierOrder"
            )
        raw_opts = _require(nd, "hardwareOptions", where)
        if not isinstance(raw_opts, list) or not raw_opts:
            raise ValidationError(
                "hardware-options-nonempty", f"{where}: hardwareOptions empty"
            )
        options = []
        for opt in raw_opts:
            opt = _as_mapping(opt, f"{where} hardware option")
            oid = _string(_require(opt, "id", where), f"{where} option.id")
            rpi = _number(_require(opt, "rpi", where), f"{where} {oid} rpi")
            mem = _number(_require(opt, "memoryBytes", where), f"{where} {oid} memoryBytes")
            price = _number(_require(opt, "priceMonth", where), f"{where} {oid} priceMonth")
            if rpi <= 0:
                raise ValidationError("rpi-positive", f"{where} {oid}: rpi must be > 0")
            if mem < 0 or price < 0:
                raise ValidationError(
                    "nonnegative-resources",
                    f"{where} {oid}: memoryBytes and priceMonth must be >= 0",
                )
            options.append(HardwareOption(oid, rpi, mem, price))
        if len({o.id for o in options}) != len(options):
            raise ValidationError(
                "option-ids-unique", f"{where}: duplicate hardware option ids"
            )
        nodes.append(
            InfraNode(
                id=nid,
                name=str(nd.get("name", nid)),
                tier=tier,
                pinned=tuple(sorted(_string_list(nd.get("pinned", []), f"{where}.pinned"))),
                hardware_options=tuple(sorted(options, key=lambda o: o.id)),
            )
        )
    if len({n.id for n in nodes}) != len(nodes):
        raise ValidationError("node-ids-unique", "duplicate node ids")
    nodes.sort(key=lambda n: n.id)
    node_ids = {n.id for n in nodes}

    raw_links = _require(data, "links", "infrastructure")
    if not isinstance(raw_links, list):
        raise SchemaError("infrastructure: 'links' must be a list")
    links = []
    low_upper, medium_upper = class_thresholds
    for ld in raw_links:
        ld = _as_mapping(ld, "link")
        lid = _string(_require(ld, "id", "link"), "link.id")
        where = f"link {lid!r}"
        a = _string(_require(ld, "a", where), f"{where}.a")
        b = _string(_require(ld, "b", where), f"{where}.b")
        if a == b:
            raise ValidationError("link-endpoints-distinct", f"{where}: a == b")
        if a not in node_ids or b not in node_ids:
            raise ValidationError(
                "link-endpoints-exist", f"{where}: endpoint not a known node"
            )
        latency = _number(_require(ld, "latencyMs", where), f"{where}.latencyMs")
        bandwidth = _number(
            _require(ld, "bandwidthBytesPerSec", where), f"{where}.bandwidthBytesPerSec"
        )
        price = _number(
            _require(ld, "bandwidthPriceMonthPerBytePerSec", where),
            f"{where}.bandwidthPriceMonthPerBytePerSec",
        )
        if latency < 0:
            raise ValidationError("latency-nonnegative", f"{where}: latencyMs < 0")
        if bandwidth <= 0:
            raise ValidationError("bandwidth-positive", f"{where}: bandwidth <= 0")
        if price < 0:
            raise ValidationError("price-nonnegative", f"{where}: bandwidth price < 0")
        cls = ld.get("latencyClass")
        if cls is None:
            cls = (
                "low"
                if latency < low_upper
                else "medium" if latency < medium_upper else "high"
            )
        elif cls not in LATENCY_CLASSES:
            raise SchemaError(f"{where}: latencyClass must be one of {LATENCY_CLASSES}")
        links.append(
            NetworkLink(
                id=lid,
                a=a,
                b=b,
                latency_ms=latency,
                bandwidth_bytes_per_sec=bandwidth,
                bandwidth_price_month=price,
                latency_class=cls,
            )
        )
    if len({l.id for l in links}) != len(links):
        raise ValidationError("link-ids-unique", "duplicate link ids")
    links.sort(key=lambda l: l.id)

    model = InfrastructureModel(tier_order=tier_order, nodes=tuple(nodes),
                                links=tuple(links))
    _check_connected(model)
    return model


def _check_connected(infra: InfrastructureModel) -> None:
    if not infra.nodes:
        return
    seen = {infra.nodes[0].id}
    frontier = [infra.nodes[0].id]
    while frontier:
        nid = frontier.pop()
        for link in infra.links_of(nid):
            nxt = link.other(nid)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    missing = sorted(n.id for n in infra.nodes if n.id not in seen)
    if missing:
        raise DisconnectedGraph(f"nodes unreachable from the rest: {missing}")


# ---------------------------------------------------------------------------
# Software
# ---------------------------------------------------------------------------


def parse_software(
    doc: str | bytes | Mapping[str, Any],
    infra: InfrastructureModel | None = None,
) -> SoftwareModel:
    """Parse and validate a software document.

    When ``infra`` is given, pinned node references are checked against it.
    """
    data = _as_mapping(doc, "software")
    raw_components = _require(data, "components", "software")
    if not isinstance(raw_components, list) or not raw_components:
        raise SchemaError("software: 'components' must be a non-empty list")
    components = []
    for cd in raw_components:
        cd = _as_mapping(cd, "component")
        cid = _string(_require(cd, "id", "component"), "component.id")
        where = f"component {cid!r}"
        kind = _string(_require(cd, "kind", where), f"{where}.kind")
        if kind not in COMPONENT_KINDS:
            raise SchemaError(f"{where}: kind must be one of {COMPONENT_KINDS}")
        comp = SoftwareComponent(
            id=cid,
            kind=kind,
            output_rate=(
                _number(cd["outputRateBytesPerSec"], f"{where}.outputRateBytesPerSec")
                if "outputRateBytesPerSec" in cd
                else None
            ),
            output_ratio=(
                _number(cd["outputRatio"], f"{where}.outputRatio")
                if "outputRatio" in cd
                else None
            ),
            ref_delay_ms=(
                _number(cd["refDelayMs"], f"{where}.refDelayMs")
                if "refDelayMs" in cd
                else None
            ),
            required_memory_bytes=(
                _number(cd["requiredMemoryBytes"], f"{where}.requiredMemoryBytes")
                if "requiredMemoryBytes" in cd
                else None
            ),
            role=cd.get("role"),
            pinned_node=cd.get("pinnedNode"),
        )
        if comp.role is not None and comp.role not in SERVICE_ROLES:
            raise SchemaError(f"{where}: role must be one of {SERVICE_ROLES}")
        _check_component(comp, infra)
        components.append(comp)
    if len({c.id for c in components}) != len(components):
        raise ValidationError("component-ids-unique", "duplicate component ids")
    components.sort(key=lambda c: c.id)
    by_id = {c.id: c for c in components}

    raw_connections = _require(data, "connections", "software")
    if not isinstance(raw_connections, list):
        raise SchemaError("software: 'connections' must be a list")
    connections = []
    for ed in raw_connections:
        ed = _as_mapping(ed, "connection")
        producer = _string(_require(ed, "producer", "connection"), "connection.producer")
        consumer = _string(_require(ed, "consumer", "connection"), "connection.consumer")
        where = f"connection {producer!r}->{consumer!r}"
        if producer == consumer:
            raise ValidationError("no-self-connection", f"{where}: producer == consumer")
        for end, role_ in ((producer, "producer"), (consumer, "consumer")):
            if end not in by_id:
                raise ValidationError(
                    "connection-endpoints-exist", f"{where}: unknown {role_} {end!r}"
                )
        if by_id[producer].kind == "sink":
            raise ValidationError("producer-not-sink", f"{where}: a sink cannot produce")
        if by_id[consumer].kind == "source":
            raise ValidationError(
                "consumer-not-source", f"{where}: a source cannot consume"
            )
        rate = ed.get("dataRate")
        connections.append(
            Connection(producer, consumer, None if rate is None else float(rate))
        )
    seen_pairs = {(c.producer, c.consumer) for c in connections}
    if len(seen_pairs) != len(connections):
        raise ValidationError("connections-unique", "duplicate connection")
    connections.sort(key=lambda c: (c.producer, c.consumer))

    raw_paths = _require(data, "paths", "software")
    if not isinstance(raw_paths, list) or not raw_paths:
        raise SchemaError("software: 'paths' must be a non-empty list")
    paths = []
    for pd in raw_paths:
        pd = _as_mapping(pd, "path")
        pid = _string(_require(pd, "id", "path"), "path.id")
        where = f"path {pid!r}"
        cls = _string(_require(pd, "class", where), f"{where}.class")
        if cls not in PATH_CLASSES:
            raise SchemaError(f"{where}: class must be one of {PATH_CLASSES}")
        members = _string_list(_require(pd, "members", where), f"{where}.members")
        for m in members:
            if m not in by_id:
                raise ValidationError("path-members-exist", f"{where}: unknown member {m!r}")
        slo = _number(_require(pd, "sloLatencyMs", where), f"{where}.sloLatencyMs")
        if slo <= 0:
            raise ValidationError("slo-positive", f"{where}: sloLatencyMs must be > 0")
        sinks = [m for m in members if by_id[m].kind == "sink"]
        sources = [m for m in members if by_id[m].kind == "source"]
        if len(sinks) != 1:
            raise ValidationError("one-sink-per-path", f"{where}: needs exactly one sink")
        if not sources:
            raise ValidationError("source-per-path", f"{where}: needs >= 1 source")
        paths.append(
            ApplicationPath(
                id=pid,
                path_class=cls,
                members=tuple(sorted(set(members))),
                slo_latency_ms=slo,
            )
        )
    if len({p.id for p in paths}) != len(paths):
        raise ValidationError("path-ids-unique", "duplicate path ids")
    paths.sort(key=lambda p: p.id)

    model = SoftwareModel(
        components=tuple(components),
        connections=tuple(connections),
        paths=tuple(paths),
    )
    _check_acyclic(model)
    _check_membership(model)
    return model


def _check_component(
    comp: SoftwareComponent, infra: InfrastructureModel | None
) -> None:
    where = f"component {comp.id!r}"
    if comp.kind in ("source", "sink"):
        if not comp.pinned_node:
            raise ValidationError(
                "pinned-source-sink", f"{where}: sources and sinks need pinnedNode"
            )
        if infra is not None and not infra.has_node(comp.pinned_node):
            raise ValidationError(
                "pinned-node-exists", f"{where}: unknown node {comp.pinned_node!r}"
            )
    if comp.kind == "service":
        if comp.pinned_node is not None:
            raise ValidationError(
                "services-unpinned", f"{where}: services must not be pinned"
            )
        if comp.output_ratio is None or comp.output_ratio < 0:
            raise ValidationError(
                "output-ratio", f"{where}: services need outputRatio >= 0"
            )
        if comp.ref_delay_ms is None or comp.ref_delay_ms < 0:
            raise ValidationError(
                "ref-delay", f"{where}: services need refDelayMs >= 0"
            )
        if comp.required_memory_bytes is None or comp.required_memory_bytes < 0:
            raise ValidationError(
                "required-memory", f"{where}: services need requiredMemoryBytes >= 0"
            )
    if comp.kind == "source" and comp.output_rate is not None and comp.output_rate <= 0:
        raise ValidationError("output-rate", f"{where}: outputRate must be > 0")


def _check_acyclic(software: SoftwareModel) -> None:
    state: dict[str, int] = {}

    def visit(cid: str, trail: tuple[str, ...]) -> None:
        mark = state.get(cid, 0)
        if mark == 1:
            cycle = trail[trail.index(cid):] + (cid,)
            raise CyclicSoftwareGraph(f"cycle: {' -> '.join(cycle)}")
        if mark == 2:
            return
        state[cid] = 1
        for conn in software.outgoing(cid):
            visit(conn.consumer, trail + (cid,))
        state[cid] = 2

    for comp in software.components:
        visit(comp.id, ())


def _check_membership(software: SoftwareModel) -> None:
    in_paths = {m for p in software.paths for m in p.members}
    orphans = sorted(c.id for c in software.components if c.id not in in_paths)
    if orphans:
        raise ValidationError(
            "component-in-path", f"components belong to no path: {orphans}"
        )


# ---------------------------------------------------------------------------
# Derived rates and chains
# ---------------------------------------------------------------------------


def derive_rates(software: SoftwareModel) -> SoftwareModel:
    """Fill every connection's dataRate from output rates and ratios.

    A service's outgoing rate is outputRatio × (sum of its incoming rates);
    a producer with several consumers sends the full rate on each outgoing
    connection. Idempotent and independent of declaration order.

    Raises:
        MissingRate: a source has no outputRateBytesPerSec.
    """
    out_rate: dict[str, float] = {}
    for comp in software.components:
        if comp.kind == "source":
            if comp.output_rate is None:
                raise MissingRate(f"source {comp.id!r} lacks outputRateBytesPerSec")
            out_rate[comp.id] = comp.output_rate

    resolved: dict[str, float] = dict(out_rate)

    def rate_of(cid: str) -> float:
        if cid in resolved:
            return resolved[cid]
        comp = software.component(cid)
        incoming = sum(rate_of(c.producer) for c in software.incoming(cid))
        value = (comp.output_ratio or 0.0) * incoming
        resolved[cid] = value
        return value

    connections = tuple(
        replace(conn, data_rate=rate_of(conn.producer))
        for conn in software.connections
    )
    return SoftwareModel(
        components=software.components, connections=connections, paths=software.paths
    )


def source_chains(
    software: SoftwareModel, path: ApplicationPath
) -> dict[str, tuple[tuple[Connection, ...], ...]]:
    """Enumerate each source's connection chains to the path's sink.

    Returns a map source id → tuple of chains, where a chain is the ordered
    connections of one source→…→sink walk staying inside the path's members.
    """
    members = set(path.members)
    sink = next(m for m in path.members
                if software.component(m).kind == "sink")
    chains: dict[str, tuple[tuple[Connection, ...], ...]] = {}

    def walk(cid: str, acc: tuple[Connection, ...]) -> Iterable[tuple[Connection, ...]]:
        if cid == sink:
            yield acc
            return
        for conn in software.outgoing(cid):
            if conn.consumer in members:
                yield from walk(conn.consumer, acc + (conn,))

    for member in path.members:
        if software.component(member).kind == "source":
            chains[member] = tuple(walk(member, ()))
    return chains


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def load_models(
    infra_doc: str | bytes | Mapping[str, Any],
    software_doc: str | bytes | Mapping[str, Any],
    *,
    class_thresholds: tuple[float, float] = DEFAULT_CLASS_THRESHOLDS,
    with_rates: bool = True,
) -> tuple[InfrastructureModel, SoftwareModel]:
    """Load, validate, and (by default) derive rates for both models."""
    infra = parse_infrastructure(infra_doc, class_thresholds=class_thresholds)
    software = parse_software(software_doc, infra)
    if with_rates:
        software = derive_rates(software)
    return infra, software
