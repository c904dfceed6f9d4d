"""Candidate pruning rules applied before the design space is enumerated.

Four rules shrink each service's candidate node set, each switchable via a
:class:`RuleSet`:

- R1 — event-processing services sit on a minimum-hop route between their
  path's sources and sink, or strictly cloud-ward of one; optionally, nodes
  whose min-hop route to a source or the sink forces a high-latency link are
  dropped.
- R2 — preprocessors on data-analytics paths stay at or below the lowest
  tier their downstream heavy services may occupy, so data volume shrinks
  before expensive links.
- R3 — heavy-analytics services with no upstream preprocessor stay at or
  above their sink's tier (cloud-ward placement); with a preprocessor the
  relative order is enforced per placement instead (see ``ordering_ok``).
- R4 — an explicit per-path tier ceiling.

Per-service overrides apply last: an ``allow`` list replaces the computed
set, a ``deny`` list subtracts from it. Every exclusion is recorded in a
trace so the complement of each candidate set is fully justified.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping

from .enumeration import CandidateSets, DesignOption
from .errors import (
    EmptyCandidates,
    SchemaError,
    UnknownPathClass,
    ValidationError,
)
from .model import (
    ApplicationPath,
    InfrastructureModel,
    SoftwareComponent,
    SoftwareModel,
    source_chains,
)
from .simulator import host_of, route

EVENT_PROCESSING = "event-processing"
DATA_ANALYTICS = "data-analytics"

RULE_SHORTEST_PATH = "shortest-path"
RULE_HIGH_LATENCY = "high-latency-link"
RULE_PREPROCESSOR_TIER = "preprocessor-tier"
RULE_HEAVY_TIER = "heavy-tier"
RULE_ZONE_CEILING = "zone-ceiling"
RULE_OVERRIDE_ALLOW = "override-allow"
RULE_OVERRIDE_DENY = "override-deny"


# ---------------------------------------------------------------------------
# RuleSet
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleSet:
    """Switchboard for the pruning rules.

    The zero-argument form disables every rule, making
    :func:`apply_best_practices` the identity on the unrestricted space.
    """

    placement_rules: bool = False
    zone_ceiling: Mapping[str, str] = field(default_factory=dict)
    forbid_high_latency_links: Mapping[str, bool] = field(default_factory=dict)
    link_reuse_threshold: int = 2
    link_reuse_scope: str = "option"
    ordering_constraints: bool = False
    overrides: Mapping[str, Mapping[str, tuple[str, ...]]] = field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        if self.link_reuse_threshold < 1:
            raise ValidationError(
                "linkReuseThreshold",
                f"linkReuseThreshold must be ≥ 1, got {self.link_reuse_threshold}",
            )
        if self.link_reuse_scope not in ("option", "chain"):
            raise ValidationError(
                "linkReuseScope",
                f"linkReuseScope must be 'option' or 'chain', "
                f"got {self.link_reuse_scope!r}",
            )
        for sid, spec in self.overrides.items():
            for key in spec:
                if key not in ("allow", "deny"):
                    raise SchemaError(
                        f"override for {sid!r} has unknown key {key!r} "
                        "(expected 'allow' or 'deny')"
                    )

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any] | None) -> "RuleSet":
        """Build a RuleSet from its configuration-document form."""
        doc = dict(doc or {})
        known = {
            "placementRules",
            "zoneCeiling",
            "forbidHighLatencyLinks",
            "linkReuseThreshold",
            "linkReuseScope",
            "orderingConstraints",
            "overrides",
        }
        unknown = set(doc) - known
        if unknown:
            raise SchemaError(f"unknown rule keys: {sorted(unknown)}")
        overrides = {
            sid: {
                key: tuple(values)
                for key, values in (spec or {}).items()
            }
            for sid, spec in (doc.get("overrides") or {}).items()
        }
        return cls(
            placement_rules=bool(doc.get("placementRules", False)),
            zone_ceiling=dict(doc.get("zoneCeiling") or {}),
            forbid_high_latency_links=dict(doc.get("forbidHighLatencyLinks") or {}),
            link_reuse_threshold=int(doc.get("linkReuseThreshold", 2)),
            link_reuse_scope=str(doc.get("linkReuseScope", "option")),
            ordering_constraints=bool(doc.get("orderingConstraints", False)),
            overrides=overrides,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "placementRules": self.placement_rules,
            "zoneCeiling": dict(self.zone_ceiling),
            "forbidHighLatencyLinks": dict(self.forbid_high_latency_links),
            "linkReuseThreshold": self.link_reuse_threshold,
            "linkReuseScope": self.link_reuse_scope,
            "orderingConstraints": self.ordering_constraints,
            "overrides": {
                sid: {k: sorted(v) for k, v in spec.items()}
                for sid, spec in sorted(self.overrides.items())
            },
        }

    def validate_references(
        self, infra: InfrastructureModel, software: SoftwareModel
    ) -> None:
        """Check that overrides and ceilings name real entities."""
        service_ids = {c.id for c in software.services()}
        path_ids = {p.id for p in software.paths}
        for sid, spec in self.overrides.items():
            if sid not in service_ids:
                raise ValidationError(
                    "overrides", f"override names unknown service {sid!r}"
                )
            for key, values in spec.items():
                for nid in values:
                    if not infra.has_node(nid):
                        raise ValidationError(
                            "overrides",
                            f"override {key!r} for {sid!r} names unknown "
                            f"node {nid!r}",
                        )
        for pid, label in self.zone_ceiling.items():
            if pid not in path_ids:
                raise ValidationError(
                    "zoneCeiling", f"ceiling names unknown path {pid!r}"
                )
            if label not in infra.tier_order:
                raise ValidationError(
                    "zoneCeiling",
                    f"ceiling for {pid!r} names unknown tier {label!r}",
                )
        for pid in self.forbid_high_latency_links:
            if pid not in path_ids:
                raise ValidationError(
                    "forbidHighLatencyLinks",
                    f"flag names unknown path {pid!r}",
                )


# ---------------------------------------------------------------------------
# Exclusion trace
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExclusionRecord:
    """Why one node was removed from one service's candidate set."""

    service: str
    node: str
    rule: str
    reason: str

    def render(self) -> str:
        return f"{self.service}: {self.node} excluded [{self.rule}] {self.reason}"


class PruneResult(Mapping[str, frozenset]):
    """Candidate sets plus the exclusion trace that justifies them.

    Behaves as a mapping of service id → frozenset of node ids, so it can be
    passed anywhere plain candidate sets are expected.
    """

    def __init__(
        self,
        candidates: Mapping[str, frozenset],
        trace: tuple[ExclusionRecord, ...],
    ) -> None:
        self._candidates = dict(candidates)
        self.trace = trace

    def __getitem__(self, key: str) -> frozenset:
        return self._candidates[key]

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._candidates))

    def __len__(self) -> int:
        return len(self._candidates)

    @property
    def candidates(self) -> dict[str, frozenset]:
        return dict(self._candidates)

    def render_trace(self) -> str:
        """Line-oriented justification report covering every exclusion."""
        lines = [r.render() for r in self.trace]
        return "\n".join(lines) + ("\n" if lines else "")

    def to_dict(self) -> dict[str, Any]:
        return {
            "candidates": {s: sorted(ns) for s, ns in sorted(self._candidates.items())},
            "trace": [
                {"service": r.service, "node": r.node, "rule": r.rule,
                 "reason": r.reason}
                for r in self.trace
            ],
        }


# ---------------------------------------------------------------------------
# Graph helpers (hop counts, not latency: pruning precedes numeric data)
# ---------------------------------------------------------------------------


def _hop_distances(
    infra: InfrastructureModel, start: str, *, skip_high: bool = False
) -> dict[str, int]:
    """BFS hop distances from ``start``, optionally avoiding high-latency links."""
    dist = {start: 0}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for link in infra.links_of(current):
            if skip_high and link.latency_class == "high":
                continue
            nxt = link.other(current)
            if nxt not in dist:
                dist[nxt] = dist[current] + 1
                queue.append(nxt)
    return dist


def _min_hop_nodes(infra: InfrastructureModel, src: str, dst: str) -> set[str]:
    """Nodes lying on at least one minimum-hop path from src to dst."""
    d_src = _hop_distances(infra, src)
    d_dst = _hop_distances(infra, dst)
    if dst not in d_src:
        raise ValidationError(
            "connectivity", f"no route between {src!r} and {dst!r}"
        )
    total = d_src[dst]
    return {
        n
        for n in d_src
        if n in d_dst and d_src[n] + d_dst[n] == total
    }


def _cloudward_extension(
    infra: InfrastructureModel, seed: set[str]
) -> set[str]:
    """Nodes reachable from the seed by strictly tier-increasing hops."""
    tier = infra.tier_index
    reached = set(seed)
    queue = deque(seed)
    while queue:
        current = queue.popleft()
        for link in infra.links_of(current):
            nxt = link.other(current)
            if nxt not in reached and tier(nxt) > tier(current):
                reached.add(nxt)
                queue.append(nxt)
    return reached - set(seed)


def _clean_min_hop(
    infra: InfrastructureModel, anchors: list[str], candidate: str
) -> bool:
    """True if min-hop legs anchor→candidate avoid high-latency links.

    A candidate survives the high-latency screen only when, for every
    anchor (source or sink), a route of minimum hop count exists that uses
    no link with latencyClass ``high``.
    """
    d_full = {a: _hop_distances(infra, a) for a in anchors}
    d_clean = {a: _hop_distances(infra, a, skip_high=True) for a in anchors}
    for a in anchors:
        full = d_full[a].get(candidate)
        clean = d_clean[a].get(candidate)
        if full is None:
            return False
        if clean is None or clean > full:
            return False
    return True


# ---------------------------------------------------------------------------
# Per-service candidate computation
# ---------------------------------------------------------------------------


def _pinned_host(component: SoftwareComponent) -> str:
    if component.pinned_node is None:
        raise ValidationError(
            "pinned", f"component {component.id!r} has no pinned node"
        )
    return component.pinned_node


def _path_sources_sink(
    software: SoftwareModel, path: ApplicationPath
) -> tuple[list[SoftwareComponent], SoftwareComponent]:
    members = [software.component(m) for m in path.members]
    sources = sorted(
        (c for c in members if c.kind == "source"), key=lambda c: c.id
    )
    sinks = [c for c in members if c.kind == "sink"]
    return sources, sinks[0]


def _upstream_within_path(
    software: SoftwareModel, path: ApplicationPath, service_id: str
) -> set[str]:
    """Member component ids that can reach ``service_id`` along connections."""
    members = set(path.members)
    upstream: set[str] = set()
    queue = deque([service_id])
    while queue:
        current = queue.popleft()
        for conn in software.incoming(current):
            if conn.producer in members and conn.producer not in upstream:
                upstream.add(conn.producer)
                queue.append(conn.producer)
    return upstream


def _downstream_within_path(
    software: SoftwareModel, path: ApplicationPath, service_id: str
) -> set[str]:
    members = set(path.members)
    downstream: set[str] = set()
    queue = deque([service_id])
    while queue:
        current = queue.popleft()
        for conn in software.outgoing(current):
            if conn.consumer in members and conn.consumer not in downstream:
                downstream.add(conn.consumer)
                queue.append(conn.consumer)
    return downstream


def _rule_event_processing(
    service: SoftwareComponent,
    path: ApplicationPath,
    infra: InfrastructureModel,
    software: SoftwareModel,
    rules: RuleSet,
    exclusions: dict[str, tuple[str, str]],
) -> set[str]:
    """R1: min-hop corridor between sources and sink, plus cloud-ward slack."""
    sources, sink = _path_sources_sink(software, path)
    sink_host = _pinned_host(sink)
    source_hosts = sorted({_pinned_host(s) for s in sources})
    corridor: set[str] = set()
    for src_host in source_hosts:
        corridor |= _min_hop_nodes(infra, src_host, sink_host)
    extension = _cloudward_extension(infra, corridor)
    candidates = corridor | extension
    for node in infra.nodes:
        if node.id not in candidates:
            exclusions.setdefault(
                node.id,
                (
                    RULE_SHORTEST_PATH,
                    "not on a minimum-hop source→sink route nor strictly "
                    "cloud-ward of one",
                ),
            )
    if rules.forbid_high_latency_links.get(path.id, False):
        anchors = source_hosts + [sink_host]
        for nid in sorted(candidates):
            if not _clean_min_hop(infra, anchors, nid):
                candidates.discard(nid)
                exclusions[nid] = (
                    RULE_HIGH_LATENCY,
                    "every minimum-hop route through this node crosses a "
                    "high-latency link",
                )
    return candidates


def _rule_heavy_analytics(
    service: SoftwareComponent,
    path: ApplicationPath,
    infra: InfrastructureModel,
    software: SoftwareModel,
    exclusions: dict[str, tuple[str, str]],
) -> set[str]:
    """R3: cloud-ward placement relative to the path's data consumers.

    With an upstream preprocessor in the path the relative order is enforced
    per placement (``ordering_ok``), so no static bound applies here; without
    one, the service must sit at or above its sink's tier.
    """
    upstream = _upstream_within_path(software, path, service.id)
    has_preprocessor = any(
        software.component(u).role == "preprocessor"
        and software.component(u).is_service
        for u in upstream
    )
    if has_preprocessor:
        return {n.id for n in infra.nodes}
    _, sink = _path_sources_sink(software, path)
    floor = infra.tier_index(_pinned_host(sink))
    candidates = {n.id for n in infra.nodes if infra.tier_index(n.id) >= floor}
    for node in infra.nodes:
        if node.id not in candidates:
            exclusions.setdefault(
                node.id,
                (
                    RULE_HEAVY_TIER,
                    f"tier below the sink's tier "
                    f"({infra.tier_order[floor]}); heavy analytics places "
                    "cloud-ward",
                ),
            )
    return candidates


def _rule_preprocessor(
    service: SoftwareComponent,
    path: ApplicationPath,
    infra: InfrastructureModel,
    software: SoftwareModel,
    rules: RuleSet,
    exclusions: dict[str, tuple[str, str]],
) -> set[str]:
    """R2: stay at or below the lowest tier the downstream heavies may use."""
    downstream = _downstream_within_path(software, path, service.id)
    heavies = [
        software.component(d)
        for d in sorted(downstream)
        if software.component(d).is_service
        and software.component(d).role == "heavy-analytics"
    ]
    if not heavies:
        return {n.id for n in infra.nodes}
    ceiling = None
    for heavy in heavies:
        finals = candidate_nodes(heavy, path, infra, software, rules)
        heavy_min = min(infra.tier_index(n) for n in finals)
        ceiling = heavy_min if ceiling is None else min(ceiling, heavy_min)
    candidates = {
        n.id for n in infra.nodes if infra.tier_index(n.id) <= ceiling
    }
    for node in infra.nodes:
        if node.id not in candidates:
            exclusions.setdefault(
                node.id,
                (
                    RULE_PREPROCESSOR_TIER,
                    f"tier above the downstream heavy-analytics minimum "
                    f"({infra.tier_order[ceiling]}); preprocessors stay "
                    "edge-ward to cut data volume",
                ),
            )
    return candidates


def _candidate_nodes_traced(
    service: SoftwareComponent,
    path: ApplicationPath,
    infra: InfrastructureModel,
    software: SoftwareModel,
    rules: RuleSet,
) -> tuple[set[str], list[ExclusionRecord]]:
    if service.id not in path.members:
        raise ValidationError(
            "membership", f"service {service.id!r} is not on path {path.id!r}"
        )
    if path.path_class not in (EVENT_PROCESSING, DATA_ANALYTICS):
        raise UnknownPathClass(
            f"path {path.id!r} has unknown class {path.path_class!r}"
        )
    exclusions: dict[str, tuple[str, str]] = {}
    candidates = {n.id for n in infra.nodes}
    if rules.placement_rules:
        if path.path_class == EVENT_PROCESSING:
            candidates = _rule_event_processing(
                service, path, infra, software, rules, exclusions
            )
        elif service.role == "preprocessor":
            candidates = _rule_preprocessor(
                service, path, infra, software, rules, exclusions
            )
        elif service.role == "heavy-analytics":
            candidates = _rule_heavy_analytics(
                service, path, infra, software, exclusions
            )
    ceiling_label = rules.zone_ceiling.get(path.id)
    if ceiling_label is not None:
        if ceiling_label not in infra.tier_order:
            raise ValidationError(
                "zoneCeiling",
                f"ceiling for {path.id!r} names unknown tier {ceiling_label!r}",
            )
        cap = infra.tier_order.index(ceiling_label)
        for nid in sorted(candidates):
            if infra.tier_index(nid) > cap:
                candidates.discard(nid)
                exclusions[nid] = (
                    RULE_ZONE_CEILING,
                    f"tier above the path ceiling ({ceiling_label})",
                )
    override = rules.overrides.get(service.id, {})
    allow = override.get("allow")
    if allow is not None:
        allowed = set(allow)
        for nid in allowed:
            if not infra.has_node(nid):
                raise ValidationError(
                    "overrides",
                    f"allow override for {service.id!r} names unknown "
                    f"node {nid!r}",
                )
        for nid in sorted(candidates - allowed):
            exclusions[nid] = (
                RULE_OVERRIDE_ALLOW,
                "not in the explicit allow list for this service",
            )
        for nid in sorted(allowed - candidates):
            exclusions.pop(nid, None)
        candidates = allowed
    for nid in override.get("deny", ()):
        if not infra.has_node(nid):
            raise ValidationError(
                "overrides",
                f"deny override for {service.id!r} names unknown node {nid!r}",
            )
        if nid in candidates:
            candidates.discard(nid)
        exclusions[nid] = (
            RULE_OVERRIDE_DENY,
            "explicitly denied for this service",
        )
    if not candidates:
        raise EmptyCandidates(
            service.id,
            f"no candidate nodes remain for service {service.id!r} on "
            f"path {path.id!r}",
        )
    records = [
        ExclusionRecord(service.id, nid, rule, reason)
        for nid, (rule, reason) in sorted(exclusions.items())
    ]
    return candidates, records


def candidate_nodes(
    service: SoftwareComponent,
    path: ApplicationPath,
    infra: InfrastructureModel,
    software: SoftwareModel,
    rules: RuleSet,
) -> set[str]:
    """Candidate node ids for one service with respect to one path.

    Raises:
        UnknownPathClass: the path declares an unrecognized class.
        EmptyCandidates: no node survives the rules and overrides.
    """
    candidates, _ = _candidate_nodes_traced(service, path, infra, software, rules)
    return candidates


def apply_best_practices(
    infra: InfrastructureModel,
    software: SoftwareModel,
    rules: RuleSet,
) -> PruneResult:
    """Per-service candidate sets with a full justification trace.

    Services on several paths receive the intersection of their per-path
    sets. The trace covers exactly the complement of each final set — every
    excluded (service, node) pair appears once, naming the rule responsible.

    Raises:
        EmptyCandidates: some service ends with no candidates.
    """
    rules.validate_references(infra, software)
    candidates: dict[str, frozenset] = {}
    trace: list[ExclusionRecord] = []
    all_nodes = frozenset(n.id for n in infra.nodes)
    for service in sorted(software.services(), key=lambda c: c.id):
        paths = software.paths_of(service.id)
        if not paths:
            final = set(all_nodes)
            exclusions: dict[str, ExclusionRecord] = {}
            override = rules.overrides.get(service.id, {})
            allow = override.get("allow")
            if allow is not None:
                final = set(allow)
                for nid in sorted(all_nodes - final):
                    exclusions[nid] = ExclusionRecord(
                        service.id, nid, RULE_OVERRIDE_ALLOW,
                        "not in the explicit allow list for this service",
                    )
            for nid in override.get("deny", ()):
                final.discard(nid)
                exclusions[nid] = ExclusionRecord(
                    service.id, nid, RULE_OVERRIDE_DENY,
                    "explicitly denied for this service",
                )
            if not final:
                raise EmptyCandidates(
                    service.id,
                    f"no candidate nodes remain for service {service.id!r}",
                )
            candidates[service.id] = frozenset(final)
            trace.extend(exclusions[n] for n in sorted(exclusions))
            continue
        final_set: set[str] | None = None
        first_record: dict[str, ExclusionRecord] = {}
        for path in sorted(paths, key=lambda p: p.id):
            per_path, records = _candidate_nodes_traced(
                service, path, infra, software, rules
            )
            final_set = per_path if final_set is None else final_set & per_path
            for record in records:
                first_record.setdefault(record.node, record)
        assert final_set is not None
        if not final_set:
            raise EmptyCandidates(
                service.id,
                f"paths {sorted(p.id for p in paths)} leave no common "
                f"candidate for service {service.id!r}",
            )
        candidates[service.id] = frozenset(final_set)
        trace.extend(
            first_record[n]
            for n in sorted(first_record)
            if n not in final_set
        )
    return PruneResult(candidates, tuple(trace))


# ---------------------------------------------------------------------------
# Option- and placement-level checks
# ---------------------------------------------------------------------------


def link_reuse_ok(
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
    rules: RuleSet | None = None,
) -> bool:
    """True when no undirected link is traversed too often.

    With scope ``option`` (the default) traversals are counted over the
    union of all routed connections; with scope ``chain`` the count resets
    per source→sink chain of each path, bounding reuse per flow instead of
    globally.
    """
    rules = rules or RuleSet()
    threshold = rules.link_reuse_threshold
    if rules.link_reuse_scope == "option":
        counts: dict[str, int] = {}
        for conn in software.connections:
            flow = route(conn, option, infra, software)
            for link_id in flow.links:
                counts[link_id] = counts.get(link_id, 0) + 1
                if counts[link_id] > threshold:
                    return False
        return True
    flow_links = {
        (c.producer, c.consumer): route(c, option, infra, software).links
        for c in software.connections
    }
    for path in software.paths:
        chains = source_chains(software, path)
        for source_id in sorted(chains):
            for chain in chains[source_id]:
                counts = {}
                for conn in chain:
                    for link_id in flow_links[(conn.producer, conn.consumer)]:
                        counts[link_id] = counts.get(link_id, 0) + 1
                        if counts[link_id] > threshold:
                            return False
    return True


def ordering_ok(
    placement: Mapping[str, str],
    infra: InfrastructureModel,
    software: SoftwareModel,
    rules: RuleSet,
) -> bool:
    """Preprocessors must not sit above their downstream heavy services."""
    if not rules.ordering_constraints:
        return True
    for path in software.paths:
        if path.path_class != DATA_ANALYTICS:
            continue
        for member in path.members:
            comp = software.component(member)
            if not comp.is_service or comp.role != "preprocessor":
                continue
            if member not in placement:
                continue
            pre_tier = infra.tier_index(placement[member])
            for down in _downstream_within_path(software, path, member):
                target = software.component(down)
                if (
                    target.is_service
                    and target.role == "heavy-analytics"
                    and down in placement
                    and pre_tier > infra.tier_index(placement[down])
                ):
                    return False
    return True
