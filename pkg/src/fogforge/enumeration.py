"""Lazy enumeration and counting of the design-option space.

A design option is a placement of every service onto a node plus a hardware
choice for each node that actually hosts a service. Two counting conventions
exist and both are exposed:

- ``distinct``: each (placement, hardware-of-used-nodes) combination counted
  once — exactly the items :func:`enumerate_options` yields.
- ``cartesian``: placements × one hardware choice PER NODE of the whole
  infrastructure, used or not. Stage counts reported by the pipeline funnel
  use this convention (it keeps the headline totals of the bundled case study
  consistent: 32,768 × 216 and 864 × 216).

Enumeration order is deterministic: lexicographic by service id, then node
id, then hardware option id; memory use is independent of the space size.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping

from .errors import EmptySpace, SchemaError, ValidationError
from .model import InfrastructureModel, SoftwareModel

#: Candidate sets: service id → allowed node ids.
CandidateSets = Mapping[str, "tuple[str, ...] | list[str] | set[str]"]

PlacementFilter = Callable[[dict[str, str]], bool]


@dataclass(frozen=True)
class DesignOption:
    """One service→node mapping plus hardware choices for used nodes."""

    service_placement: "tuple[tuple[str, str], ...]"
    hardware_selection: "tuple[tuple[str, str], ...]"

    @classmethod
    def make(
        cls,
        placement: Mapping[str, str],
        hardware: Mapping[str, str] | None = None,
    ) -> "DesignOption":
        return cls(
            service_placement=tuple(sorted(placement.items())),
            hardware_selection=tuple(sorted((hardware or {}).items())),
        )

    @property
    def placement(self) -> dict[str, str]:
        return dict(self.service_placement)

    @property
    def hardware(self) -> dict[str, str]:
        return dict(self.hardware_selection)

    @property
    def used_nodes(self) -> tuple[str, ...]:
        return tuple(sorted({n for _, n in self.service_placement}))

    def sort_key(self) -> tuple:
        """Key reproducing the deterministic enumeration order."""
        return (
            tuple(n for _, n in self.service_placement),
            tuple(o for _, o in self.hardware_selection),
        )

    @property
    def key(self) -> str:
        """Stable human-readable identifier for artifacts and the CLI."""
        placement = ",".join(f"{s}={n}" for s, n in self.service_placement)
        hardware = ",".join(f"{n}={o}" for n, o in self.hardware_selection)
        return f"{placement}|{hardware}" if hardware else placement

    @classmethod
    def from_key(cls, key: str) -> "DesignOption":
        placement_part, _, hardware_part = key.partition("|")

        def parse(part: str) -> dict[str, str]:
            out: dict[str, str] = {}
            if not part:
                return out
            for item in part.split(","):
                left, sep, right = item.partition("=")
                if not sep or not left or not right:
                    raise SchemaError(f"malformed option key segment {item!r}")
                out[left] = right
            return out

        return cls.make(parse(placement_part), parse(hardware_part))

    def to_dict(self) -> dict[str, Any]:
        return {
            "servicePlacement": self.placement,
            "hardwareSelection": self.hardware,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "DesignOption":
        placement = doc.get("servicePlacement")
        if not isinstance(placement, Mapping):
            raise SchemaError("option: 'servicePlacement' must be a mapping")
        hardware = doc.get("hardwareSelection", {})
        if not isinstance(hardware, Mapping):
            raise SchemaError("option: 'hardwareSelection' must be a mapping")
        return cls.make(dict(placement), dict(hardware))


@dataclass
class _Domains:
    services: list[str]
    nodes_per_service: list[list[str]]
    hardware_ids: dict[str, list[str]] = field(default_factory=dict)


def _domains(
    infra: InfrastructureModel,
    software: SoftwareModel,
    candidates: CandidateSets,
) -> _Domains:
    service_ids = sorted(c.id for c in software.services())
    missing = [s for s in service_ids if s not in candidates]
    if missing:
        raise ValidationError(
            "candidates-cover-services", f"no candidate set for services {missing}"
        )
    per_service: list[list[str]] = []
    for sid in service_ids:
        nodes = sorted(set(candidates[sid]))
        for nid in nodes:
            if not infra.has_node(nid):
                raise ValidationError(
                    "candidate-nodes-exist", f"{sid}: unknown node {nid!r}"
                )
        per_service.append(nodes)
    hardware = {
        n.id: [o.id for o in n.hardware_options] for n in infra.nodes
    }
    return _Domains(service_ids, per_service, hardware)


def validate_option(
    option: DesignOption,
    infra: InfrastructureModel,
    software: SoftwareModel,
) -> None:
    """Check an externally supplied option against the models.

    Raises:
        ValidationError: unplaced services, unknown nodes/options, or a
            hardware selection that does not match the used-node set.
    """
    placement = option.placement
    service_ids = sorted(c.id for c in software.services())
    unplaced = [s for s in service_ids if s not in placement]
    if unplaced:
        raise ValidationError("all-services-placed", f"unplaced services: {unplaced}")
    unknown = [s for s in placement if s not in service_ids]
    if unknown:
        raise ValidationError("placed-are-services", f"not services: {unknown}")
    for sid, nid in placement.items():
        if not infra.has_node(nid):
            raise ValidationError(
                "placement-node-exists", f"{sid} placed on unknown node {nid!r}"
            )
    hardware = option.hardware
    used = set(option.used_nodes)
    extra = sorted(set(hardware) - used)
    if extra:
        raise ValidationError(
            "hardware-for-used-nodes", f"hardware selected for unused nodes: {extra}"
        )
    missing = sorted(used - set(hardware))
    if missing:
        raise ValidationError(
            "hardware-for-used-nodes", f"used nodes without hardware: {missing}"
        )
    for nid, oid in hardware.items():
        node = infra.node(nid)
        if not any(o.id == oid for o in node.hardware_options):
            raise ValidationError(
                "hardware-option-exists", f"node {nid!r} has no option {oid!r}"
            )


def enumerate_options(
    infra: InfrastructureModel,
    software: SoftwareModel,
    candidates: CandidateSets,
    *,
    hardware: bool = True,
    placement_filter: PlacementFilter | None = None,
) -> Iterator[DesignOption]:
    """Yield every design option exactly once, in deterministic order.

    Args:
        hardware: when False, yield placements only (empty hardware
            selection) — one item per placement.
        placement_filter: optional predicate; placements failing it are
            skipped together with all their hardware expansions.

    Raises:
        EmptySpace: some candidate set is empty.
    """
    dom = _domains(infra, software, candidates)
    empty = [s for s, nodes in zip(dom.services, dom.nodes_per_service) if not nodes]
    if empty:
        raise EmptySpace(f"empty candidate sets for {empty}")
    for combo in itertools.product(*dom.nodes_per_service):
        placement = dict(zip(dom.services, combo))
        if placement_filter is not None and not placement_filter(placement):
            continue
        if not hardware:
            yield DesignOption.make(placement)
            continue
        used = sorted(set(combo))
        for hw_combo in itertools.product(*(dom.hardware_ids[n] for n in used)):
            yield DesignOption.make(placement, dict(zip(used, hw_combo)))


def count_placements(
    infra: InfrastructureModel,
    software: SoftwareModel,
    candidates: CandidateSets,
    *,
    placement_filter: PlacementFilter | None = None,
) -> int:
    """Number of service→node placements (no hardware dimension)."""
    dom = _domains(infra, software, candidates)
    if placement_filter is None:
        return math.prod(len(nodes) for nodes in dom.nodes_per_service)
    total = 0
    for combo in itertools.product(*dom.nodes_per_service):
        if placement_filter(dict(zip(dom.services, combo))):
            total += 1
    return total


def count_options(
    infra: InfrastructureModel,
    software: SoftwareModel,
    candidates: CandidateSets,
    *,
    convention: str = "cartesian",
    placement_filter: PlacementFilter | None = None,
) -> int:
    """Count design options without enumerating hardware combinations.

    ``convention="cartesian"`` multiplies placements by one hardware choice
    per node of the infrastructure (the funnel/report convention);
    ``convention="distinct"`` counts what :func:`enumerate_options` yields
    (hardware over used nodes only, duplicate-free). Empty spaces count 0;
    a model with zero services counts 1 (the empty placement).
    """
    dom = _domains(infra, software, candidates)
    if convention == "cartesian":
        multiplier = math.prod(len(ids) for ids in dom.hardware_ids.values())
        placements = count_placements(
            infra, software, candidates, placement_filter=placement_filter
        )
        return placements * multiplier
    if convention != "distinct":
        raise ValueError(f"unknown counting convention {convention!r}")
    total = 0
    for combo in itertools.product(*dom.nodes_per_service):
        if placement_filter is not None and not placement_filter(
            dict(zip(dom.services, combo))
        ):
            continue
        total += math.prod(len(dom.hardware_ids[n]) for n in set(combo))
    return total


def unrestricted_candidates(
    infra: InfrastructureModel, software: SoftwareModel
) -> dict[str, tuple[str, ...]]:
    """Every node allowed for every service."""
    all_nodes = tuple(n.id for n in infra.nodes)
    return {c.id: all_nodes for c in software.services()}
