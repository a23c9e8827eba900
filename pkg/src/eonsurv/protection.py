"""Provisioning under dedicated, shared, and intermediate-node shared protection.

Each accepted request gets a primary lightpath and a link-disjoint backup.

* DPP reserves the backup exclusively and pre-cross-connects it.
* SPP reserves backup slots that may be shared by connections whose
  primaries are mutually link-disjoint.
* INCB provisions like SPP, additionally designating the backup node nearest
  its km-midpoint (where setup messages from both ends meet) and computing,
  without reserving, a second backup route (the PBR) for the case where a
  primary and its backup fail together.

Provisioning is atomic: a rejected request leaves the grid untouched.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, MutableMapping, Optional

from eonsurv import spectrum, timing
from eonsurv.spectrum import Mode, SlotBlock, SpectrumGrid
from eonsurv.timing import RecoveryTime, TimingParams
from eonsurv.topology import Path, Topology, disjoint_pair, shortest_path


class Scheme(str, enum.Enum):
    DPP = "dpp"
    SPP = "spp"
    INCB = "incb"


class Rejection(str, enum.Enum):
    NO_DISJOINT_ROUTE = "no-disjoint-route"
    NO_SPECTRUM_PRIMARY = "no-spectrum-primary"
    NO_SPECTRUM_BACKUP = "no-spectrum-backup"
    RTC_VIOLATION = "rtc-violation"


@dataclass(frozen=True)
class Request:
    id: int
    source: int
    destination: int
    fr: int

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError(f"request {self.id}: source equals destination")
        if self.fr < 1:
            raise ValueError(f"request {self.id}: fr must be >= 1")


@dataclass(frozen=True)
class Connection:
    request: Request
    scheme: Scheme
    primary: Path
    primary_block: SlotBlock
    backup: Path
    backup_block: SlotBlock
    worst_rt: RecoveryTime
    pbr: Optional[Path] = None
    intermediate: Optional[int] = None

    @property
    def id(self) -> int:
        return self.request.id


@dataclass(frozen=True)
class ProvisionOutcome:
    request: Request
    connection: Optional[Connection] = None
    reason: Optional[Rejection] = None

    def __post_init__(self):
        if (self.connection is None) == (self.reason is None):
            raise ValueError("exactly one of connection and reason must be set")

    @property
    def accepted(self) -> bool:
        return self.connection is not None


def sharable(a: Connection, b: Connection) -> bool:
    """Backup spectrum may be shared iff the primaries are link-disjoint."""
    if a.id == b.id:
        return False
    if Scheme.DPP in (a.scheme, b.scheme):
        return False
    return not (a.primary.link_set & b.primary.link_set)


def designate_intermediate(backup: Path) -> int:
    """Interior node of ``backup`` closest to its km-midpoint.

    Ties go to the source side; a single-link backup has no interior node
    and yields its destination.
    """
    if backup.hops < 2:
        return backup.destination
    cum = backup.cumulative_km()
    total = cum[-1]
    best = min(range(1, backup.hops), key=lambda i: (abs(cum[i] - (total - cum[i])), i))
    return backup.nodes[best]


def halves(path: Path, node: int) -> tuple[tuple[int, float], tuple[int, float]]:
    """(n, km) of the two segments of ``path`` either side of ``node``."""
    k = path.nodes.index(node)
    out = []
    for seg in (path.subpath(0, k), path.subpath(k, path.hops)):
        out.append((seg.intermediate_count, seg.length_km))
    return out[0], out[1]


def recovery_time(scheme: Scheme, params: TimingParams, route: Path,
                  intermediate: Optional[int] = None) -> RecoveryTime:
    """Recovery time of switching onto ``route`` under ``scheme``."""
    if scheme is Scheme.DPP:
        return timing.rt_dpp(params, route.intermediate_count, route.length_km)
    if scheme is Scheme.SPP:
        return timing.rt_spp(params, route.intermediate_count, route.length_km)
    if intermediate is None:
        intermediate = designate_intermediate(route)
    return timing.rt_incb(params, *halves(route, intermediate))


def sharing_predicate(scheme: Scheme, primary: Path, connections: Mapping[int, Connection]):
    """Predicate over existing connection ids for reusing backup slots."""
    if scheme is Scheme.DPP:
        return None
    links = primary.link_set

    def ok(other_id: int) -> bool:
        other = connections[other_id]
        return other.scheme is not Scheme.DPP and not (links & other.primary.link_set)

    return ok


def provision(scheme: Scheme, grid: SpectrumGrid, topology: Topology, params: TimingParams,
              req: Request, connections: MutableMapping[int, Connection],
              metric: str = "km") -> ProvisionOutcome:
    """Route, assign spectrum, and admit ``req``; register it on success."""
    scheme = Scheme(scheme)
    if req.id in connections:
        raise ValueError(f"request {req.id} is already provisioned")
    pair = disjoint_pair(topology, req.source, req.destination, metric)
    if pair is None:
        return ProvisionOutcome(req, reason=Rejection.NO_DISJOINT_ROUTE)
    primary, backup = pair

    primary_block = spectrum.find_first_fit(grid, primary, req.fr, Mode.WORKING, req.id)
    if primary_block is None:
        return ProvisionOutcome(req, reason=Rejection.NO_SPECTRUM_PRIMARY)
    share = sharing_predicate(scheme, primary, connections)
    backup_block = spectrum.find_first_fit(grid, backup, req.fr, Mode.BACKUP, req.id, share)
    if backup_block is None:
        return ProvisionOutcome(req, reason=Rejection.NO_SPECTRUM_BACKUP)

    pbr = intermediate = None
    if scheme is Scheme.INCB:
        intermediate = designate_intermediate(backup)
        # third route avoiding both the primary and the reserved backup
        pbr = shortest_path(topology, req.source, req.destination, metric,
                            excluded=primary.link_set | backup.link_set)
    worst = recovery_time(scheme, params, backup, intermediate)
    if not timing.check_rtc(params, worst):
        return ProvisionOutcome(req, reason=Rejection.RTC_VIOLATION)

    # primary and backup are link-disjoint, so neither search saw the other's cells
    spectrum.allocate(grid, primary, primary_block, Mode.WORKING, req.id)
    spectrum.allocate(grid, backup, backup_block, Mode.BACKUP, req.id, share)
    conn = Connection(req, scheme, primary, primary_block, backup, backup_block, worst, pbr, intermediate)
    connections[req.id] = conn
    return ProvisionOutcome(req, connection=conn)


def teardown(grid: SpectrumGrid, conn: Connection,
             connections: Optional[MutableMapping[int, Connection]] = None) -> SpectrumGrid:
    spectrum.release(grid, conn.id)
    if connections is not None:
        connections.pop(conn.id, None)
    return grid
