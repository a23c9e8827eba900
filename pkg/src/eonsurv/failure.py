"""Dual-link failure scenarios and per-connection recovery evaluation.

Both links of a scenario fail at the same instant.  Affected connections
signal recovery concurrently; when two of them switch onto the same shared
backup cells, the lower connection id wins.  Evaluation never mutates the
provisioned grid.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional

from eonsurv import spectrum, timing
from eonsurv.protection import Connection, Scheme, designate_intermediate, recovery_time
from eonsurv.rng import SplitMix64
from eonsurv.spectrum import Mode, SpectrumGrid
from eonsurv.timing import RecoveryTime, TimingParams
from eonsurv.topology import Topology

CSV_COLUMNS = ("scenario_id", "link_a", "link_b", "conn_id", "impact", "recovered", "reason", "rt_us")


class Impact(str, enum.Enum):
    UNTOUCHED = "untouched"
    PRIMARY_HIT = "primary-hit"
    BACKUP_HIT = "backup-hit"
    BOTH_HIT = "both-hit"


class Failure(str, enum.Enum):
    BACKUP_ALSO_FAILED = "backup-also-failed-no-pbr"
    CONTENTION_LOST = "backup-contention-lost"
    PBR_NO_SPECTRUM = "pbr-no-spectrum"
    RTC_VIOLATION = "rtc-violation"


@dataclass(frozen=True)
class FailureScenario:
    link_a: int
    link_b: int
    id: int = 0

    def __post_init__(self):
        if self.link_a == self.link_b:
            raise ValueError("a dual failure needs two distinct links")
        if self.link_a > self.link_b:
            a, b = self.link_b, self.link_a
            object.__setattr__(self, "link_a", a)
            object.__setattr__(self, "link_b", b)

    @property
    def failed(self) -> frozenset[int]:
        return frozenset((self.link_a, self.link_b))


@dataclass(frozen=True)
class RecoveryOutcome:
    conn_id: int
    impact: Impact
    recovered: bool
    rt: Optional[RecoveryTime] = None
    reason: Optional[Failure] = None

    @property
    def rt_us(self) -> Optional[float]:
        return None if self.rt is None else self.rt.total


def enumerate_scenarios(t: Topology) -> list[FailureScenario]:
    if t.n_links < 2:
        raise ValueError("need at least two links")
    return [FailureScenario(a, b, i) for i, (a, b) in enumerate(combinations(range(t.n_links), 2))]


def sample_scenarios(t: Topology, count: int, seed: int) -> list[FailureScenario]:
    """``count`` distinct scenarios drawn without replacement, in draw order."""
    pairs = list(combinations(range(t.n_links), 2))
    picks = SplitMix64(seed).sample_indices(len(pairs), count)
    return [FailureScenario(*pairs[i], id=i) for i in picks]


def impact_of(failed: frozenset[int], conn: Connection) -> Impact:
    p = not failed.isdisjoint(conn.primary.links)
    b = not failed.isdisjoint(conn.backup.links)
    if p and b:
        return Impact.BOTH_HIT
    if p:
        return Impact.PRIMARY_HIT
    if b:
        return Impact.BACKUP_HIT
    return Impact.UNTOUCHED


def classify(scenario: FailureScenario, connections: Iterable[Connection]) -> dict[int, Impact]:
    failed = scenario.failed
    return {c.id: impact_of(failed, c) for c in connections}


def _backup_cells(conn: Connection) -> set[tuple[int, int]]:
    return {(link, slot) for link in conn.backup.links for slot in conn.backup_block.slots()}


def recover(scenario: FailureScenario, connections: Mapping[int, Connection] | Iterable[Connection],
            grid: SpectrumGrid, params: TimingParams) -> list[RecoveryOutcome]:
    """Outcome for every affected connection, in connection-id order."""
    conns = connections.values() if isinstance(connections, Mapping) else connections
    failed = scenario.failed
    affected = sorted(((c, impact_of(failed, c)) for c in conns), key=lambda item: item[0].id)
    claimed: set[tuple[int, int]] = set()
    residual: Optional[SpectrumGrid] = None
    outcomes = []
    for conn, impact in affected:
        if impact is Impact.UNTOUCHED:
            continue
        if impact is Impact.BACKUP_HIT:
            outcomes.append(RecoveryOutcome(conn.id, impact, True, timing.ZERO))
            continue
        if impact is Impact.PRIMARY_HIT:
            cells = _backup_cells(conn)
            if conn.scheme is not Scheme.DPP and not cells.isdisjoint(claimed):
                outcomes.append(RecoveryOutcome(conn.id, impact, False, reason=Failure.CONTENTION_LOST))
                continue
            rt = recovery_time(conn.scheme, params, conn.backup, conn.intermediate)
            if not timing.check_rtc(params, rt):
                outcomes.append(RecoveryOutcome(conn.id, impact, False, reason=Failure.RTC_VIOLATION))
                continue
            claimed |= cells
            outcomes.append(RecoveryOutcome(conn.id, impact, True, rt))
            continue
        # both primary and reserved backup are down
        pbr = conn.pbr if conn.scheme is Scheme.INCB else None
        if pbr is None or not failed.isdisjoint(pbr.links):
            outcomes.append(RecoveryOutcome(conn.id, impact, False, reason=Failure.BACKUP_ALSO_FAILED))
            continue
        if residual is None:
            residual = grid.copy()
        block = spectrum.find_first_fit(residual, pbr, conn.request.fr, Mode.WORKING, conn.id)
        if block is None:
            outcomes.append(RecoveryOutcome(conn.id, impact, False, reason=Failure.PBR_NO_SPECTRUM))
            continue
        rt = recovery_time(Scheme.INCB, params, pbr, designate_intermediate(pbr))
        if not timing.check_rtc(params, rt):
            outcomes.append(RecoveryOutcome(conn.id, impact, False, reason=Failure.RTC_VIOLATION))
            continue
        spectrum.allocate(residual, pbr, block, Mode.WORKING, conn.id)
        outcomes.append(RecoveryOutcome(conn.id, impact, True, rt))
    return outcomes


def scenario_rows(scenario: FailureScenario, outcomes: Iterable[RecoveryOutcome]) -> list[tuple]:
    rows = []
    for o in outcomes:
        rt = "" if o.rt is None else f"{o.rt.total:.6f}"
        rows.append((scenario.id, scenario.link_a, scenario.link_b, o.conn_id, o.impact.value,
                     int(o.recovered), "" if o.reason is None else o.reason.value, rt))
    return rows


def write_scenario_csv(fh, results: Iterable[tuple[FailureScenario, list[RecoveryOutcome]]]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for scenario, outcomes in results:
        writer.writerows(scenario_rows(scenario, outcomes))


def scenario_csv(results) -> str:
    buf = io.StringIO()
    write_scenario_csv(buf, results)
    return buf.getvalue()
