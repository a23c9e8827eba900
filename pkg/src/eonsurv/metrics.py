"""Blocking probability, provisioning ratio, and recovery-time aggregation."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from statistics import fmean
from typing import Iterable, Optional, Sequence

from eonsurv.failure import RecoveryOutcome
from eonsurv.protection import Connection, ProvisionOutcome, Rejection
from eonsurv.spectrum import SpectrumGrid, utilization

REPORT_COLUMNS = (
    "scheme", "topology", "seed", "requests", "accepted", "rejected", "bbp", "bpr",
    "mean_rt_us", "recovery_failure_rate",
) + tuple(f"rejected_{r.value}" for r in Rejection)


def bbp(outcomes: Sequence[ProvisionOutcome], weighted: bool = False) -> float:
    """Rejected over demanded, by request count (or by slots if ``weighted``)."""
    if not outcomes:
        raise ValueError("no provisioning outcomes")
    if weighted:
        total = sum(o.request.fr for o in outcomes)
        return sum(o.request.fr for o in outcomes if not o.accepted) / total
    return sum(1 for o in outcomes if not o.accepted) / len(outcomes)


def bpr(grid: SpectrumGrid, accepted: Iterable[Connection]) -> float:
    demand = sum(c.request.fr for c in accepted)
    if demand == 0:
        raise ValueError("no accepted connections")
    working, backup = utilization(grid)
    return (working + backup) / demand


def mean_rt(outcomes: Iterable[RecoveryOutcome]) -> Optional[float]:
    """Mean recovery time over outcomes that actually performed a recovery."""
    rts = [o.rt.total for o in outcomes if o.recovered and o.rt is not None and o.rt.total > 0]
    return fmean(rts) if rts else None


@dataclass
class RunReport:
    scheme: str
    topology: str
    seed: Optional[int]
    requests: float
    accepted: float
    rejected: float
    bbp: float
    bpr: Optional[float]
    mean_rt_us: Optional[float]
    recovery_failure_rate: Optional[float]
    rejections: dict[str, float] = field(default_factory=dict)

    def to_row(self) -> list:
        base = [getattr(self, c) for c in REPORT_COLUMNS[:10]]
        return base + [self.rejections.get(r.value, 0) for r in Rejection]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def build_report(scheme: str, topology: str, seed: Optional[int],
                 outcomes: Sequence[ProvisionOutcome], grid: SpectrumGrid,
                 recoveries: Sequence[RecoveryOutcome], weighted_bbp: bool = False) -> RunReport:
    accepted = [o.connection for o in outcomes if o.accepted]
    hist = Counter(o.reason.value for o in outcomes if not o.accepted)
    failures = sum(1 for r in recoveries if not r.recovered)
    return RunReport(
        scheme=scheme,
        topology=topology,
        seed=seed,
        requests=len(outcomes),
        accepted=len(accepted),
        rejected=len(outcomes) - len(accepted),
        bbp=bbp(outcomes, weighted_bbp),
        bpr=bpr(grid, accepted) if accepted else None,
        mean_rt_us=mean_rt(recoveries),
        recovery_failure_rate=failures / len(recoveries) if recoveries else None,
        rejections={r.value: hist.get(r.value, 0) for r in Rejection},
    )


def average(reports: Sequence[RunReport]) -> RunReport:
    """Seed average; optional fields average over the seeds that have them."""
    if not reports:
        raise ValueError("nothing to average")

    def avg(name):
        vals = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        return fmean(vals) if vals else None

    first = reports[0]
    return RunReport(
        scheme=first.scheme,
        topology=first.topology,
        seed=None,
        requests=avg("requests"),
        accepted=avg("accepted"),
        rejected=avg("rejected"),
        bbp=avg("bbp"),
        bpr=avg("bpr"),
        mean_rt_us=avg("mean_rt_us"),
        recovery_failure_rate=avg("recovery_failure_rate"),
        rejections={r.value: fmean(x.rejections.get(r.value, 0) for x in reports) for r in Rejection},
    )
