"""Seeded request generation over distinct node pairs.

The pair population is every unordered ``(s, d)`` with ``s < d`` in
lexicographic order.  Request ``i`` is produced by one partial Fisher-Yates
step over that population followed by one demand draw, both from a single
SplitMix64 stream, so a workload of ``k`` requests is always a prefix of any
longer workload with the same seed.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path as FsPath

from eonsurv.protection import Request
from eonsurv.rng import NAME as GENERATOR_NAME, SplitMix64
from eonsurv.topology import Topology

DEFAULT_FR_MIN = 1
DEFAULT_FR_MAX = 8
CSV_COLUMNS = ("id", "src", "dst", "fr")


class WorkloadError(ValueError):
    pass


@dataclass(frozen=True)
class WorkloadSpec:
    count: int
    fr_min: int = DEFAULT_FR_MIN
    fr_max: int = DEFAULT_FR_MAX
    seed: int = 0

    def validate(self, t: Topology) -> None:
        if not 1 <= self.count <= t.pair_count:
            raise WorkloadError(f"count {self.count} outside 1..{t.pair_count} for {t.name}")
        if not 1 <= self.fr_min <= self.fr_max <= t.slot_capacity:
            raise WorkloadError(f"demand bounds [{self.fr_min}, {self.fr_max}] invalid for F={t.slot_capacity}")


def generate(t: Topology, spec: WorkloadSpec) -> list[Request]:
    spec.validate(t)
    pairs = list(combinations(range(t.n_nodes), 2))
    rng = SplitMix64(spec.seed)
    pool = list(range(len(pairs)))
    out = []
    for i in range(spec.count):
        j = i + rng.below(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
        s, d = pairs[pool[i]]
        out.append(Request(i, s, d, rng.integer(spec.fr_min, spec.fr_max)))
    return out


def to_csv(requests) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in requests:
        writer.writerow((r.id, r.source, r.destination, r.fr))
    return buf.getvalue()


def from_csv(text: str) -> list[Request]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise WorkloadError(f"expected header {','.join(CSV_COLUMNS)}")
    try:
        return [Request(int(row["id"]), int(row["src"]), int(row["dst"]), int(row["fr"])) for row in reader]
    except (TypeError, ValueError) as exc:
        raise WorkloadError(f"bad workload row: {exc}") from None


def write_csv(path, requests) -> None:
    FsPath(path).write_text(to_csv(requests))


def read_csv(path) -> list[Request]:
    return from_csv(FsPath(path).read_text())


def digest(requests) -> str:
    return hashlib.sha256(to_csv(requests).encode()).hexdigest()
