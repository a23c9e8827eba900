"""Per-link frequency-slot occupancy and first-fit block search.

Every link carries ``F`` slots.  A slot is free, held by exactly one working
lightpath, or reserved as backup by a non-empty set of sharers.  Blocks are
contiguous runs placed at the same indices on every link of a path, so the
continuity and contiguity constraints hold by construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

FREE = -1


class Mode(str, enum.Enum):
    WORKING = "working"
    BACKUP = "backup"


class SpectrumConflict(RuntimeError):
    """Allocation attempted over slots that are no longer available."""


@dataclass(frozen=True)
class SlotBlock:
    start: int
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("block size must be >= 1")
        if self.start < 0:
            raise ValueError("block start must be >= 0")

    @property
    def stop(self) -> int:
        return self.start + self.size

    def slots(self) -> range:
        return range(self.start, self.stop)


@dataclass(frozen=True)
class SlotOwnership:
    kind: str  # "free" | "working" | "backup"
    owners: frozenset[int] = frozenset()


def _links_of(path) -> tuple[int, ...]:
    return tuple(getattr(path, "links", path))


class SpectrumGrid:
    """Occupancy of ``n_links`` x ``capacity`` slot cells."""

    def __init__(self, n_links: int, capacity: int):
        self.n_links = n_links
        self.capacity = capacity
        self._working = np.full((n_links, capacity), FREE, dtype=np.int64)
        self._backup = np.zeros((n_links, capacity), dtype=bool)
        self._sharers: list[dict[int, frozenset[int]]] = [{} for _ in range(n_links)]
        # conn id -> list of (mode, links, block); lets release skip full scans
        self._held: dict[int, list[tuple[Mode, tuple[int, ...], SlotBlock]]] = {}

    @classmethod
    def for_topology(cls, topology) -> "SpectrumGrid":
        return cls(topology.n_links, topology.slot_capacity)

    def copy(self) -> "SpectrumGrid":
        other = SpectrumGrid.__new__(SpectrumGrid)
        other.n_links = self.n_links
        other.capacity = self.capacity
        other._working = self._working.copy()
        other._backup = self._backup.copy()
        other._sharers = [dict(d) for d in self._sharers]
        other._held = {k: list(v) for k, v in self._held.items()}
        return other

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectrumGrid):
            return NotImplemented
        return (self.capacity == other.capacity
                and np.array_equal(self._working, other._working)
                and np.array_equal(self._backup, other._backup)
                and self._sharers == other._sharers)

    def cell(self, link: int, slot: int) -> SlotOwnership:
        owner = int(self._working[link, slot])
        if owner != FREE:
            return SlotOwnership("working", frozenset((owner,)))
        if self._backup[link, slot]:
            return SlotOwnership("backup", self._sharers[link][slot])
        return SlotOwnership("free")

    def sharers(self, link: int, slot: int) -> frozenset[int]:
        return self._sharers[link].get(slot, frozenset())

    def held(self, conn: int) -> list[tuple[Mode, tuple[int, ...], SlotBlock]]:
        return list(self._held.get(conn, ()))

    def free_mask(self, link: int) -> np.ndarray:
        return (self._working[link] == FREE) & ~self._backup[link]

    def check_invariants(self) -> None:
        """Raise AssertionError if the grid is internally inconsistent."""
        both = (self._working != FREE) & self._backup
        assert not both.any(), "slot both working and backup"
        for link, table in enumerate(self._sharers):
            flagged = set(np.flatnonzero(self._backup[link]).tolist())
            assert flagged == set(table), f"backup flags and sharer sets disagree on link {link}"
            assert all(table.values()), f"empty sharer set on link {link}"
        occupied = (self._working != FREE) | self._backup
        assert (occupied.sum(axis=1) <= self.capacity).all()

    def dump(self, labels: Optional[Iterable[str]] = None) -> str:
        """One line per link: ``.`` free, ``W`` working, ``B`` backup."""
        chars = np.full((self.n_links, self.capacity), ".", dtype="<U1")
        chars[self._backup] = "B"
        chars[self._working != FREE] = "W"
        names = list(labels) if labels is not None else [str(i) for i in range(self.n_links)]
        width = max(len(n) for n in names) if names else 0
        return "\n".join(f"{names[i]:>{width}} {''.join(row)}" for i, row in enumerate(chars)) + "\n"


def _available(grid: SpectrumGrid, links, mode: Mode,
               sharable_with: Optional[Callable[[int], bool]]) -> np.ndarray:
    avail = np.ones(grid.capacity, dtype=bool)
    verdicts: dict[int, bool] = {}
    for link in links:
        ok = grid.free_mask(link)
        if mode is Mode.BACKUP and sharable_with is not None:
            for slot, owners in grid._sharers[link].items():
                if not avail[slot]:
                    continue
                good = True
                for owner in owners:
                    if owner not in verdicts:
                        verdicts[owner] = bool(sharable_with(owner))
                    if not verdicts[owner]:
                        good = False
                        break
                if good:
                    ok[slot] = True
        avail &= ok
    return avail


def first_run(mask: np.ndarray, size: int) -> Optional[int]:
    """Lowest start of ``size`` consecutive True entries, or None."""
    if size > mask.size:
        return None
    csum = np.concatenate(([0], np.cumsum(mask, dtype=np.int64)))
    hits = np.flatnonzero(csum[size:] - csum[:-size] == size)
    return int(hits[0]) if hits.size else None


def find_first_fit(grid: SpectrumGrid, path, fr: int, mode: Mode = Mode.WORKING, conn: int = -1,
                   sharable_with: Optional[Callable[[int], bool]] = None) -> Optional[SlotBlock]:
    """Lowest-start block of ``fr`` slots usable on every link of ``path``.

    Working blocks need free slots.  Backup blocks may also land on slots
    already reserved as backup when every current sharer passes
    ``sharable_with``.
    """
    if fr < 1:
        raise ValueError("fr must be >= 1")
    mode = Mode(mode)
    links = _links_of(path)
    if not links:
        return None
    start = first_run(_available(grid, links, mode, sharable_with), fr)
    return None if start is None else SlotBlock(start, fr)


def allocate(grid: SpectrumGrid, path, block: SlotBlock, mode: Mode, conn: int,
             sharable_with: Optional[Callable[[int], bool]] = None) -> SpectrumGrid:
    """Mark ``block`` on every link of ``path`` for ``conn``.

    Raises SpectrumConflict, leaving the grid untouched, when any slot no
    longer satisfies the search precondition.
    """
    mode = Mode(mode)
    links = _links_of(path)
    if conn < 0:
        raise ValueError("connection ids must be non-negative")
    if block.stop > grid.capacity:
        raise SpectrumConflict(f"block {block} exceeds capacity {grid.capacity}")
    sl = slice(block.start, block.stop)
    for link in links:
        if (grid._working[link, sl] != FREE).any():
            raise SpectrumConflict(f"link {link} slots {block.start}..{block.stop - 1} hold working traffic")
        if mode is Mode.WORKING:
            if grid._backup[link, sl].any():
                raise SpectrumConflict(f"link {link} slots {block.start}..{block.stop - 1} are reserved as backup")
        else:
            for slot in block.slots():
                for owner in grid._sharers[link].get(slot, ()):
                    if owner == conn or sharable_with is None or not sharable_with(owner):
                        raise SpectrumConflict(f"link {link} slot {slot} is not sharable with {owner}")
    for link in links:
        if mode is Mode.WORKING:
            grid._working[link, sl] = conn
        else:
            grid._backup[link, sl] = True
            table = grid._sharers[link]
            for slot in block.slots():
                table[slot] = table.get(slot, frozenset()) | {conn}
    grid._held.setdefault(conn, []).append((mode, links, block))
    return grid


def release(grid: SpectrumGrid, conn: int) -> SpectrumGrid:
    """Drop every allocation of ``conn``; unknown ids are a no-op."""
    for mode, links, block in grid._held.pop(conn, ()):
        sl = slice(block.start, block.stop)
        for link in links:
            if mode is Mode.WORKING:
                row = grid._working[link, sl]
                row[row == conn] = FREE
            else:
                table = grid._sharers[link]
                for slot in block.slots():
                    owners = table.get(slot)
                    if owners is None or conn not in owners:
                        continue
                    owners = owners - {conn}
                    if owners:
                        table[slot] = owners
                    else:
                        del table[slot]
                        grid._backup[link, slot] = False
    return grid


def utilization(grid: SpectrumGrid) -> tuple[int, int]:
    """(working cells, backup cells); a shared backup cell counts once."""
    return int((grid._working != FREE).sum()), int(grid._backup.sum())
