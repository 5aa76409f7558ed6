"""Temporal contact networks: a fixed node universe observed through an
ordered sequence of weighted snapshot graphs.

Events carry integer-second offsets and durations so that transforms which
split events at boundaries (dilation, window assignment) preserve totals
exactly.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

_EVENT_HEADER = "window,u,v,offset_sec,duration_sec"


class GraphError(ValueError):
    """Invalid network structure or operation precondition."""


class ContactEvent(NamedTuple):
    """One undirected meeting between two nodes inside a window."""

    u: int
    v: int
    offset: int
    duration: int


def canonicalize_events(u, v, offset, duration):
    """Return event columns with u < v and sorted by (u, v, offset).

    Idempotent: applying it to already-canonical columns is a no-op.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    offset = np.asarray(offset, dtype=np.int64)
    duration = np.asarray(duration, dtype=np.int64)
    swap = u > v
    if swap.any():
        u = u.copy()
        v = v.copy()
        u[swap], v[swap] = v[swap], u[swap]
    order = np.lexsort((duration, offset, v, u))
    return u[order], v[order], offset[order], duration[order]


class SnapshotGraph:
    """One time window: an undirected weighted multigraph stored as columns.

    Multiple events between the same pair in one window are distinct
    interactions and are kept as such.
    """

    __slots__ = ("index", "window_length", "u", "v", "offset", "duration")

    def __init__(self, index, window_length, u=(), v=(), offset=(), duration=(),
                 validate=True, allow_overhang=False):
        self.index = int(index)
        self.window_length = int(window_length)
        self.u, self.v, self.offset, self.duration = canonicalize_events(
            u, v, offset, duration)
        if validate:
            self._validate(allow_overhang)

    def _validate(self, allow_overhang):
        if self.window_length <= 0:
            raise GraphError(f"window {self.index}: non-positive window length")
        if len({len(self.u), len(self.v), len(self.offset), len(self.duration)}) != 1:
            raise GraphError(f"window {self.index}: ragged event columns")
        if self.n_events == 0:
            return
        if (self.u == self.v).any():
            raise GraphError(f"window {self.index}: self-loop event")
        if (self.u < 0).any():
            raise GraphError(f"window {self.index}: negative node id")
        if (self.duration <= 0).any():
            raise GraphError(f"window {self.index}: non-positive duration")
        if (self.offset < 0).any():
            raise GraphError(f"window {self.index}: negative offset")
        end = self.offset + self.duration
        if not allow_overhang and (end > self.window_length).any():
            raise GraphError(
                f"window {self.index}: event extends past window end")

    @classmethod
    def from_events(cls, index, window_length, events: Iterable[ContactEvent],
                    **kwargs) -> "SnapshotGraph":
        ev = list(events)
        if not ev:
            return cls(index, window_length)
        u, v, off, dur = zip(*ev)
        return cls(index, window_length, u, v, off, dur, **kwargs)

    @property
    def n_events(self) -> int:
        return len(self.u)

    def events(self) -> Iterator[ContactEvent]:
        for i in range(self.n_events):
            yield ContactEvent(int(self.u[i]), int(self.v[i]),
                               int(self.offset[i]), int(self.duration[i]))

    def distinct_pairs(self) -> int:
        if self.n_events == 0:
            return 0
        key = self.u * (self.v.max() + 1) + self.v
        return len(np.unique(key))

    def active_nodes(self) -> np.ndarray:
        return np.unique(np.concatenate([self.u, self.v])) if self.n_events else \
            np.empty(0, dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, SnapshotGraph):
            return NotImplemented
        return (self.index == other.index
                and self.window_length == other.window_length
                and np.array_equal(self.u, other.u)
                and np.array_equal(self.v, other.v)
                and np.array_equal(self.offset, other.offset)
                and np.array_equal(self.duration, other.duration))

    def __repr__(self):
        return (f"SnapshotGraph(index={self.index}, "
                f"window_length={self.window_length}, n_events={self.n_events})")


class TemporalNetwork:
    """Ordered sequence of snapshot graphs over a shared node universe.

    Immutable after construction; safe to share read-only across workers.
    """

    __slots__ = ("node_count", "windows")

    def __init__(self, node_count: int, windows: Sequence[SnapshotGraph],
                 validate=True):
        self.node_count = int(node_count)
        self.windows = list(windows)
        if validate:
            self._validate()

    def _validate(self):
        if self.node_count <= 0:
            raise GraphError("node count must be positive")
        for expect, g in enumerate(self.windows):
            if g.index != expect:
                raise GraphError(
                    f"window indices not contiguous: expected {expect}, got {g.index}")
            if g.n_events and int(g.v.max()) >= self.node_count:
                raise GraphError(
                    f"window {g.index}: event endpoint outside node universe")

    @property
    def window_count(self) -> int:
        return len(self.windows)

    @property
    def n_events(self) -> int:
        return sum(g.n_events for g in self.windows)

    def __eq__(self, other):
        if not isinstance(other, TemporalNetwork):
            return NotImplemented
        return (self.node_count == other.node_count
                and self.windows == other.windows)

    def __repr__(self):
        return (f"TemporalNetwork(node_count={self.node_count}, "
                f"windows={self.window_count}, events={self.n_events})")


@dataclass(frozen=True)
class ActivityPotential:
    """Per-node count of window-groups with at least one event."""

    per_node: np.ndarray
    group_size: int

    def histogram(self) -> dict[int, int]:
        """Binned counts of nodes by activity value."""
        return dict(sorted(Counter(self.per_node.tolist()).items()))


def activity_potential(net: TemporalNetwork, group_size: int) -> ActivityPotential:
    """Count, per node, the window-groups in which it has >= 1 event.

    Windows are grouped into consecutive runs of `group_size`; a trailing
    partial group counts as a group.
    """
    if net.node_count == 0 or net.window_count == 0:
        raise GraphError("empty network")
    if group_size < 1:
        raise GraphError("group size must be >= 1")
    n_groups = -(-net.window_count // group_size)
    active = np.zeros((n_groups, net.node_count), dtype=bool)
    for g in net.windows:
        nodes = g.active_nodes()
        if len(nodes):
            active[g.index // group_size, nodes] = True
    return ActivityPotential(per_node=active.sum(axis=0), group_size=group_size)


def density_series(net: TemporalNetwork) -> np.ndarray:
    """Per-window edge density: distinct active pairs over C(n, 2)."""
    if net.node_count < 2:
        raise GraphError("degenerate node universe")
    n_pairs = net.node_count * (net.node_count - 1) // 2
    return np.array([g.distinct_pairs() / n_pairs for g in net.windows])


def degree_sequence(g: SnapshotGraph, node_count: int) -> np.ndarray:
    """Sorted per-node distinct-neighbor counts (event multiplicity collapsed)."""
    deg = np.zeros(node_count, dtype=np.int64)
    if g.n_events:
        key = g.u * node_count + g.v
        uniq = np.unique(key)
        uu, vv = uniq // node_count, uniq % node_count
        np.add.at(deg, uu, 1)
        np.add.at(deg, vv, 1)
    deg.sort()
    return deg


def union(a: TemporalNetwork, b: TemporalNetwork) -> TemporalNetwork:
    """Per-window event union of two networks on the same node universe."""
    if a.node_count != b.node_count or a.window_count != b.window_count:
        raise GraphError("union requires matching node universe and timeline")
    windows = []
    for ga, gb in zip(a.windows, b.windows):
        if ga.window_length != gb.window_length:
            raise GraphError("union requires matching window lengths")
        windows.append(SnapshotGraph(
            ga.index, ga.window_length,
            np.concatenate([ga.u, gb.u]), np.concatenate([ga.v, gb.v]),
            np.concatenate([ga.offset, gb.offset]),
            np.concatenate([ga.duration, gb.duration])))
    return TemporalNetwork(a.node_count, windows)


def disjoint_union(nets: Sequence[TemporalNetwork]) -> TemporalNetwork:
    """Combine networks into one by stacking node universes block-wise."""
    if not nets:
        raise GraphError("empty network list")
    window_count = nets[0].window_count
    if any(n.window_count != window_count for n in nets):
        raise GraphError("disjoint union requires equal window counts")
    total = sum(n.node_count for n in nets)
    windows = []
    for tau in range(window_count):
        us, vs, offs, durs = [], [], [], []
        base = 0
        wlen = nets[0].windows[tau].window_length
        for n in nets:
            g = n.windows[tau]
            us.append(g.u + base)
            vs.append(g.v + base)
            offs.append(g.offset)
            durs.append(g.duration)
            base += n.node_count
        windows.append(SnapshotGraph(
            tau, wlen, np.concatenate(us), np.concatenate(vs),
            np.concatenate(offs), np.concatenate(durs)))
    return TemporalNetwork(total, windows)


def write_network(net: TemporalNetwork, out_dir) -> None:
    """Write the canonical event CSV plus the JSON metadata sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lengths = {g.window_length for g in net.windows}
    if len(lengths) > 1:
        raise GraphError("cannot serialize mixed window lengths")
    window_length = lengths.pop() if lengths else 0
    with open(out / "events.csv", "w", encoding="utf-8") as fh:
        fh.write(_EVENT_HEADER + "\n")
        for g in net.windows:
            for i in range(g.n_events):
                fh.write(f"{g.index},{g.u[i]},{g.v[i]},{g.offset[i]},{g.duration[i]}\n")
    meta = {"node_count": net.node_count,
            "window_length_sec": window_length,
            "window_count": net.window_count}
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_network(in_dir) -> TemporalNetwork:
    """Read a network written by write_network."""
    src = Path(in_dir)
    with open(src / "meta.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    node_count = meta["node_count"]
    window_length = meta["window_length_sec"]
    window_count = meta["window_count"]
    per_window: dict[int, list] = {i: [] for i in range(window_count)}
    with open(src / "events.csv", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _EVENT_HEADER:
            raise GraphError(f"unexpected event header: {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                w, u, v, off, dur = (int(x) for x in line.split(","))
            except ValueError as exc:
                raise GraphError(f"events.csv line {lineno}: {exc}") from exc
            per_window[w].append((u, v, off, dur))
    windows = [SnapshotGraph.from_events(i, window_length, per_window[i])
               for i in range(window_count)]
    return TemporalNetwork(node_count, windows)
