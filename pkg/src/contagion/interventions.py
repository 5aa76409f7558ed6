"""Social-distancing transforms over temporal networks.

All transforms are pure: the input network is left untouched and a fresh one
is returned. Filtering transforms never create events absent from the input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphError, SnapshotGraph, TemporalNetwork


@dataclass(frozen=True)
class PodAssignment:
    """Partition of the node universe into pods (sizes differ by <= 1)."""

    pod_count: int
    assignment: np.ndarray  # node -> pod index

    def members(self, pod: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == pod)


def assign_pods(node_count: int, k: int, rng: np.random.Generator) -> PodAssignment:
    """Random balanced partition into k pods."""
    if k < 1:
        raise GraphError("pod count must be >= 1")
    if k > node_count:
        raise GraphError("more pods than nodes")
    perm = rng.permutation(node_count)
    assignment = np.empty(node_count, dtype=np.int64)
    assignment[perm] = np.arange(node_count) % k
    return PodAssignment(pod_count=k, assignment=assignment)


def _filter_windows(net: TemporalNetwork, keep_event) -> TemporalNetwork:
    """keep_event(g) -> bool mask over g's events."""
    windows = []
    for g in net.windows:
        if g.n_events == 0:
            windows.append(SnapshotGraph(g.index, g.window_length))
            continue
        mask = keep_event(g)
        windows.append(SnapshotGraph(
            g.index, g.window_length,
            g.u[mask], g.v[mask], g.offset[mask], g.duration[mask]))
    return TemporalNetwork(net.node_count, windows)


def spatial_pods(net: TemporalNetwork, k: int, rng: np.random.Generator,
                 assignment: PodAssignment | None = None
                 ) -> list[TemporalNetwork]:
    """Keep only intra-pod events; one output network per pod.

    Each output shares the input's node universe, with nodes of other pods
    left isolated, so the outputs are node-disjoint in event support. For
    generated-network experiments prefer regenerating independent pod-sized
    networks (see harness), matching how the pods were produced there.
    """
    if assignment is None:
        assignment = assign_pods(net.node_count, k, rng)
    if assignment.pod_count != k:
        raise GraphError("assignment pod count mismatch")
    if k == 1:
        return [net]
    pods = []
    for pod in range(k):
        member = assignment.assignment == pod

        def keep(g, member=member):
            return member[g.u] & member[g.v]

        pods.append(_filter_windows(net, keep))
    return pods


def alternating_pods(net: TemporalNetwork, rng: np.random.Generator,
                     assignment: PodAssignment | None = None
                     ) -> TemporalNetwork:
    """Two balanced pods active on alternating windows.

    Window tau keeps only events internal to pod (tau mod 2).
    """
    if assignment is None:
        assignment = assign_pods(net.node_count, 2, rng)
    if assignment.pod_count != 2:
        raise GraphError("alternating pods need exactly 2 pods")

    def keep(g):
        member = assignment.assignment == (g.index % 2)
        return member[g.u] & member[g.v]

    return _filter_windows(net, keep)


def random_attendance(net: TemporalNetwork, fraction: float,
                      rng: np.random.Generator) -> TemporalNetwork:
    """Per window, a fresh uniform subset of floor(fraction * n) nodes is
    active; only events with both endpoints active survive."""
    if not 0 < fraction <= 1:
        raise GraphError("fraction must be in (0, 1]")
    if fraction == 1:
        return net
    size = int(fraction * net.node_count)

    def keep(g):
        active = np.zeros(net.node_count, dtype=bool)
        active[rng.choice(net.node_count, size=size, replace=False)] = True
        return active[g.u] & active[g.v]

    return _filter_windows(net, keep)


def temporal_dilation(net: TemporalNetwork, k: int,
                      split_boundary: bool = True) -> TemporalNetwork:
    """Stretch the timeline: each window of length W becomes k consecutive
    windows of length W / k; events land by their offset.

    With split_boundary (the default), an event straddling a sub-window edge
    is cut there, durations preserved in sum; the alternative assigns each
    event whole to the sub-window of its start (sensitivity analysis only,
    the event may then overhang the shorter window).
    """
    if k <= 1:
        raise GraphError("dilation factor must be >= 2")
    windows = []
    for g in net.windows:
        if g.window_length % k != 0:
            raise GraphError(
                f"window length {g.window_length} not divisible by {k}")
        sub_len = g.window_length // k
        buckets = [[] for _ in range(k)]
        for i in range(g.n_events):
            u, v = int(g.u[i]), int(g.v[i])
            off, dur = int(g.offset[i]), int(g.duration[i])
            if not split_boundary:
                sub = min(off // sub_len, k - 1)
                buckets[sub].append((u, v, off - sub * sub_len, dur))
                continue
            while dur > 0:
                sub = off // sub_len
                if sub >= k:  # event ending exactly at window end
                    sub = k - 1
                local = off - sub * sub_len
                take = min(dur, sub_len - local)
                buckets[sub].append((u, v, local, take))
                off += take
                dur -= take
        for sub in range(k):
            idx = g.index * k + sub
            if buckets[sub]:
                eu, ev, eo, ed = zip(*buckets[sub])
            else:
                eu = ev = eo = ed = ()
            windows.append(SnapshotGraph(
                idx, sub_len, eu, ev, eo, ed,
                allow_overhang=not split_boundary))
    return TemporalNetwork(net.node_count, windows)
