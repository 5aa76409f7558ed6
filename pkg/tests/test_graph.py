import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contagion.graph import (ActivityPotential, ContactEvent, GraphError,
                             SnapshotGraph, TemporalNetwork,
                             activity_potential, canonicalize_events,
                             degree_sequence, density_series, disjoint_union,
                             read_network, union, write_network)

W = 86400


def net_from(node_count, window_count, events_by_window, window_length=W):
    windows = [SnapshotGraph.from_events(i, window_length,
                                         events_by_window.get(i, []))
               for i in range(window_count)]
    return TemporalNetwork(node_count, windows)


@st.composite
def temporal_networks(draw):
    n = draw(st.integers(min_value=2, max_value=8))
    L = draw(st.integers(min_value=1, max_value=5))
    events_by_window = {}
    for w in range(L):
        events = []
        for _ in range(draw(st.integers(min_value=0, max_value=6))):
            u = draw(st.integers(min_value=0, max_value=n - 1))
            v = draw(st.integers(min_value=0, max_value=n - 1))
            if u == v:
                continue
            off = draw(st.integers(min_value=0, max_value=W - 1))
            dur = draw(st.integers(min_value=1, max_value=W - off))
            events.append(ContactEvent(u, v, off, dur))
        events_by_window[w] = events
    return net_from(n, L, events_by_window)


class TestValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            SnapshotGraph(0, W, [1], [1], [0], [10])

    def test_overhang_rejected(self):
        with pytest.raises(GraphError, match="past window end"):
            SnapshotGraph(0, W, [0], [1], [W - 5], [10])

    def test_zero_duration_rejected(self):
        with pytest.raises(GraphError, match="non-positive duration"):
            SnapshotGraph(0, W, [0], [1], [0], [0])

    def test_noncontiguous_windows_rejected(self):
        with pytest.raises(GraphError, match="not contiguous"):
            TemporalNetwork(2, [SnapshotGraph(1, W)])

    def test_endpoint_outside_universe_rejected(self):
        with pytest.raises(GraphError, match="outside node universe"):
            TemporalNetwork(2, [SnapshotGraph(0, W, [0], [5], [0], [10])])


class TestCanonicalization:
    def test_endpoints_swapped(self):
        g = SnapshotGraph(0, W, [3], [1], [0], [10])
        assert g.u[0] == 1 and g.v[0] == 3

    def test_sorted_by_pair_then_offset(self):
        g = SnapshotGraph(0, W, [2, 0, 0], [1, 1, 1], [5, 100, 2], [1, 1, 1])
        assert list(g.u) == [0, 0, 1]
        assert list(g.offset) == [2, 100, 5]

    @given(temporal_networks())
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, net):
        for g in net.windows:
            cols = canonicalize_events(g.u, g.v, g.offset, g.duration)
            twice = canonicalize_events(*cols)
            for a, b in zip(cols, twice):
                assert np.array_equal(a, b)


class TestActivityPotential:
    def test_one_node_network(self):
        net = net_from(1, 3, {})
        act = activity_potential(net, 1)
        assert act.histogram() == {0: 1}

    def test_direct_count(self):
        # Pair meets in windows 0 and 2 of 4.
        ev = ContactEvent(0, 1, 0, 100)
        net = net_from(2, 4, {0: [ev], 2: [ev]})
        act = activity_potential(net, 1)
        assert list(act.per_node) == [2, 2]

    def test_partial_trailing_group(self):
        ev = ContactEvent(0, 1, 0, 100)
        net = net_from(2, 5, {4: [ev]})
        act = activity_potential(net, 2)  # groups {0,1},{2,3},{4}
        assert list(act.per_node) == [1, 1]

    def test_empty_network_rejected(self):
        with pytest.raises(GraphError, match="empty network"):
            activity_potential(TemporalNetwork(3, []), 1)

    def test_matches_bruteforce_on_cns_shaped_fixture(self):
        rng = np.random.default_rng(7)
        events_by_window = {}
        for w in range(28):
            evs = []
            for _ in range(rng.integers(0, 12)):
                u, v = rng.choice(10, size=2, replace=False)
                evs.append(ContactEvent(int(u), int(v), int(rng.integers(0, W - 600)), 600))
            events_by_window[w] = evs
        net = net_from(10, 28, events_by_window)

        # Independent recount straight from the fixture dict.
        expected = [0] * 10
        for node in range(10):
            for w in range(28):
                if any(node in (e.u, e.v) for e in events_by_window[w]):
                    expected[node] += 1
        act = activity_potential(net, 1)
        assert list(act.per_node) == expected
        from collections import Counter
        assert act.histogram() == dict(sorted(Counter(expected).items()))


class TestDensitySeries:
    def test_empty_windows_all_zero(self):
        net = net_from(4, 3, {})
        assert list(density_series(net)) == [0.0, 0.0, 0.0]

    def test_complete_graph_density_one(self):
        evs = [ContactEvent(u, v, 0, 100)
               for u in range(4) for v in range(u + 1, 4)]
        net = net_from(4, 1, {0: evs})
        assert density_series(net)[0] == 1.0

    def test_repeat_events_count_once(self):
        evs = [ContactEvent(0, 1, 0, 100), ContactEvent(0, 1, 500, 100)]
        net = net_from(4, 1, {0: evs})
        assert density_series(net)[0] == pytest.approx(1 / 6)

    def test_degenerate_universe_rejected(self):
        with pytest.raises(GraphError, match="degenerate node universe"):
            density_series(net_from(1, 1, {}))

    @given(temporal_networks(), temporal_networks())
    @settings(max_examples=30, deadline=None)
    def test_union_of_disjoint_supports_sums_pair_counts(self, a, b):
        na = a.node_count
        n = na + b.node_count
        L = min(a.window_count, b.window_count)
        a = TemporalNetwork(n, a.windows[:L])
        shifted = [SnapshotGraph(g.index, g.window_length, g.u + na, g.v + na,
                                 g.offset, g.duration)
                   for g in b.windows[:L]]
        b = TemporalNetwork(n, shifted)
        combined = union(a, b)
        pairs = n * (n - 1) / 2
        for tau in range(L):
            expected = (a.windows[tau].distinct_pairs()
                        + b.windows[tau].distinct_pairs()) / pairs
            assert density_series(combined)[tau] == pytest.approx(expected)


class TestDegreeSequence:
    def test_no_events(self):
        assert list(degree_sequence(SnapshotGraph(0, W), 3)) == [0, 0, 0]

    def test_triangle(self):
        evs = [ContactEvent(0, 1, 0, 10), ContactEvent(1, 2, 0, 10),
               ContactEvent(0, 2, 0, 10)]
        g = SnapshotGraph.from_events(0, W, evs)
        assert list(degree_sequence(g, 3)) == [2, 2, 2]

    def test_multiplicity_collapsed(self):
        evs = [ContactEvent(0, 1, 0, 10), ContactEvent(0, 1, 100, 10),
               ContactEvent(0, 1, 200, 10)]
        g = SnapshotGraph.from_events(0, W, evs)
        assert list(degree_sequence(g, 2)) == [1, 1]


class TestSerialization:
    @given(temporal_networks())
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, net, tmp_path_factory):
        out = tmp_path_factory.mktemp("net")
        write_network(net, out)
        assert read_network(out) == net

    def test_disjoint_union_blocks(self):
        a = net_from(2, 1, {0: [ContactEvent(0, 1, 0, 5)]})
        b = net_from(3, 1, {0: [ContactEvent(1, 2, 0, 7)]})
        combined = disjoint_union([a, b])
        assert combined.node_count == 5
        got = list(combined.windows[0].events())
        assert got == [ContactEvent(0, 1, 0, 5), ContactEvent(3, 4, 0, 7)]
