"""Temporal random networks with continuous network history.

Every unordered node pair evolves as an independent two-state Markov chain
(absent/present) at a fixed step resolution. Maximal runs of consecutive
on-steps inside one window become single contact events; runs crossing a
window boundary are split at the boundary. Parameters are tuned so the
chain's stationary occupancy equals the requested density.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import kolmogorov

from .graph import GraphError, SnapshotGraph, TemporalNetwork, degree_sequence
from .seeding import rng as _seeded_rng

DEFAULT_MAX_EXPECTED_EVENTS = 50_000_000


class GenerationError(ValueError):
    """Infeasible generator parameters or resource guard trip."""


@dataclass(frozen=True)
class MarkovEdgeParams:
    """Per-pair two-state chain parameters.

    Stationary occupancy is p_appear / (p_appear + p_vanish); use
    from_target_density to derive p_appear for a wanted density.
    """

    p_appear: float
    p_vanish: float
    steps_per_window: int = 288
    target_density: float | None = None

    def __post_init__(self):
        if not 0 < self.p_appear < 1:
            raise GenerationError("p_appear must be in (0, 1)")
        if not 0 < self.p_vanish < 1:
            raise GenerationError("p_vanish must be in (0, 1)")
        if self.steps_per_window < 1:
            raise GenerationError("steps_per_window must be >= 1")

    @property
    def stationary_density(self) -> float:
        return self.p_appear / (self.p_appear + self.p_vanish)


def from_target_density(target_density: float, p_vanish: float,
                        steps_per_window: int = 288) -> MarkovEdgeParams:
    """Derive appearance probability for a wanted stationary occupancy."""
    if not 0 < target_density < 1:
        raise GenerationError("target density must be in (0, 1)")
    if not 0 < p_vanish < 1:
        raise GenerationError("p_vanish must be in (0, 1)")
    p_appear = target_density * p_vanish / (1.0 - target_density)
    if p_appear >= 1:
        raise GenerationError("infeasible parameters: p_appear >= 1")
    return MarkovEdgeParams(p_appear=p_appear, p_vanish=p_vanish,
                            steps_per_window=steps_per_window,
                            target_density=target_density)


@dataclass(frozen=True)
class GenSpec:
    """Full recipe for one generated network; deterministic given seed."""

    node_count: int
    window_count: int
    params: MarkovEdgeParams
    seed: int | tuple = 0
    burn_in: int = 0
    step_seconds: int = 300
    max_expected_events: int = DEFAULT_MAX_EXPECTED_EVENTS

    def __post_init__(self):
        if self.node_count < 2:
            raise GenerationError("node count must be >= 2")
        if self.window_count < 1:
            raise GenerationError("window count must be >= 1")
        if self.burn_in < 0:
            raise GenerationError("burn-in must be >= 0")
        if self.step_seconds < 1:
            raise GenerationError("step duration must be >= 1 second")

    @property
    def window_length(self) -> int:
        return self.params.steps_per_window * self.step_seconds


def _expected_events(spec: GenSpec) -> float:
    n_pairs = spec.node_count * (spec.node_count - 1) // 2
    density = spec.params.stationary_density
    steps = spec.window_count * spec.params.steps_per_window
    # Run terminations inside windows, plus one forced split per window.
    return n_pairs * density * (steps * spec.params.p_vanish + spec.window_count)


def generate(spec: GenSpec) -> TemporalNetwork:
    """Simulate all pair chains and assemble the temporal network.

    Chains initialize at the stationary distribution, so burn-in is optional.
    """
    expected = _expected_events(spec)
    if expected > spec.max_expected_events:
        raise GenerationError(
            f"expected ~{expected:.0f} events exceeds guard of "
            f"{spec.max_expected_events}; lower density or size")

    n = spec.node_count
    pu, pv = np.triu_indices(n, k=1)
    n_pairs = len(pu)
    p = spec.params
    rng = _seeded_rng(spec.seed)

    state = rng.random(n_pairs) < p.stationary_density
    for _ in range(spec.burn_in):
        r = rng.random(n_pairs)
        state = np.where(state, r >= p.p_vanish, r < p.p_appear)

    spw = p.steps_per_window
    sec = spec.step_seconds
    windows = []
    run_start = np.where(state, 0, -1).astype(np.int64)
    # run_start semantics: step index within the current window at which the
    # currently-open run began, -1 if the pair is off.
    for tau in range(spec.window_count):
        ev_pair, ev_start, ev_len = [], [], []
        for s in range(spw):
            r = rng.random(n_pairs)
            new_state = np.where(state, r >= p.p_vanish, r < p.p_appear)
            turned_on = new_state & ~state
            turned_off = state & ~new_state
            if turned_off.any():
                idx = np.flatnonzero(turned_off)
                starts = run_start[idx]
                live = starts < s  # zero-length carry runs are not events
                if live.any():
                    ev_pair.append(idx[live])
                    ev_start.append(starts[live])
                    ev_len.append(s - starts[live])
                run_start[idx] = -1
            if turned_on.any():
                run_start[turned_on] = s
            state = new_state
        open_runs = np.flatnonzero(state)
        if len(open_runs):
            ev_pair.append(open_runs)
            ev_start.append(run_start[open_runs])
            ev_len.append(spw - run_start[open_runs])
        run_start = np.where(state, 0, -1).astype(np.int64)
        if ev_pair:
            pair_idx = np.concatenate(ev_pair)
            start = np.concatenate(ev_start)
            length = np.concatenate(ev_len)
            windows.append(SnapshotGraph(
                tau, spec.window_length,
                pu[pair_idx], pv[pair_idx], start * sec, length * sec))
        else:
            windows.append(SnapshotGraph(tau, spec.window_length))
    return TemporalNetwork(n, windows)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float


def ks_two_sample(a, b) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test.

    D is the sup-distance between the two empirical CDFs; the p-value comes
    from the asymptotic Kolmogorov distribution at effective sample size
    |a||b| / (|a|+|b|).
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise GenerationError("empty sample")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    d = float(np.abs(cdf_a - cdf_b).max())
    n_eff = len(a) * len(b) / (len(a) + len(b))
    p_value = float(kolmogorov(np.sqrt(n_eff) * d))
    return KsResult(statistic=d, p_value=p_value)


@dataclass(frozen=True)
class HomogeneityReport:
    """Pairwise KS comparison of pooled per-window degree sequences."""

    alpha: float
    results: tuple  # of (i, j, statistic, p_value)
    rejected: tuple  # of (i, j) with p_value < alpha

    @property
    def rejection_rate(self) -> float:
        return len(self.rejected) / len(self.results) if self.results else 0.0


def pooled_degree_sample(net: TemporalNetwork) -> np.ndarray:
    """All per-window degree sequences of one network, concatenated."""
    return np.concatenate(
        [degree_sequence(g, net.node_count) for g in net.windows])


def validate_homogeneity(nets: Sequence[TemporalNetwork],
                         alpha: float = 0.05) -> HomogeneityReport:
    """KS-compare every pair of networks on pooled degree sequences."""
    if len(nets) < 2:
        raise GenerationError("need at least two networks")
    if len({n.node_count for n in nets}) != 1:
        raise GraphError("mismatched node counts")
    samples = [pooled_degree_sample(n) for n in nets]
    results, rejected = [], []
    for i in range(len(nets)):
        for j in range(i + 1, len(nets)):
            ks = ks_two_sample(samples[i], samples[j])
            results.append((i, j, ks.statistic, ks.p_value))
            if ks.p_value < alpha:
                rejected.append((i, j))
    return HomogeneityReport(alpha=alpha, results=tuple(results),
                             rejected=tuple(rejected))
