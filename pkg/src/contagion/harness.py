"""Scenario catalog and Monte Carlo orchestration.

Scenarios bundle a network source, an intervention chain, pathogen
parameters, seeding, and iteration counts. Per-iteration RNG streams derive
from (master_seed, iteration), so results are independent of worker count and
comparisons between scenarios or sweep cells share random numbers.

Generated-network scenarios draw each iteration's network from a small
deterministic pool (iteration mod pool_size) rather than regenerating per
iteration; the pool size is recorded in the result metadata.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import netgen
from .engine import PathogenParams, SeedSpec, run
from .graph import TemporalNetwork, disjoint_union, read_network
from .ingest import SyntheticCnsSpec, synthetic_cns_network
from .interventions import random_attendance, temporal_dilation
from .seeding import rng as _seeded_rng

DESK = "desk"
PAPER = "paper"


class HarnessError(ValueError):
    """Invalid scenario configuration."""


@dataclass(frozen=True)
class GeneratedSource:
    """Random-network source; `policy` selects the construction:

    - "none": one network on the full universe
    - "alternating": two independent half-size networks active on
      alternating windows (regenerate mode)
    - "attendance": full network filtered to a random per-window subset
    - "spatial": k independent networks of ~n/k nodes, disjoint union
    """

    node_count: int
    window_count: int
    density: float
    p_vanish: float = 0.8
    steps_per_window: int = 1
    step_seconds: int = 86400
    policy: str = "none"
    k: int = 1
    fraction: float = 0.5
    pool_size: int = 10


@dataclass(frozen=True)
class SyntheticCnsSource:
    """CNS-shaped synthetic community, optionally time-dilated."""

    spec: SyntheticCnsSpec
    dilation: int = 1


@dataclass(frozen=True)
class DirectorySource:
    """Canonical network directory, optionally time-dilated."""

    path: str
    dilation: int = 1


@dataclass(frozen=True)
class SweepSpec:
    """Family axis: run the scenario once per value of `param`."""

    param: str  # "d_min" or "spatial_k"
    values: tuple


@dataclass(frozen=True)
class Scenario:
    name: str
    source: object
    pathogen: PathogenParams
    mode: str
    seed_count: int
    placement_windows: tuple[int, ...]
    iterations: int
    master_seed: int = 0
    sweep: SweepSpec | None = None
    description: str = ""

    def __post_init__(self):
        if self.iterations < 1:
            raise HarnessError("iterations must be >= 1")
        if self.sweep is not None:
            vals = self.sweep.values
            if not vals or any(v <= 0 for v in vals):
                raise HarnessError("sweep values must be positive")


def _gen_spec(src: GeneratedSource, node_count: int, seed) -> netgen.GenSpec:
    params = netgen.from_target_density(
        src.density, src.p_vanish, src.steps_per_window)
    return netgen.GenSpec(node_count=node_count, window_count=src.window_count,
                          params=params, seed=seed, step_seconds=src.step_seconds)


def _build_generated(src: GeneratedSource, master_seed: int,
                     pool_idx: int) -> TemporalNetwork:
    base = ("net", master_seed, pool_idx)
    if src.policy == "none":
        return netgen.generate(_gen_spec(src, src.node_count, base))
    if src.policy == "attendance":
        net = netgen.generate(_gen_spec(src, src.node_count, base))
        rng = _seeded_rng(("attendance", master_seed, pool_idx))
        return random_attendance(net, src.fraction, rng)
    if src.policy == "alternating":
        half = src.node_count // 2
        pods = [netgen.generate(_gen_spec(src, half, base + (i,)))
                for i in range(2)]
        combined = disjoint_union(pods)
        # Pod i's events survive only on windows with tau mod 2 == i.
        masked = []
        for tau, g in enumerate(combined.windows):
            active_pod = tau % 2
            lo = active_pod * half
            hi = lo + half
            mask = (g.u >= lo) & (g.u < hi) & (g.v >= lo) & (g.v < hi)
            masked.append(type(g)(tau, g.window_length, g.u[mask], g.v[mask],
                                  g.offset[mask], g.duration[mask]))
        return TemporalNetwork(combined.node_count, masked)
    if src.policy == "spatial":
        k = src.k
        sizes = [src.node_count // k + (1 if i < src.node_count % k else 0)
                 for i in range(k)]
        pods = [netgen.generate(_gen_spec(src, sizes[i], base + (i,)))
                for i in range(k)]
        return disjoint_union(pods) if k > 1 else pods[0]
    raise HarnessError(f"unknown generated-network policy: {src.policy}")


def _apply_dilation(net: TemporalNetwork, k: int) -> TemporalNetwork:
    return net if k <= 1 else temporal_dilation(net, k)


class _NetworkProvider:
    """Per-iteration network lookup with pool caching (one per process)."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._cache: dict[int, TemporalNetwork] = {}

    def get(self, iteration: int) -> TemporalNetwork:
        src = self.scenario.source
        if isinstance(src, GeneratedSource):
            key = iteration % src.pool_size
            if key not in self._cache:
                self._cache[key] = _build_generated(
                    src, self.scenario.master_seed, key)
            return self._cache[key]
        if 0 not in self._cache:
            if isinstance(src, SyntheticCnsSource):
                net = _apply_dilation(synthetic_cns_network(src.spec), src.dilation)
            elif isinstance(src, DirectorySource):
                net = _apply_dilation(read_network(src.path), src.dilation)
            else:
                raise HarnessError(f"unknown network source: {src!r}")
            self._cache[0] = net
        return self._cache[0]


def _iteration_seed(master_seed: int, iteration: int):
    return (master_seed, iteration)


def _run_iteration(provider: _NetworkProvider, scenario: Scenario,
                   iteration: int):
    net = provider.get(iteration)
    seed_spec = SeedSpec(count=scenario.seed_count,
                         placement_windows=scenario.placement_windows,
                         rng_seed=_iteration_seed(scenario.master_seed, iteration))
    result = run(net, scenario.pathogen, seed_spec, mode=scenario.mode)
    return result.final_infected_fraction, result.counts


def _run_batch(scenario: Scenario, iterations: Sequence[int]):
    provider = _NetworkProvider(scenario)
    return [_run_iteration(provider, scenario, it) for it in iterations]


@dataclass
class ScenarioResult:
    scenario: Scenario
    finals: np.ndarray  # per-iteration final infected fraction
    mean_counts: np.ndarray  # (window_count, 4)
    ci95_counts: np.ndarray  # (window_count, 4) half-widths
    meta: dict

    @property
    def mean_final(self) -> float:
        return float(self.finals.mean())

    @property
    def se_final(self) -> float:
        return float(self.finals.std(ddof=1) / np.sqrt(len(self.finals))) \
            if len(self.finals) > 1 else 0.0


def _scenario_hash(scenario: Scenario) -> str:
    blob = json.dumps(asdict(scenario), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_scenario(scenario: Scenario, workers: int = 1) -> ScenarioResult:
    """Execute all iterations; deterministic given master_seed regardless of
    worker count (per-iteration seeds, ordered reduction)."""
    indices = list(range(scenario.iterations))
    if workers <= 1:
        rows = _run_batch(scenario, indices)
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_batch, [scenario] * workers, chunks))
        ordered = {}
        for chunk, part in zip(chunks, parts):
            for it, row in zip(chunk, part):
                ordered[it] = row
        rows = [ordered[it] for it in indices]
    finals = np.array([r[0] for r in rows])
    counts = np.stack([r[1] for r in rows])  # (iters, windows, 4)
    mean_counts = counts.mean(axis=0)
    if len(rows) > 1:
        ci95 = 1.96 * counts.std(axis=0, ddof=1) / np.sqrt(len(rows))
    else:
        ci95 = np.zeros_like(mean_counts, dtype=float)
    from . import __version__
    meta = {
        "scenario": asdict(scenario),
        "scenario_hash": _scenario_hash(scenario),
        "iterations": scenario.iterations,
        "master_seed": scenario.master_seed,
        "code_version": __version__,
    }
    return ScenarioResult(scenario=scenario, finals=finals,
                          mean_counts=mean_counts, ci95_counts=ci95, meta=meta)


@dataclass(frozen=True)
class BoxStats:
    """Five-number summary plus 1.5 IQR outliers."""

    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    outliers: tuple[float, ...]


def box_stats(values) -> BoxStats:
    values = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outliers = tuple(float(v) for v in values[(values < lo) | (values > hi)])
    return BoxStats(minimum=float(values.min()), q1=float(q1),
                    median=float(med), q3=float(q3),
                    maximum=float(values.max()), outliers=outliers)


@dataclass
class SweepResult:
    scenario: Scenario
    param: str
    values: tuple
    finals: np.ndarray  # (len(values), iterations)
    stats: list  # of BoxStats, aligned with values
    meta: dict

    def medians(self) -> np.ndarray:
        return np.array([s.median for s in self.stats])


def _scenario_for_value(scenario: Scenario, param: str, value) -> Scenario:
    if param == "d_min":
        return replace(scenario, sweep=None,
                       pathogen=replace(scenario.pathogen, d_min=int(value)))
    if param == "spatial_k":
        src = scenario.source
        if not isinstance(src, GeneratedSource):
            raise HarnessError("spatial_k sweeps need a generated source")
        return replace(scenario, sweep=None,
                       source=replace(src, policy="spatial", k=int(value)))
    raise HarnessError(f"unknown sweep parameter: {param}")


def run_sweep(scenario: Scenario, workers: int = 1) -> SweepResult:
    """Run the scenario once per sweep value under common random numbers."""
    if scenario.sweep is None:
        raise HarnessError("scenario has no sweep axis")
    if scenario.sweep.param == "d_min" and scenario.mode != "weighted":
        raise HarnessError("weighted mode requires durations")
    cells = []
    for value in scenario.sweep.values:
        cell = _scenario_for_value(scenario, scenario.sweep.param, value)
        cells.append(run_scenario(cell, workers=workers))
    finals = np.stack([c.finals for c in cells])
    stats = [box_stats(c.finals) for c in cells]
    meta = {
        "scenario": asdict(scenario),
        "scenario_hash": _scenario_hash(scenario),
        "param": scenario.sweep.param,
        "values": list(scenario.sweep.values),
        "code_version": cells[0].meta["code_version"],
    }
    return SweepResult(scenario=scenario, param=scenario.sweep.param,
                       values=scenario.sweep.values, finals=finals,
                       stats=stats, meta=meta)


def write_scenario_result(result: ScenarioResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mean, ci = result.mean_counts, result.ci95_counts
    with open(out / "curves.csv", "w", encoding="utf-8") as fh:
        fh.write("window,mean_S,mean_E,mean_I,mean_R,"
                 "ci95_S,ci95_E,ci95_I,ci95_R\n")
        for tau in range(mean.shape[0]):
            row = [tau] + [f"{mean[tau, s]:.6f}" for s in range(4)] \
                + [f"{ci[tau, s]:.6f}" for s in range(4)]
            fh.write(",".join(str(x) for x in row) + "\n")
    with open(out / "finals.csv", "w", encoding="utf-8") as fh:
        fh.write("iteration,infected_fraction\n")
        for it, frac in enumerate(result.finals):
            fh.write(f"{it},{frac:.6f}\n")
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(result.meta, fh, indent=2, default=str)
        fh.write("\n")


def write_sweep_result(result: SweepResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write(f"{result.param},min,q1,median,q3,max\n")
        for value, s in zip(result.values, result.stats):
            fh.write(f"{value},{s.minimum:.6f},{s.q1:.6f},{s.median:.6f},"
                     f"{s.q3:.6f},{s.maximum:.6f}\n")
    with open(out / "finals.csv", "w", encoding="utf-8") as fh:
        fh.write(f"{result.param},iteration,infected_fraction\n")
        for vi, value in enumerate(result.values):
            for it in range(result.finals.shape[1]):
                fh.write(f"{value},{it},{result.finals[vi, it]:.6f}\n")
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(result.meta, fh, indent=2, default=str)
        fh.write("\n")


# --- Built-in catalog -------------------------------------------------------

_SCALES = {
    DESK: dict(node_count=200, window_count=500, iterations=200,
               cns_nodes=100, cns_days=28, pool_size=10),
    PAPER: dict(node_count=1000, window_count=10000, iterations=1000,
                cns_nodes=500, cns_days=28, pool_size=50),
}

_RANDOM_NET_PATHOGEN = PathogenParams(p_max=0.2, d_min=0, d_max=86400,
                                      p_epsilon=0.001, latency_windows=1,
                                      infectious_windows=4)
# d_max covers the whole swept d_min range so the d_min <= d_max invariant
# holds at every sweep cell.
_CNS_PATHOGEN = PathogenParams(p_max=0.6, d_min=300, d_max=7200,
                               p_epsilon=0.001, latency_windows=1,
                               infectious_windows=4)
_RANDOM_NET_DENSITY = 0.04
_DMIN_SWEEP = tuple(range(300, 7201, 300))  # 5..120 minutes by 5


def builtin_scenarios(scale: str = DESK, master_seed: int = 2022,
                      **overrides) -> dict[str, Scenario]:
    """The experiment catalog; scale knobs select desk or paper size.

    Supported overrides: node_count, window_count, iterations, cns_nodes,
    cns_days, pool_size.
    """
    if scale not in _SCALES:
        raise HarnessError(f"unknown scale: {scale}")
    cfg = dict(_SCALES[scale])
    unknown = set(overrides) - set(cfg)
    if unknown:
        raise HarnessError(f"unknown overrides: {sorted(unknown)}")
    cfg.update(overrides)

    def gsrc(**kw):
        return GeneratedSource(node_count=cfg["node_count"],
                               window_count=cfg["window_count"],
                               density=_RANDOM_NET_DENSITY,
                               pool_size=cfg["pool_size"], **kw)

    def cns(dilation):
        return SyntheticCnsSource(
            spec=SyntheticCnsSpec(node_count=cfg["cns_nodes"],
                                  days=cfg["cns_days"],
                                  seed=("cns", master_seed)),
            dilation=dilation)

    catalog = {}

    def add(name, source, pathogen, mode, seeds, placement, sweep=None,
            description=""):
        catalog[name] = Scenario(
            name=name, source=source, pathogen=pathogen, mode=mode,
            seed_count=seeds, placement_windows=placement,
            iterations=cfg["iterations"], master_seed=master_seed,
            sweep=sweep, description=description)

    add("a1_alternating_2seeds", gsrc(policy="alternating"),
        _RANDOM_NET_PATHOGEN, "uniform", 2, (0, 1),
        description="Two disjoint pods active on alternating windows, "
                    "2 initial patients.")
    add("a2_attendance_2seeds", gsrc(policy="attendance", fraction=0.5),
        _RANDOM_NET_PATHOGEN, "uniform", 2, (0, 1),
        description="Random half of the nodes active each window, "
                    "2 initial patients.")
    add("a1_alternating_10seeds", gsrc(policy="alternating"),
        _RANDOM_NET_PATHOGEN, "uniform", 10, (0, 1),
        description="Alternating disjoint pods, 10 initial patients.")
    add("a2_attendance_10seeds", gsrc(policy="attendance", fraction=0.5),
        _RANDOM_NET_PATHOGEN, "uniform", 10, (0, 1),
        description="Random attendance, 10 initial patients.")

    ks = tuple(range(1, 7)) if scale == DESK else tuple(range(1, 11))
    add("b_spatial_2seeds", gsrc(), _RANDOM_NET_PATHOGEN, "uniform", 2, (0,),
        sweep=SweepSpec(param="spatial_k", values=ks),
        description="Disjoint spatial pods, swept over pod count, "
                    "2 initial patients.")
    add("b_spatial_10seeds", gsrc(), _RANDOM_NET_PATHOGEN, "uniform", 10, (0,),
        sweep=SweepSpec(param="spatial_k", values=ks),
        description="Disjoint spatial pods, swept over pod count, "
                    "10 initial patients.")

    for k in (1, 2, 3):
        add(f"c_dilation_k{k}", cns(k), _CNS_PATHOGEN, "weighted", 1, (0,),
            description=f"CNS-shaped community, timeline dilated x{k}, "
                        "duration-weighted exposure.")
    for k in (1, 2, 3):
        add(f"d_dmin_sweep_k{k}", cns(k), _CNS_PATHOGEN, "weighted", 1, (0,),
            sweep=SweepSpec(param="d_min", values=_DMIN_SWEEP),
            description=f"Minimal-exposure sweep (5..120 min) on the "
                        f"CNS-shaped community, dilation x{k}.")
    return catalog
