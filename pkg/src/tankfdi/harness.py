"""Scenario suites, detector evaluation and comparison metrics.

A suite is a list of fault scenarios sharing one operating point. Evaluation
simulates each scenario, streams the residuals through the detector, and
classifies the outcome per scenario:

    proper       flagged set equals injected set, every flag after its fault
    missed       some but not all injected faults flagged, no extras
    bad          faults injected but nothing flagged at all
    false_alarm  an un-faulted variable flagged, or a flag before its fault

Suite generation samples fault combinations from the catalog that the
detector's rule structure can isolate in principle (sign-blind reasoning on
residual supports cannot distinguish fault sets whose combined signatures
coincide, so sampling those would put a hard ceiling on any tuning run).
Constructed compensation pairs on {De2, Df2} with canceling contributions
to the second residual are mixed in at a fixed cadence.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import fuzzy, plant, residuals
from .fuzzy import DetectorConfig, DetectorKernel, Memberships, RuleBase
from .plant import FaultEvent, FaultScenario, PlantParams, SchemaError, VARIABLES

CLASSIFICATIONS = ("proper", "missed", "bad", "false_alarm")


@dataclass(frozen=True)
class DetectionReport:
    """Per-scenario decision, first-flag times and detection delays."""

    scenario_id: int
    injected: frozenset[str]
    flagged: dict[str, float]
    classification: str
    delays: dict[str, float]


@dataclass(frozen=True)
class SuiteMetrics:
    """Aggregate outcome over one suite."""

    proper_rate: float
    mean_delay: float
    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class SuiteSpec:
    """Knobs for random suite generation."""

    multiplicity: dict[int, float] = field(
        default_factory=lambda: {1: 0.5, 2: 0.5})
    magnitude_range: tuple[float, float] = (1.0, 2.5)
    start_fraction: tuple[float, float] = (0.2, 0.4)
    duration: float = 20.0
    dt: float = 0.1
    noise_std_R: float = 0.02
    noise_std_C: float = 0.02
    ramp_fraction: float = 0.3
    # Ramp slope = magnitude / ramp_time. Kept shallow: a pressure-channel
    # ramp feeds its slope straight into the residual derivative term, and
    # slopes near the fault detection band would mimic a source fault during
    # the initial climb.
    ramp_time: float = 20.0
    compensation_every: int = 25
    restrict_to_isolable: bool = True
    max_fault_order: int = fuzzy.DEFAULT_MAX_FAULT_ORDER

    def __post_init__(self):
        if not self.multiplicity:
            raise ValueError("multiplicity distribution must not be empty")
        for m, p in self.multiplicity.items():
            if not 1 <= m <= 7:
                raise ValueError(f"fault multiplicity {m} outside [1, 7]")
            if p < 0:
                raise ValueError("multiplicity weights must be non-negative")
        if sum(self.multiplicity.values()) <= 0:
            raise ValueError("multiplicity weights must sum to a positive value")
        lo, hi = self.magnitude_range
        if not 0 < lo <= hi:
            raise ValueError("magnitude_range must be positive and ordered")
        f0, f1 = self.start_fraction
        if not 0 <= f0 <= f1 < 1:
            raise ValueError("start_fraction must satisfy 0 <= lo <= hi < 1")


# ---------------------------------------------------------------------------
# Isolability analysis of the rule structure

def ideal_flag_set(support: Iterable[int], rulebase: RuleBase) -> frozenset[str]:
    """Variables a detector would flag for an idealized residual pattern.

    The pattern has saturated non-zero membership on the residuals in
    ``support`` (1-based indices) and perfect zero membership elsewhere;
    a variable is flagged when its alarm activation is full and no rule
    upholds its normal state.
    """
    support = set(support)
    table = [
        Memberships(0.0, 0.0, 0.0, 1.0, 0.0) if arr in support
        else Memberships(0.0, 0.0, 1.0, 0.0, 0.0)
        for arr in range(1, 6)
    ]
    act = fuzzy.infer(table, rulebase)
    return frozenset(v for v in VARIABLES
                     if act[v]["AL"] >= 1.0 - 1e-12 and act[v]["OK"] <= 1e-12)


def isolable_combinations(rulebase: RuleBase | None = None,
                          max_multiplicity: int = 2,
                          ) -> dict[int, list[tuple[str, ...]]]:
    """Fault sets whose generic residual pattern is flagged exactly.

    Combinations whose combined signatures collide with other candidate
    sets are excluded; no tuning can separate them under sign-blind
    support reasoning.
    """
    if rulebase is None:
        rulebase = fuzzy.build_rulebase()
    sig = residuals.signature_matrix()
    rows = {v: sig.row(v) for v in VARIABLES}
    catalog: dict[int, list[tuple[str, ...]]] = {}
    for m in range(1, max_multiplicity + 1):
        good = []
        for combo in itertools.combinations(VARIABLES, m):
            support = set().union(*(rows[v] for v in combo))
            if ideal_flag_set(support, rulebase) == frozenset(combo):
                good.append(combo)
        catalog[m] = good
    return catalog


def compensation_pair(magnitude: float, params: PlantParams,
                      start: float) -> tuple[FaultEvent, FaultEvent]:
    """Step faults on De2 and Df2 whose contributions to r2 cancel exactly.

    A settled De2 offset m shifts r2 by -m/R2; the Df2 offset is chosen as
    -m/R2 so the two contributions sum to zero while r3, r4 and r5 remain
    perturbed.
    """
    return (FaultEvent("De2", start, magnitude, "step"),
            FaultEvent("Df2", start, -magnitude / params.R2, "step"))


# ---------------------------------------------------------------------------
# Suite generation

def generate_suite(n: int, seed: int, spec: SuiteSpec | None = None,
                   params: PlantParams | None = None) -> list[FaultScenario]:
    """Generate ``n`` fault scenarios, deterministic for a given seed."""
    if n < 1:
        raise ValueError("suite size must be at least 1")
    spec = spec or SuiteSpec()
    params = params or PlantParams()
    rng = np.random.default_rng(seed)

    max_mult = max(spec.multiplicity)
    if spec.restrict_to_isolable:
        rulebase = fuzzy.build_rulebase(max_fault_order=spec.max_fault_order)
        catalog = isolable_combinations(rulebase, max_mult)
        for m, weight in spec.multiplicity.items():
            if weight > 0 and not catalog.get(m):
                raise ValueError(
                    f"no isolable fault combination of multiplicity {m}; "
                    "the suite spec is infeasible for this rule structure")
    else:
        catalog = {m: list(itertools.combinations(VARIABLES, m))
                   for m in range(1, max_mult + 1)}

    mults = sorted(spec.multiplicity)
    weights = np.array([spec.multiplicity[m] for m in mults], dtype=float)
    weights /= weights.sum()

    comp_indices = {i for i in range(n) if (i + 1) % spec.compensation_every == 0}
    if not comp_indices:
        comp_indices = {n - 1}

    def draw_start() -> float:
        f0, f1 = spec.start_fraction
        return float(rng.uniform(f0, f1) * spec.duration)

    def draw_magnitude() -> float:
        lo, hi = spec.magnitude_range
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return float(sign * rng.uniform(lo, hi))

    scenarios = []
    for i in range(n):
        scenario_seed = int(rng.integers(0, 2**31 - 1))
        if i in comp_indices:
            events = compensation_pair(draw_magnitude(), params, draw_start())
        else:
            m = int(rng.choice(mults, p=weights))
            combo = catalog[m][int(rng.integers(len(catalog[m])))]
            events = []
            for target in combo:
                magnitude = draw_magnitude()
                if rng.random() < spec.ramp_fraction:
                    events.append(FaultEvent(target, draw_start(),
                                             magnitude / spec.ramp_time, "ramp"))
                else:
                    events.append(FaultEvent(target, draw_start(), magnitude, "step"))
            events = tuple(events)
        scenarios.append(FaultScenario(
            seed=scenario_seed,
            duration=spec.duration,
            dt=spec.dt,
            noise_std_R=spec.noise_std_R,
            noise_std_C=spec.noise_std_C,
            events=events,
        ))
    return scenarios


# ---------------------------------------------------------------------------
# Evaluation

#: Derivative conditioning used by the evaluation pipeline: single-pole
#: smoothing at 3*dt and median-of-3 impulse rejection, so one-sample
#: derivative spikes from measured step faults do not masquerade as
#: short-lived residual support.
DERIVATIVE_TAU_FACTOR = 3.0
DERIVATIVE_SPIKE_WINDOW = 3


def _simulate_residuals(scenario: FaultScenario, params: PlantParams,
                        inputs: tuple[float, float],
                        ) -> tuple[np.ndarray, np.ndarray]:
    trace = plant.run(scenario, params, inputs)
    return residuals.residual_trace(trace, params,
                                    tau=DERIVATIVE_TAU_FACTOR * scenario.dt,
                                    spike_window=DERIVATIVE_SPIKE_WINDOW)


@dataclass(frozen=True)
class ResidualBank:
    """Precomputed residual traces of a suite, reusable across detectors.

    Also carries the suite's residual rows concatenated into one block so a
    detector can be evaluated in a single vectorized pass; ``offsets`` holds
    each scenario's start row (plus one trailing sentinel).
    """

    scenarios: tuple[FaultScenario, ...]
    times: tuple[np.ndarray, ...]
    residuals: tuple[np.ndarray, ...]
    block: np.ndarray
    offsets: np.ndarray

    @classmethod
    def from_suite(cls, suite: Sequence[FaultScenario], params: PlantParams,
                   inputs: tuple[float, float] = (1.0, 0.8),
                   jobs: int = 1) -> "ResidualBank":
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_simulate_residuals, suite,
                                        itertools.repeat(params),
                                        itertools.repeat(inputs)))
        else:
            results = [_simulate_residuals(sc, params, inputs) for sc in suite]
        times = tuple(t for t, _ in results)
        resid = tuple(r for _, r in results)
        block = np.vstack(resid)
        offsets = np.cumsum([0] + [len(r) for r in resid])
        return cls(tuple(suite), times, resid, block, offsets)


def classify(injected_events: Sequence[FaultEvent],
             flag_times: dict[str, float]) -> tuple[str, dict[str, float]]:
    """Classify one scenario outcome and compute per-fault delays."""
    injected = {ev.target for ev in injected_events}
    starts = {}
    for ev in injected_events:
        starts[ev.target] = min(starts.get(ev.target, math.inf), ev.start)

    extras = set(flag_times) - injected
    premature = any(flag_times[v] < starts[v] - 1e-9
                    for v in flag_times.keys() & injected)
    delays = {v: flag_times[v] - starts[v]
              for v in flag_times.keys() & injected
              if flag_times[v] >= starts[v] - 1e-9}

    if extras or premature:
        return "false_alarm", delays
    if injected and not flag_times:
        return "bad", delays
    if set(flag_times) < injected:
        return "missed", delays
    return "proper", delays


def _first_flag_times(times: np.ndarray, flags: np.ndarray) -> dict[str, float]:
    out = {}
    for j, name in enumerate(VARIABLES):
        hits = np.flatnonzero(flags[:, j])
        if hits.size:
            out[name] = float(times[hits[0]])
    return out


DetectorFn = Callable[[FaultScenario, np.ndarray, np.ndarray],
                      tuple[np.ndarray, np.ndarray]]


def evaluate_bank(cfg: DetectorConfig, bank: ResidualBank,
                  detector_fn: DetectorFn | None = None,
                  ) -> tuple[list[DetectionReport], SuiteMetrics]:
    """Run the detector over precomputed residual traces and aggregate."""
    block_flags = None
    if detector_fn is None:
        kernel = DetectorKernel(cfg)
        _, block_flags = kernel.run_block(bank.block, bank.offsets[:-1])
    reports = []
    counts = {c: 0 for c in CLASSIFICATIONS}
    all_delays: list[float] = []
    for idx, scenario in enumerate(bank.scenarios):
        times = bank.times[idx]
        if block_flags is not None:
            flags = block_flags[bank.offsets[idx]: bank.offsets[idx + 1]]
        else:
            _, flags = detector_fn(scenario, times, bank.residuals[idx])
        flag_times = _first_flag_times(times, flags)
        classification, delays = classify(scenario.events, flag_times)
        counts[classification] += 1
        all_delays.extend(delays.values())
        reports.append(DetectionReport(idx, scenario.injected, flag_times,
                                       classification, delays))
    metrics = SuiteMetrics(
        proper_rate=counts["proper"] / len(bank.scenarios),
        mean_delay=float(np.mean(all_delays)) if all_delays else math.nan,
        counts=counts,
    )
    return reports, metrics


def evaluate(cfg: DetectorConfig, suite: Sequence[FaultScenario],
             params: PlantParams, inputs: tuple[float, float] = (1.0, 0.8),
             detector_fn: DetectorFn | None = None, jobs: int = 1,
             ) -> tuple[SuiteMetrics, list[DetectionReport]]:
    """Simulate a suite and evaluate one detector configuration over it."""
    bank = ResidualBank.from_suite(suite, params, inputs, jobs=jobs)
    reports, metrics = evaluate_bank(cfg, bank, detector_fn)
    return metrics, reports


def compare(configs: Sequence[tuple[str, DetectorConfig]],
            suite: Sequence[FaultScenario], params: PlantParams,
            inputs: tuple[float, float] = (1.0, 0.8), jobs: int = 1,
            ) -> list[dict]:
    """Side-by-side metrics of several configurations on one suite."""
    if len(configs) < 2:
        raise ValueError("compare needs at least two configurations")
    bank = ResidualBank.from_suite(suite, params, inputs, jobs=jobs)
    rows = []
    for name, cfg in configs:
        _, metrics = evaluate_bank(cfg, bank)
        rows.append(metrics_row(name, metrics))
    return rows


def metrics_row(name: str, metrics: SuiteMetrics) -> dict:
    return {
        "config": name,
        "scenarios": metrics.total,
        "proper": metrics.counts["proper"],
        "missed": metrics.counts["missed"],
        "bad": metrics.counts["bad"],
        "false_alarm": metrics.counts["false_alarm"],
        "proper_rate": metrics.proper_rate,
        "mean_delay": metrics.mean_delay,
    }


METRICS_COLUMNS = ("config", "scenarios", "proper", "missed", "bad",
                   "false_alarm", "proper_rate", "mean_delay")


def write_metrics_csv(rows: Sequence[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(METRICS_COLUMNS) + "\n")
        for row in rows:
            cells = []
            for col in METRICS_COLUMNS:
                value = row[col]
                cells.append(repr(float(value)) if isinstance(value, float) else str(value))
            fh.write(",".join(cells) + "\n")


def format_table(rows: Sequence[dict]) -> str:
    """Human-readable fixed-width rendering of comparison rows."""
    header = list(METRICS_COLUMNS)
    body = []
    for row in rows:
        body.append([
            str(row["config"]), str(row["scenarios"]), str(row["proper"]),
            str(row["missed"]), str(row["bad"]), str(row["false_alarm"]),
            f"{row['proper_rate']:.3f}",
            "-" if math.isnan(row["mean_delay"]) else f"{row['mean_delay']:.2f}s",
        ])
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for r in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)


def write_reports_jsonl(reports: Sequence[DetectionReport], path: str) -> None:
    """One JSON object per scenario, in suite order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rep in reports:
            obj = {
                "scenario_id": rep.scenario_id,
                "injected": sorted(rep.injected),
                "flagged": {k: rep.flagged[k] for k in sorted(rep.flagged)},
                "classification": rep.classification,
                "delays": {k: rep.delays[k] for k in sorted(rep.delays)},
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Suite files

def suite_to_dict(suite: Sequence[FaultScenario],
                  inputs: tuple[float, float] = (1.0, 0.8)) -> dict:
    return {
        "schema": 1,
        "inputs": {"Msf1": inputs[0], "Msf2": inputs[1]},
        "scenarios": [plant.scenario_to_dict(sc) for sc in suite],
    }


def suite_from_dict(obj: dict) -> tuple[list[FaultScenario], tuple[float, float]]:
    if not isinstance(obj, dict):
        raise SchemaError("suite must be a JSON object")
    if obj.get("schema", 1) != 1:
        raise SchemaError(f"unsupported suite schema {obj.get('schema')!r}")
    if "scenarios" not in obj or not isinstance(obj["scenarios"], list):
        raise SchemaError("suite is missing its 'scenarios' list")
    scenarios = [plant.scenario_from_dict(sc) for sc in obj["scenarios"]]
    inputs = obj.get("inputs", {"Msf1": 1.0, "Msf2": 0.8})
    if not isinstance(inputs, dict) or "Msf1" not in inputs or "Msf2" not in inputs:
        raise SchemaError("suite field 'inputs' must carry Msf1 and Msf2")
    return scenarios, (float(inputs["Msf1"]), float(inputs["Msf2"]))


def save_suite(suite: Sequence[FaultScenario], path: str,
               inputs: tuple[float, float] = (1.0, 0.8)) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(suite_to_dict(suite, inputs), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_suite(path: str) -> tuple[list[FaultScenario], tuple[float, float]]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"suite file is not valid JSON: {exc}") from exc
    return suite_from_dict(obj)
