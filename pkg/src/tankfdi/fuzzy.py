"""Multiple-fault fuzzy detector over the five residuals.

Pipeline per timestep: fuzzify each residual over the symmetric five-set
partition {NB, N, Z, P, PB}, fire a compensation-aware rule base with
MIN-MAX inference to per-variable OK/AL activations, and defuzzify those to
an alarm degree in [0, 1] per supervised variable. Degrees above the alarm
threshold for ``debounce`` consecutive samples raise the fault flag.

The rule base is generated mechanically from the fault-signature matrix:
one rule per candidate fault set, with residuals shared by several
candidate faults left unconstrained so that mutually canceling faults
(compensation) still fire their rule. A rule only concludes AL for the
candidates it actually evidences (those with at least one exclusively
owned residual in the premise) and vouches OK for everything outside its
fault set; without both restrictions, superset hypotheses of the true
fault set would raise false alarms on variables the pattern cannot
implicate.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .plant import VARIABLES, SchemaError
from .residuals import SignatureMatrix, signature_matrix

LINGUISTIC_SETS = ("NB", "N", "Z", "P", "PB")
CONSTRAINTS = LINGUISTIC_SETS + ("nonZ", "any")

DEFAULT_BETA = 25.0
DEFAULT_ALARM_THRESHOLD = 0.5
DEFAULT_DEBOUNCE = 3
DEFAULT_MAX_FAULT_ORDER = 2


class Memberships(NamedTuple):
    """Degrees of one residual value in the five input sets."""

    nb: float
    n: float
    z: float
    p: float
    pb: float

    @property
    def non_zero(self) -> float:
        return max(self.nb, self.n, self.p, self.pb)


@dataclass(frozen=True)
class InputPartition:
    """Symmetric trapezoid boundaries for one residual, plus domain bound."""

    a1: float
    a2: float
    a3: float
    a4: float
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if not (0 < self.a1 < self.a2 <= self.a3 < self.a4 <= self.beta):
            raise ValueError(
                "input partition requires 0 < a1 < a2 <= a3 < a4 <= beta, got "
                f"({self.a1}, {self.a2}, {self.a3}, {self.a4}, beta={self.beta})")


@dataclass(frozen=True)
class OutputPartition:
    """OK/AL boundaries on one variable's deviation axis: a < b <= 0 <= c < d."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a < self.b <= 0.0 <= self.c < self.d):
            raise ValueError(
                f"output partition requires a < b <= 0 <= c < d, got "
                f"({self.a}, {self.b}, {self.c}, {self.d})")

    @property
    def support(self) -> float:
        return self.d - self.a

    @property
    def core(self) -> float:
        return self.c - self.b


def _trapezoid(x: np.ndarray, a: float, b: float, c: float, d: float) -> np.ndarray:
    """Trapezoid membership with support [a, d] and core [b, c].

    Degenerate (vertical) edges are allowed: a == b or c == d.
    """
    out = np.zeros_like(x, dtype=float)
    out[(x >= b) & (x <= c)] = 1.0
    if b > a:
        rise = (x > a) & (x < b)
        out[rise] = (x[rise] - a) / (b - a)
    if d > c:
        fall = (x > c) & (x < d)
        out[fall] = (d - x[fall]) / (d - c)
    return out


def _membership_table(r: np.ndarray, p: InputPartition) -> np.ndarray:
    """Memberships of residual samples ``r`` -> array (..., 5) in set order."""
    x = np.clip(np.asarray(r, dtype=float), -p.beta, p.beta)
    return np.stack([
        _trapezoid(x, -p.beta, -p.beta, -p.a4, -p.a3),
        _trapezoid(x, -p.a4, -p.a3, -p.a2, -p.a1),
        _trapezoid(x, -p.a2, -p.a1, p.a1, p.a2),
        _trapezoid(x, p.a1, p.a2, p.a3, p.a4),
        _trapezoid(x, p.a3, p.a4, p.beta, p.beta),
    ], axis=-1)


def fuzzify(r: float, p: InputPartition) -> Memberships:
    """Crisp residual value -> five membership degrees (NB, N, Z, P, PB)."""
    table = _membership_table(np.array([r]), p)[0]
    return Memberships(*(float(v) for v in table))


# ---------------------------------------------------------------------------
# Rule base

@dataclass(frozen=True)
class Rule:
    """One linguistic if-then rule.

    ``premise`` holds one constraint per residual (index order r1..r5) from
    {NB, N, Z, P, PB, nonZ, any}; ``al``/``ok`` are the variables concluded
    in alarm / normal state; ``members`` records the candidate fault set the
    rule was generated for (empty for the all-clear rule).
    """

    premise: tuple[str, str, str, str, str]
    al: tuple[str, ...]
    ok: tuple[str, ...]
    members: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.premise) != 5:
            raise ValueError("rule premise must constrain exactly 5 residuals")
        for c in self.premise:
            if c not in CONSTRAINTS:
                raise ValueError(f"unknown premise constraint {c!r}")
        for v in self.al + self.ok:
            if v not in VARIABLES:
                raise ValueError(f"unknown variable {v!r} in rule conclusion")


@dataclass(frozen=True)
class RuleBase:
    rules: tuple[Rule, ...]
    max_fault_order: int

    def __post_init__(self):
        al_covered = set()
        ok_covered = set()
        for rule in self.rules:
            al_covered.update(rule.al)
            ok_covered.update(rule.ok)
        missing = [v for v in VARIABLES if v not in al_covered or v not in ok_covered]
        if missing:
            raise ValueError(f"rule base leaves variables without AL or OK rules: {missing}")


def build_rulebase(sig: SignatureMatrix | None = None,
                   max_fault_order: int = DEFAULT_MAX_FAULT_ORDER) -> RuleBase:
    """Generate the rule base from the fault-signature structure.

    For every candidate fault set F (up to ``max_fault_order`` simultaneous
    faults): residuals outside the set's combined signature must be Z,
    residuals touched by exactly one candidate must be nonZ, and residuals
    shared by several candidates are unconstrained (``any``) so that
    canceling fault combinations still fire. The rule concludes AL only for
    candidates owning at least one of the nonZ residuals exclusively, and
    OK for every excluded variable: a firing explanation of the pattern
    vouches for everything outside it, so weak overlap rules cannot raise
    an alarm against a strong competing hypothesis. A final all-Z rule
    concludes OK for all seven variables.
    """
    if sig is None:
        sig = signature_matrix()
    if not 1 <= max_fault_order <= 7:
        raise ValueError("max_fault_order must be in [1, 7]")

    rows = {v: sig.row(v) for v in VARIABLES}
    rules = []
    for order in range(1, max_fault_order + 1):
        for fault_set in itertools.combinations(VARIABLES, order):
            support: set[int] = set()
            touch_count = {arr: 0 for arr in range(1, 6)}
            for v in fault_set:
                support |= rows[v]
                for arr in rows[v]:
                    touch_count[arr] += 1
            premise = []
            for arr in range(1, 6):
                if arr not in support:
                    premise.append("Z")
                elif touch_count[arr] == 1:
                    premise.append("nonZ")
                else:
                    premise.append("any")
            al = []
            for v in fault_set:
                covered_by_others = set()
                for w in fault_set:
                    if w != v:
                        covered_by_others |= rows[w]
                if rows[v] - covered_by_others:
                    al.append(v)
            ok = tuple(v for v in VARIABLES if v not in fault_set)
            rules.append(Rule(tuple(premise), tuple(al), ok, fault_set))
    rules.append(Rule(("Z",) * 5, (), VARIABLES, ()))
    return RuleBase(tuple(rules), max_fault_order)


def _constraint_degree(constraint: str, m: Memberships) -> float:
    if constraint == "Z":
        return m.z
    if constraint == "nonZ":
        return m.non_zero
    if constraint == "any":
        return 1.0
    return getattr(m, constraint.lower())


def infer(memberships: Sequence[Memberships], rb: RuleBase) -> dict[str, dict[str, float]]:
    """MIN-MAX inference: rule firing = min over premise reads, conclusions
    aggregated per variable with max. Returns {variable: {"OK": x, "AL": y}}.
    """
    if len(memberships) != 5:
        raise ValueError("inference needs memberships for exactly 5 residuals")
    activations = {v: {"OK": 0.0, "AL": 0.0} for v in VARIABLES}
    for rule in rb.rules:
        firing = min(_constraint_degree(c, m) for c, m in zip(rule.premise, memberships))
        for v in rule.al:
            activations[v]["AL"] = max(activations[v]["AL"], firing)
        for v in rule.ok:
            activations[v]["OK"] = max(activations[v]["OK"], firing)
    return activations


# ---------------------------------------------------------------------------
# Defuzzification

def clipped_ok_area(activation: float, p: OutputPartition) -> float:
    """Area of the OK trapezoid clipped at ``activation``."""
    s, c = p.support, p.core
    return activation * s - activation * activation * (s - c) / 2.0


def clipped_al_area(activation: float, p: OutputPartition) -> float:
    """Area of the complement-shaped AL flanks clipped at ``activation``."""
    s, c = p.support, p.core
    return (s - c) * (activation - activation * activation / 2.0)


def defuzzify(activation: dict[str, float], p: OutputPartition,
              fallback: float = 0.0) -> float:
    """Alarm degree = AL-side mass fraction of the clipped output sets.

    When neither set is activated there is no information; the caller's
    ``fallback`` (the previously held degree, 0 at the start of a stream)
    is returned instead of forcing a decision.
    """
    ok_mass = clipped_ok_area(activation["OK"], p)
    al_mass = clipped_al_area(activation["AL"], p)
    total = ok_mass + al_mass
    if total <= 0.0:
        return fallback
    return al_mass / total


# ---------------------------------------------------------------------------
# Detector configuration

@dataclass(frozen=True)
class DetectorConfig:
    """The full 48-parameter detector plus rule and decision settings."""

    input_partitions: tuple[InputPartition, ...]
    output_partitions: tuple[OutputPartition, ...]
    rulebase: RuleBase
    alarm_threshold: float = DEFAULT_ALARM_THRESHOLD
    debounce: int = DEFAULT_DEBOUNCE

    def __post_init__(self):
        if len(self.input_partitions) != 5:
            raise ValueError("exactly 5 input partitions required")
        if len(self.output_partitions) != 7:
            raise ValueError("exactly 7 output partitions required")
        if not 0.0 < self.alarm_threshold < 1.0:
            raise ValueError("alarm_threshold must lie strictly between 0 and 1")
        if self.debounce < 1:
            raise ValueError("debounce must be at least 1 sample")


#: Genome layout: (a1, a2, a3, a4) per residual 1..5, then (a, b, c, d) per
#: output variable in VARIABLES order. 48 entries total.
PARAM_COUNT = 48


def params_to_config(x: Sequence[float], beta: float = DEFAULT_BETA,
                     max_fault_order: int = DEFAULT_MAX_FAULT_ORDER,
                     alarm_threshold: float = DEFAULT_ALARM_THRESHOLD,
                     debounce: int = DEFAULT_DEBOUNCE,
                     rulebase: RuleBase | None = None,
                     ) -> tuple[DetectorConfig, bool]:
    """Build a DetectorConfig from a 48-entry parameter vector.

    Ordering violations are repaired (inputs: sort ascending plus epsilon
    separation of strict boundaries; outputs: sign projection and ordering)
    and reported through the returned flag.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (PARAM_COUNT,):
        raise ValueError(f"parameter vector must have exactly {PARAM_COUNT} entries")
    eps = 1e-6
    repaired = False

    inputs = []
    for i in range(5):
        raw = tuple(x[4 * i: 4 * i + 4])
        v = sorted(raw)
        a1 = max(v[0], eps)
        a2 = max(v[1], a1 + eps)
        a3 = max(v[2], a2)
        a4 = max(v[3], a3 + eps)
        b = max(beta, a4)
        if (a1, a2, a3, a4) != raw or b != beta:
            repaired = True
        inputs.append(InputPartition(a1, a2, a3, a4, b))

    outputs = []
    for j in range(7):
        raw = tuple(x[20 + 4 * j: 20 + 4 * j + 4])
        a, b = sorted((min(raw[0], 0.0), min(raw[1], 0.0)))
        c, d = sorted((max(raw[2], 0.0), max(raw[3], 0.0)))
        if a == b:
            a = b - eps
        if c == d:
            d = c + eps
        if (a, b, c, d) != raw:
            repaired = True
        outputs.append(OutputPartition(a, b, c, d))

    if rulebase is None:
        rulebase = build_rulebase(max_fault_order=max_fault_order)
    cfg = DetectorConfig(tuple(inputs), tuple(outputs), rulebase,
                         alarm_threshold, debounce)
    return cfg, repaired


def config_to_params(cfg: DetectorConfig) -> np.ndarray:
    """Inverse of params_to_config for valid configs (round-trip identity)."""
    out = np.empty(PARAM_COUNT)
    for i, p in enumerate(cfg.input_partitions):
        out[4 * i: 4 * i + 4] = (p.a1, p.a2, p.a3, p.a4)
    for j, p in enumerate(cfg.output_partitions):
        out[20 + 4 * j: 20 + 4 * j + 4] = (p.a, p.b, p.c, p.d)
    return out


def config_to_dict(cfg: DetectorConfig) -> dict:
    return {
        "schema": 1,
        "input_partitions": [
            {"a1": p.a1, "a2": p.a2, "a3": p.a3, "a4": p.a4, "beta": p.beta}
            for p in cfg.input_partitions
        ],
        "output_partitions": [
            {"a": p.a, "b": p.b, "c": p.c, "d": p.d}
            for p in cfg.output_partitions
        ],
        "max_fault_order": cfg.rulebase.max_fault_order,
        "alarm_threshold": cfg.alarm_threshold,
        "debounce": cfg.debounce,
    }


def config_from_dict(obj: dict) -> DetectorConfig:
    if not isinstance(obj, dict):
        raise SchemaError("detector config must be a JSON object")
    if obj.get("schema", 1) != 1:
        raise SchemaError(f"unsupported detector config schema {obj.get('schema')!r}")
    try:
        inputs = tuple(
            InputPartition(p["a1"], p["a2"], p["a3"], p["a4"], p.get("beta", DEFAULT_BETA))
            for p in obj["input_partitions"]
        )
        outputs = tuple(
            OutputPartition(p["a"], p["b"], p["c"], p["d"])
            for p in obj["output_partitions"]
        )
        rb = build_rulebase(max_fault_order=int(obj.get("max_fault_order",
                                                        DEFAULT_MAX_FAULT_ORDER)))
        return DetectorConfig(inputs, outputs, rb,
                              float(obj.get("alarm_threshold", DEFAULT_ALARM_THRESHOLD)),
                              int(obj.get("debounce", DEFAULT_DEBOUNCE)))
    except KeyError as exc:
        raise SchemaError(f"detector config is missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid detector config: {exc}") from exc


def save_config(cfg: DetectorConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path: str) -> DetectorConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"detector config is not valid JSON: {exc}") from exc
    return config_from_dict(obj)


# ---------------------------------------------------------------------------
# Vectorized detection kernel and streaming detector

_CODE = {"Z": 0, "nonZ": 1, "any": 2, "NB": 3, "N": 4, "P": 5, "PB": 6}


class DetectorKernel:
    """Batch evaluation of the full pipeline over residual arrays.

    Shares its formulas with the scalar API; the streaming Detector runs
    single rows through this kernel so both paths agree bit for bit.
    """

    def __init__(self, cfg: DetectorConfig):
        self.cfg = cfg
        rules = cfg.rulebase.rules
        self.codes = np.array([[_CODE[c] for c in r.premise] for r in rules],
                              dtype=np.intp)
        self.al_mask = np.zeros((len(rules), 7), dtype=bool)
        self.ok_mask = np.zeros((len(rules), 7), dtype=bool)
        for k, rule in enumerate(rules):
            for v in rule.al:
                self.al_mask[k, VARIABLES.index(v)] = True
            for v in rule.ok:
                self.ok_mask[k, VARIABLES.index(v)] = True
        self.support = np.array([p.support for p in cfg.output_partitions])
        self.core = np.array([p.core for p in cfg.output_partitions])
        self._j_idx = np.arange(5)[:, None]

    def activations(self, residuals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-variable (AL, OK) activations for residual rows (T, 5)."""
        r = np.asarray(residuals, dtype=float)
        t_len = r.shape[0]
        tables = [
            _membership_table(r[:, i], p)
            for i, p in enumerate(self.cfg.input_partitions)
        ]  # each (T, 5 sets) ordered NB, N, Z, P, PB
        comp = np.empty((t_len, 5, 7))
        for i, tab in enumerate(tables):
            comp[:, i, 0] = tab[:, 2]                       # Z
            comp[:, i, 1] = tab[:, [0, 1, 3, 4]].max(axis=1)  # nonZ
            comp[:, i, 2] = 1.0                             # any
            comp[:, i, 3] = tab[:, 0]                       # NB
            comp[:, i, 4] = tab[:, 1]                       # N
            comp[:, i, 5] = tab[:, 3]                       # P
            comp[:, i, 6] = tab[:, 4]                       # PB
        firing = comp[:, self._j_idx, self.codes.T].min(axis=1)  # (T, R)
        al = np.zeros((t_len, 7))
        ok = np.zeros((t_len, 7))
        for j in range(7):
            if self.al_mask[:, j].any():
                al[:, j] = firing[:, self.al_mask[:, j]].max(axis=1)
            if self.ok_mask[:, j].any():
                ok[:, j] = firing[:, self.ok_mask[:, j]].max(axis=1)
        return al, ok

    def degrees(self, residuals: np.ndarray,
                held0: np.ndarray | None = None) -> np.ndarray:
        """Alarm degrees (T, 7); undefined samples hold the previous degree."""
        al, ok = self.activations(residuals)
        al_mass = (self.support - self.core)[None, :] * (al - al * al / 2.0)
        ok_mass = ok * self.support[None, :] - ok * ok * (self.support - self.core)[None, :] / 2.0
        total = al_mass + ok_mass
        defined = total > 0.0
        raw = np.where(defined, al_mass / np.where(defined, total, 1.0), 0.0)

        t_len = raw.shape[0]
        if held0 is None:
            held0 = np.zeros(7)
        idx = np.where(defined, np.arange(t_len)[:, None], -1)
        idx = np.maximum.accumulate(idx, axis=0)
        filled = np.take_along_axis(raw, np.maximum(idx, 0), axis=0)
        return np.where(idx >= 0, filled, held0[None, :])

    def flags(self, degrees: np.ndarray) -> np.ndarray:
        """Debounced flags: degree above threshold for ``debounce`` consecutive rows."""
        above = degrees > self.cfg.alarm_threshold
        d = self.cfg.debounce
        cum = np.cumsum(above, axis=0)
        window = cum.copy()
        window[d:] = cum[d:] - cum[:-d]
        out = np.zeros_like(above)
        out[d - 1:] = window[d - 1:] == d
        return out

    def run(self, residuals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        degrees = self.degrees(residuals)
        return degrees, self.flags(degrees)

    def run_block(self, residuals: np.ndarray,
                  starts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate several concatenated traces in one vectorized pass.

        ``starts`` holds the first row index of each trace. Hold state and
        debounce windows are reset at trace boundaries, so the result equals
        running each trace separately.
        """
        al, ok = self.activations(residuals)
        span = (self.support - self.core)[None, :]
        al_mass = span * (al - al * al / 2.0)
        ok_mass = ok * self.support[None, :] - ok * ok * span / 2.0
        total = al_mass + ok_mass
        defined = total > 0.0
        raw = np.where(defined, al_mass / np.where(defined, total, 1.0), 0.0)
        raw[starts] = np.where(defined[starts], raw[starts], 0.0)
        defined[starts] = True
        t_len = raw.shape[0]
        idx = np.where(defined, np.arange(t_len)[:, None], -1)
        idx = np.maximum.accumulate(idx, axis=0)
        degrees = np.take_along_axis(raw, idx, axis=0)

        flags = self.flags(degrees)
        d = self.cfg.debounce
        for s in starts:
            flags[s: s + d - 1] = False
        return degrees, flags


class Detector:
    """Streaming detector with per-variable debounce state and held degrees."""

    def __init__(self, cfg: DetectorConfig):
        self.cfg = cfg
        self.kernel = DetectorKernel(cfg)
        self.reset()

    def reset(self) -> None:
        self._held = np.zeros(7)
        self._counts = np.zeros(7, dtype=int)

    def detect(self, residuals) -> tuple[np.ndarray, np.ndarray]:
        """One step: residual values (5,) -> (degrees (7,), flags (7,) bool)."""
        r = residuals.as_array() if hasattr(residuals, "as_array") else np.asarray(residuals)
        degrees = self.kernel.degrees(r.reshape(1, 5), self._held)[0]
        self._held = degrees
        above = degrees > self.cfg.alarm_threshold
        self._counts = np.where(above, self._counts + 1, 0)
        return degrees, self._counts >= self.cfg.debounce


def detect_trace(residuals: np.ndarray, cfg: DetectorConfig) -> tuple[np.ndarray, np.ndarray]:
    """Batch detection over a residual trace (T, 5) -> (degrees, flags)."""
    return DetectorKernel(cfg).run(residuals)


# ---------------------------------------------------------------------------
# Shipped parameter sets

def _flatten(inputs, outputs) -> np.ndarray:
    return np.array([v for row in inputs for v in row] +
                    [v for row in outputs for v in row])


#: Example membership parameters from a swarm-tuned run; used as the stock
#: "tuned detector" in tests and demos.
EXAMPLE_SWARM_TUNED = _flatten(
    [(0.146, 0.973, 1.57, 1.73),
     (0.516, 1.343, 1.944, 2.24),
     (0.225, 1.057, 1.657, 1.957),
     (0.49, 1.32, 1.92, 2.42),
     (0.225, 1.05, 1.468, 1.87)],
    [(-0.754, -0.304, 0.304, 0.6746),
     (-0.622, -0.172, 0.383, 0.674),
     (-0.621, -0.357, 0.251, 0.595),
     (-0.701, -0.304, 0.304, 0.675),
     (-0.674, -0.357, 0.251, 0.542),
     (-0.463, -0.146, 0.462, 0.753),
     (-0.621, -0.3305, 0.2275, 0.595)],
)

#: Example membership parameters from a genetic-algorithm run. Note some d
#: values sit below the usual search box; configs only require ordering.
EXAMPLE_GENETIC_TUNED = _flatten(
    [(0.106, 0.93, 1.07, 1.73),
     (0.436, 1.403, 1.84, 2.42),
     (0.325, 1.07, 1.67, 1.786),
     (0.409, 1.29, 1.928, 2.53),
     (0.325, 1.214, 1.68, 1.87)],
    [(-0.754, -0.42, 0.2019, 0.7146),
     (-0.628, -0.189, 0.283, 0.474),
     (-0.528, -0.343, 0.154, 0.498),
     (-0.721, -0.2021, 0.398, 0.668),
     (-0.654, -0.326, 0.281, 0.526),
     (-0.429, -0.257, 0.392, 0.543),
     (-0.671, -0.2105, 0.3275, 0.492)],
)


def example_tuned_config(kind: str = "swarm") -> DetectorConfig:
    """A ready-made tuned detector (no repair needed for either set)."""
    vec = {"swarm": EXAMPLE_SWARM_TUNED, "genetic": EXAMPLE_GENETIC_TUNED}[kind]
    cfg, repaired = params_to_config(vec)
    assert not repaired
    return cfg


def default_config() -> DetectorConfig:
    """Neutral hand-set partitions; a reasonable starting detector."""
    cfg, _ = params_to_config(_flatten([(0.2, 0.6, 2.0, 3.0)] * 5,
                                       [(-1.0, -0.3, 0.3, 1.0)] * 7))
    return cfg


def detuned_config() -> DetectorConfig:
    """A deliberately de-tuned but valid detector, used as a weak baseline.

    Input partitions sit far above the usual residual scale, so weak fault
    components go unseen and ramping faults cross late; the OK output sets
    are wide relative to AL, biasing degrees low.
    """
    cfg, _ = params_to_config(_flatten([(0.75, 1.5, 3.5, 4.8)] * 5,
                                       [(-4.8, -0.45, 0.45, 0.5)] * 7))
    return cfg
