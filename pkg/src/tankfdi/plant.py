"""Three-tank process simulation under nominal, noisy and faulty conditions.

The plant carries three pressure states (effort variables De1, De2, De3) and
exposes seven supervised signals per timestep: the two source flows, the
three pressures, and the two coupling flows. Faults are additive offsets on
the *measured* channels (sensor/actuator reading faults); parameter noise
perturbs the physical R and C values each step.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

#: The seven supervised variables, in canonical order.
VARIABLES = ("Msf1", "Msf2", "De1", "De2", "De3", "Df1", "Df2")

VARIABLE_INDEX = {name: i for i, name in enumerate(VARIABLES)}

FAULT_PROFILES = ("step", "ramp")

InputSchedule = Callable[[float], tuple[float, float]]


class SimulationDiverged(RuntimeError):
    """Raised when a state variable becomes non-finite during integration."""

    def __init__(self, variable: str, t: float):
        self.variable = variable
        self.t = t
        super().__init__(f"simulation diverged: {variable} is non-finite at t={t:.6g}s")


class SchemaError(ValueError):
    """Raised when a JSON artifact does not match its documented schema."""


@dataclass(frozen=True)
class PlantParams:
    """Physical constants of the process.

    Defaults are normalized units chosen to give O(1) signals and time
    constants of a few seconds; all values can be overridden via config.
    """

    C1: float = 1.0
    C2: float = 1.0
    C3: float = 1.0
    R1: float = 2.0
    R2: float = 2.0
    R3: float = 2.0
    R12: float = 1.0
    R23: float = 1.0
    az: float = 1.0       # outflow coefficient, dimensionless
    S_conn: float = 1.0   # connecting-valve cross section
    g: float = 9.81
    rho: float = 2.0      # chosen so the square-root coupling law matches the
                          # linear one at unit pressure difference

    def __post_init__(self):
        for name in ("C1", "C2", "C3", "R1", "R2", "R3", "R12", "R23"):
            if getattr(self, name) <= 0:
                raise ValueError(f"PlantParams.{name} must be strictly positive")
        if not 0 < self.az <= 1:
            raise ValueError("PlantParams.az must be in (0, 1]")
        if self.S_conn <= 0 or self.g <= 0 or self.rho <= 0:
            raise ValueError("PlantParams S_conn, g and rho must be positive")

    def to_dict(self) -> dict:
        return {"schema": 1, **{k: getattr(self, k) for k in self.__dataclass_fields__}}

    @classmethod
    def from_dict(cls, obj: dict) -> "PlantParams":
        fields = dict(obj)
        fields.pop("schema", None)
        unknown = set(fields) - set(cls.__dataclass_fields__)
        if unknown:
            raise SchemaError(f"unknown plant parameter field(s): {sorted(unknown)}")
        try:
            return cls(**fields)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"invalid plant parameters: {exc}") from exc


@dataclass(frozen=True)
class PlantState:
    """Tank pressures and simulation time."""

    De1: float = 0.0
    De2: float = 0.0
    De3: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class MeasurementFrame:
    """The seven supervised signals at one timestep."""

    t: float
    Msf1: float
    Msf2: float
    De1: float
    De2: float
    De3: float
    Df1: float
    Df2: float

    def as_vector(self) -> np.ndarray:
        """Signals in canonical VARIABLES order (time excluded)."""
        return np.array([getattr(self, name) for name in VARIABLES])


@dataclass(frozen=True)
class FaultEvent:
    """Additive fault on one supervised channel.

    ``step`` adds ``magnitude`` from ``start`` on; ``ramp`` interprets
    ``magnitude`` as a slope (units per second) and adds
    ``magnitude * (t - start)``.
    """

    target: str
    start: float
    magnitude: float
    profile: str = "step"

    def __post_init__(self):
        if self.target not in VARIABLES:
            raise ValueError(f"FaultEvent.target must be one of {VARIABLES}, got {self.target!r}")
        if self.profile not in FAULT_PROFILES:
            raise ValueError(f"FaultEvent.profile must be one of {FAULT_PROFILES}")

    def offset_at(self, t: float) -> float:
        if t < self.start:
            return 0.0
        if self.profile == "step":
            return self.magnitude
        return self.magnitude * (t - self.start)


@dataclass(frozen=True)
class FaultScenario:
    """One simulation run: horizon, noise levels and injected fault events."""

    seed: int = 0
    duration: float = 20.0
    dt: float = 0.1
    noise_std_R: float = 0.0
    noise_std_C: float = 0.0
    events: tuple[FaultEvent, ...] = ()

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("FaultScenario.dt must be positive")
        if self.duration < self.dt:
            raise ValueError("FaultScenario.duration must be at least one step")
        if self.noise_std_R < 0 or self.noise_std_C < 0:
            raise ValueError("noise standard deviations must be non-negative")
        if len(self.events) > 7:
            raise ValueError("at most 7 fault events per scenario")
        for ev in self.events:
            if not 0 <= ev.start <= self.duration:
                raise ValueError(f"event start {ev.start} outside [0, {self.duration}]")
        object.__setattr__(self, "events", tuple(self.events))

    @property
    def injected(self) -> frozenset[str]:
        return frozenset(ev.target for ev in self.events)


@dataclass(frozen=True)
class Trace:
    """Time-ordered supervised signals of one run; immutable once produced."""

    times: np.ndarray           # (T,)
    signals: np.ndarray         # (T, 7) in VARIABLES order
    dt: float

    def __post_init__(self):
        self.times.setflags(write=False)
        self.signals.setflags(write=False)

    def __len__(self) -> int:
        return len(self.times)

    def frame(self, i: int) -> MeasurementFrame:
        row = self.signals[i]
        return MeasurementFrame(float(self.times[i]), *(float(v) for v in row))

    def frames(self) -> Iterable[MeasurementFrame]:
        return (self.frame(i) for i in range(len(self)))

    def column(self, name: str) -> np.ndarray:
        return self.signals[:, VARIABLE_INDEX[name]]


def coupling_flows(De1: float, De2: float, De3: float, params: PlantParams,
                   mode: str = "linear") -> tuple[float, float]:
    """Coupling flows Df1 (tank1 -> tank2) and Df2 (tank3 -> tank2).

    Linear mode divides the pressure difference by the coupling resistance.
    Nonlinear mode uses the signed square-root valve law
    ``az * S * sgn(hi - hj) * sqrt(2 g |hi - hj|)`` with ``h = De / (rho g)``.
    """
    if mode == "linear":
        return (De1 - De2) / params.R12, (De3 - De2) / params.R23
    if mode == "nonlinear":
        k = params.az * params.S_conn

        def q(hi: float, hj: float) -> float:
            d = (hi - hj) / (params.rho * params.g)
            return k * math.copysign(math.sqrt(2.0 * params.g * abs(d)), d) if d else 0.0

        return q(De1, De2), q(De3, De2)
    raise ValueError(f"unknown plant mode {mode!r}")


def _derivatives(de: tuple[float, float, float], inputs: tuple[float, float],
                 params: PlantParams, mode: str) -> tuple[float, float, float]:
    de1, de2, de3 = de
    msf1, msf2 = inputs
    df1, df2 = coupling_flows(de1, de2, de3, params, mode)
    return (
        (msf1 - de1 / params.R1 - df1) / params.C1,
        (df1 - de2 / params.R2 - df2) / params.C2,
        (msf2 - df2 - de3 / params.R3) / params.C3,
    )


def step(state: PlantState, inputs: tuple[float, float], params: PlantParams,
         dt: float, mode: str = "linear", integrator: str = "rk4") -> PlantState:
    """Advance the plant one fixed step with the configured integrator."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    de = (state.De1, state.De2, state.De3)
    if integrator == "euler":
        k1 = _derivatives(de, inputs, params, mode)
        new = tuple(x + dt * k for x, k in zip(de, k1))
    elif integrator == "rk4":
        k1 = _derivatives(de, inputs, params, mode)
        k2 = _derivatives(tuple(x + 0.5 * dt * k for x, k in zip(de, k1)), inputs, params, mode)
        k3 = _derivatives(tuple(x + 0.5 * dt * k for x, k in zip(de, k2)), inputs, params, mode)
        k4 = _derivatives(tuple(x + dt * k for x, k in zip(de, k3)), inputs, params, mode)
        new = tuple(
            x + dt / 6.0 * (a + 2 * b + 2 * c + d)
            for x, a, b, c, d in zip(de, k1, k2, k3, k4)
        )
    else:
        raise ValueError(f"unknown integrator {integrator!r}")
    t_next = state.t + dt
    for name, value in zip(("De1", "De2", "De3"), new):
        if not math.isfinite(value):
            raise SimulationDiverged(name, t_next)
    return PlantState(new[0], new[1], new[2], t_next)


def measure(state: PlantState, inputs: tuple[float, float], params: PlantParams,
            events: Sequence[FaultEvent] = (), t: float | None = None,
            mode: str = "linear") -> MeasurementFrame:
    """Sensor frame at time t: true signals plus any active additive offsets."""
    if t is None:
        t = state.t
    df1, df2 = coupling_flows(state.De1, state.De2, state.De3, params, mode)
    values = [inputs[0], inputs[1], state.De1, state.De2, state.De3, df1, df2]
    for ev in events:
        values[VARIABLE_INDEX[ev.target]] += ev.offset_at(t)
    return MeasurementFrame(t, *values)


def perturb_params(params: PlantParams, noise_std_R: float, noise_std_C: float,
                   rng: np.random.Generator) -> PlantParams:
    """Multiply each R and C by (1 + N(0, sigma)), floored at 1% of nominal."""
    if noise_std_R < 0 or noise_std_C < 0:
        raise ValueError("noise standard deviations must be non-negative")
    updates = {}
    for name in ("R1", "R2", "R3", "R12", "R23"):
        nominal = getattr(params, name)
        updates[name] = max(nominal * (1.0 + noise_std_R * rng.standard_normal()),
                            0.01 * nominal)
    for name in ("C1", "C2", "C3"):
        nominal = getattr(params, name)
        updates[name] = max(nominal * (1.0 + noise_std_C * rng.standard_normal()),
                            0.01 * nominal)
    return replace(params, **updates)


def steady_state(inputs: tuple[float, float], params: PlantParams) -> PlantState:
    """Equilibrium pressures of the linear model for constant source flows."""
    msf1, msf2 = inputs
    p = params
    # Zeros of the three pressure derivatives; note the middle tank sheds
    # both coupling flows, so the R23 terms enter its balance negatively.
    a = np.array([
        [1.0 / p.R1 + 1.0 / p.R12, -1.0 / p.R12, 0.0],
        [1.0 / p.R12, -(1.0 / p.R2 + 1.0 / p.R12 - 1.0 / p.R23), -1.0 / p.R23],
        [0.0, -1.0 / p.R23, 1.0 / p.R23 + 1.0 / p.R3],
    ])
    b = np.array([msf1, 0.0, msf2])
    de = np.linalg.solve(a, b)
    return PlantState(float(de[0]), float(de[1]), float(de[2]), 0.0)


def constant_inputs(msf1: float, msf2: float) -> InputSchedule:
    def schedule(_t: float) -> tuple[float, float]:
        return (msf1, msf2)

    return schedule


def _as_schedule(inputs) -> InputSchedule:
    if callable(inputs):
        return inputs
    msf1, msf2 = inputs
    return constant_inputs(float(msf1), float(msf2))


def run(scenario: FaultScenario, params: PlantParams, inputs,
        x0: PlantState | None = None, mode: str = "linear",
        integrator: str = "rk4") -> Trace:
    """Simulate a scenario and return the measured trace.

    ``inputs`` is either a constant (Msf1, Msf2) pair or a callable t -> pair.
    The initial state defaults to the linear steady state for the inputs at
    t=0, so fault-free runs sit at the operating point from the first frame.
    Deterministic given the scenario seed.
    """
    schedule = _as_schedule(inputs)
    if x0 is None:
        x0 = steady_state(schedule(0.0), params)
    n_steps = math.ceil(scenario.duration / scenario.dt - 1e-9)
    rng = np.random.default_rng(scenario.seed)
    noisy = scenario.noise_std_R > 0 or scenario.noise_std_C > 0

    times = np.empty(n_steps + 1)
    signals = np.empty((n_steps + 1, 7))
    state = x0
    for k in range(n_steps + 1):
        t = k * scenario.dt
        u = schedule(t)
        step_params = (perturb_params(params, scenario.noise_std_R, scenario.noise_std_C, rng)
                       if noisy else params)
        frame = measure(state, u, step_params, scenario.events, t, mode)
        times[k] = t
        signals[k] = frame.as_vector()
        if k < n_steps:
            state = step(PlantState(state.De1, state.De2, state.De3, t), u,
                         step_params, scenario.dt, mode, integrator)
    return Trace(times, signals, scenario.dt)


# ---------------------------------------------------------------------------
# JSON / CSV interfaces

def scenario_to_dict(scenario: FaultScenario) -> dict:
    return {
        "schema": 1,
        "seed": scenario.seed,
        "duration": scenario.duration,
        "dt": scenario.dt,
        "noise_std_R": scenario.noise_std_R,
        "noise_std_C": scenario.noise_std_C,
        "events": [
            {"target": ev.target, "start": ev.start,
             "magnitude": ev.magnitude, "profile": ev.profile}
            for ev in scenario.events
        ],
    }


def scenario_from_dict(obj: dict) -> FaultScenario:
    if not isinstance(obj, dict):
        raise SchemaError("scenario must be a JSON object")
    if obj.get("schema", 1) != 1:
        raise SchemaError(f"unsupported scenario schema {obj.get('schema')!r}")
    events = []
    for i, ev in enumerate(obj.get("events", [])):
        if not isinstance(ev, dict):
            raise SchemaError(f"events[{i}] must be an object")
        for key in ("target", "start", "magnitude"):
            if key not in ev:
                raise SchemaError(f"events[{i}] is missing required field {key!r}")
        try:
            events.append(FaultEvent(ev["target"], float(ev["start"]),
                                     float(ev["magnitude"]), ev.get("profile", "step")))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"events[{i}]: {exc}") from exc
    known = {"schema", "seed", "duration", "dt", "noise_std_R", "noise_std_C",
             "events", "inputs", "id"}
    unknown = set(obj) - known
    if unknown:
        raise SchemaError(f"unknown scenario field(s): {sorted(unknown)}")
    try:
        return FaultScenario(
            seed=int(obj.get("seed", 0)),
            duration=float(obj.get("duration", 20.0)),
            dt=float(obj.get("dt", 0.1)),
            noise_std_R=float(obj.get("noise_std_R", 0.0)),
            noise_std_C=float(obj.get("noise_std_C", 0.0)),
            events=tuple(events),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid scenario: {exc}") from exc


def load_scenario(path: str) -> tuple[FaultScenario, tuple[float, float]]:
    """Read a scenario JSON file; returns (scenario, operating inputs)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"scenario file is not valid JSON: {exc}") from exc
    scenario = scenario_from_dict(obj)
    inputs = obj.get("inputs", {"Msf1": 1.0, "Msf2": 0.8})
    if not isinstance(inputs, dict) or "Msf1" not in inputs or "Msf2" not in inputs:
        raise SchemaError("scenario field 'inputs' must carry Msf1 and Msf2")
    return scenario, (float(inputs["Msf1"]), float(inputs["Msf2"]))


def write_trace_csv(trace: Trace, path: str) -> None:
    """Write `t,Msf1,Msf2,De1,De2,De3,Df1,Df2` rows at full float precision."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(VARIABLES) + "\n")
        for i in range(len(trace)):
            row = [repr(float(trace.times[i]))]
            row += [repr(float(v)) for v in trace.signals[i]]
            fh.write(",".join(row) + "\n")
