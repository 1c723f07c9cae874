"""Online evaluation of the five analytical-redundancy residuals.

Each residual is a consistency constraint among the seven supervised
signals, normalized to flow units so all five share an order of magnitude:

    r1 = Msf1 - C1*dDe1 - De1/R1 - Df1
    r2 = Df1  - C2*dDe2 - De2/R2 - Df2
    r3 = Msf2 - Df2 - C3*dDe3 - De3/R3
    r4 = (De3 - De2)/R23 - Df2
    r5 = (De1 - De2)/R12 - Df1

Pressure derivatives are estimated by first-order backward differences,
optionally smoothed by a single-pole low-pass to bound noise amplification.
All residuals vanish (to numerical precision) on fault-free, noise-free
linear-mode traces by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .plant import VARIABLES, MeasurementFrame, PlantParams, Trace

RESIDUAL_NAMES = ("r1", "r2", "r3", "r4", "r5")


class InsufficientHistory(ValueError):
    """Raised when a derivative is requested before two samples exist."""


@dataclass(frozen=True)
class ResidualVector:
    """The five residual values at one timestep."""

    t: float
    r1: float
    r2: float
    r3: float
    r4: float
    r5: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.r3, self.r4, self.r5])


def derivative_estimate(window: Sequence[float], dt: float,
                        tau: float | None = None) -> float:
    """Backward-difference derivative at the end of a uniformly sampled window.

    With ``tau`` set, the successive raw differences are run through a
    single-pole low-pass (y += dt/(tau+dt) * (d - y), seeded at the first
    difference) and the filtered value at the last sample is returned.
    """
    if len(window) < 2:
        raise InsufficientHistory("derivative needs at least two samples")
    if dt <= 0:
        raise ValueError("dt must be positive")
    diffs = [(window[i + 1] - window[i]) / dt for i in range(len(window) - 1)]
    if tau is None:
        return diffs[-1]
    alpha = dt / (tau + dt)
    y = diffs[0]
    for d in diffs[1:]:
        y += alpha * (d - y)
    return y


def evaluate_arrs(frame: MeasurementFrame, prev: MeasurementFrame,
                  params: PlantParams, dt: float) -> ResidualVector:
    """Residuals at ``frame`` given the previous frame (plain backward diff)."""
    if prev is None:
        raise InsufficientHistory("residual evaluation needs the previous frame")
    d_de1 = (frame.De1 - prev.De1) / dt
    d_de2 = (frame.De2 - prev.De2) / dt
    d_de3 = (frame.De3 - prev.De3) / dt
    return _residuals_from_values(frame, d_de1, d_de2, d_de3, params)


def _residuals_from_values(frame: MeasurementFrame, d_de1: float, d_de2: float,
                           d_de3: float, params: PlantParams) -> ResidualVector:
    p = params
    r1 = frame.Msf1 - p.C1 * d_de1 - frame.De1 / p.R1 - frame.Df1
    r2 = frame.Df1 - p.C2 * d_de2 - frame.De2 / p.R2 - frame.Df2
    r3 = frame.Msf2 - frame.Df2 - p.C3 * d_de3 - frame.De3 / p.R3
    r4 = (frame.De3 - frame.De2) / p.R23 - frame.Df2
    r5 = (frame.De1 - frame.De2) / p.R12 - frame.Df1
    return ResidualVector(frame.t, r1, r2, r3, r4, r5)


class ResidualEvaluator:
    """Streaming residual evaluation with optional derivative conditioning.

    Feed frames in time order; the first frame primes the derivative history
    and raises InsufficientHistory if a residual is requested for it.

    ``spike_window`` > 1 runs a rolling median of that many raw differences
    before smoothing. An additive step fault on a pressure channel shows up
    as a one-sample impulse in the measured derivative; the median rejects
    it so the detector only sees the settled offset.
    """

    def __init__(self, params: PlantParams, dt: float, tau: float | None = None,
                 spike_window: int = 1):
        if dt <= 0:
            raise ValueError("dt must be positive")
        if spike_window < 1:
            raise ValueError("spike_window must be at least 1")
        self.params = params
        self.dt = dt
        self.tau = tau
        self.spike_window = spike_window
        self._alpha = dt / (tau + dt) if tau else 1.0
        self._prev: MeasurementFrame | None = None
        self._filtered: np.ndarray | None = None
        self._recent: list[np.ndarray] = []

    def update(self, frame: MeasurementFrame) -> ResidualVector:
        prev = self._prev
        self._prev = frame
        if prev is None:
            raise InsufficientHistory("first frame of a trace has no derivative")
        raw = np.array([
            (frame.De1 - prev.De1) / self.dt,
            (frame.De2 - prev.De2) / self.dt,
            (frame.De3 - prev.De3) / self.dt,
        ])
        if self.spike_window > 1:
            self._recent.append(raw)
            if len(self._recent) > self.spike_window:
                self._recent.pop(0)
            raw = np.median(self._recent, axis=0)
        if self._filtered is None:
            self._filtered = raw
        else:
            self._filtered = self._filtered + self._alpha * (raw - self._filtered)
        d = self._filtered
        return _residuals_from_values(frame, d[0], d[1], d[2], self.params)


def residual_trace(trace: Trace, params: PlantParams, tau: float | None = None,
                   spike_window: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Residuals over a whole trace; rows start at the second frame.

    Returns (times (T-1,), residuals (T-1, 5)). Matches a streaming
    ResidualEvaluator with the same settings sample for sample.
    """
    de = trace.signals[:, [VARIABLES.index("De1"), VARIABLES.index("De2"),
                           VARIABLES.index("De3")]]
    raw = np.diff(de, axis=0) / trace.dt
    if spike_window > 1:
        medianed = np.empty_like(raw)
        for k in range(len(raw)):
            lo = max(0, k - spike_window + 1)
            medianed[k] = np.median(raw[lo:k + 1], axis=0)
        raw = medianed
    if tau:
        alpha = trace.dt / (tau + trace.dt)
        d = np.empty_like(raw)
        d[0] = raw[0]
        for k in range(1, len(raw)):
            d[k] = d[k - 1] + alpha * (raw[k] - d[k - 1])
    else:
        d = raw

    s = trace.signals[1:]
    msf1, msf2 = s[:, 0], s[:, 1]
    de1, de2, de3 = s[:, 2], s[:, 3], s[:, 4]
    df1, df2 = s[:, 5], s[:, 6]
    p = params
    out = np.empty((len(s), 5))
    out[:, 0] = msf1 - p.C1 * d[:, 0] - de1 / p.R1 - df1
    out[:, 1] = df1 - p.C2 * d[:, 1] - de2 / p.R2 - df2
    out[:, 2] = msf2 - df2 - p.C3 * d[:, 2] - de3 / p.R3
    out[:, 3] = (de3 - de2) / p.R23 - df2
    out[:, 4] = (de1 - de2) / p.R12 - df1
    return trace.times[1:], out


# ---------------------------------------------------------------------------
# Fault-signature structure

#: Which residuals each supervised variable enters, rows in VARIABLES order.
_SIGNATURE_ROWS = {
    "Msf1": (1,),
    "Msf2": (3,),
    "De1": (1, 5),
    "De2": (2, 4, 5),
    "De3": (3, 4),
    "Df1": (1, 2, 5),
    "Df2": (2, 3, 4),
}


@dataclass(frozen=True)
class SignatureMatrix:
    """7x5 boolean incidence of supervised variables vs residuals."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def row(self, variable: str) -> frozenset[int]:
        """Residual indices (1-based) affected by a fault on ``variable``."""
        i = VARIABLES.index(variable)
        return frozenset(int(j) + 1 for j in np.flatnonzero(self.matrix[i]))


def signature_matrix() -> SignatureMatrix:
    m = np.zeros((7, 5), dtype=bool)
    for i, name in enumerate(VARIABLES):
        for j in _SIGNATURE_ROWS[name]:
            m[i, j - 1] = True
    return SignatureMatrix(m)


def fault_direction(variable: str, params: PlantParams) -> np.ndarray:
    """Post-settling residual change per unit additive fault on ``variable``.

    The residuals are linear in the measured signals, so a settled step fault
    of magnitude m shifts the residual vector by m times this direction.
    Its support is exactly the variable's signature row.
    """
    p = params
    directions = {
        "Msf1": (1.0, 0.0, 0.0, 0.0, 0.0),
        "Msf2": (0.0, 0.0, 1.0, 0.0, 0.0),
        "De1": (-1.0 / p.R1, 0.0, 0.0, 0.0, 1.0 / p.R12),
        "De2": (0.0, -1.0 / p.R2, 0.0, -1.0 / p.R23, -1.0 / p.R12),
        "De3": (0.0, 0.0, -1.0 / p.R3, 1.0 / p.R23, 0.0),
        "Df1": (-1.0, 1.0, 0.0, 0.0, -1.0),
        "Df2": (0.0, -1.0, -1.0, -1.0, 0.0),
    }
    return np.array(directions[variable])


def write_residual_csv(times: np.ndarray, residuals: np.ndarray, path: str,
                       include_initial_zero_row: bool = False,
                       t0: float = 0.0) -> None:
    """Write `t,r1,r2,r3,r4,r5` rows at full float precision.

    The optional leading zero row stands in for the first trace frame, which
    precedes any derivative history.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(RESIDUAL_NAMES) + "\n")
        if include_initial_zero_row:
            fh.write(",".join([repr(float(t0))] + ["0.0"] * 5) + "\n")
        for t, row in zip(times, residuals):
            fh.write(",".join([repr(float(t))] + [repr(float(v)) for v in row]) + "\n")
