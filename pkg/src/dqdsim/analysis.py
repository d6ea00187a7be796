"""Decoherence-time extraction, equilibrium diagnostics and parameter sweeps.

The decoherence time is defined as the 1/e time of the |rho12| envelope,
T2 = 1/chi.  The empirical extractor recovers it from a sampled trajectory:
in the underdamped regime by a log-linear fit through the local maxima of
|rho12| (the maxima decay exactly geometrically, one per half period), in the
overdamped regime by the first crossing below e^-1/2.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import ChiRate, chi_rate, closed_form_trajectory
from .bath import BathModel, DeformationBath, OhmicBath, PiezoelectricBath
from .redfield import Trajectory, build_tensor, propagate_numeric, time_grid
from .system import QubitParams, diagonalize, initial_state

_DECAY_THRESHOLD = 0.5 * math.exp(-1.0)
# required drop of the maxima envelope before a fit is trusted
_MIN_DECAY_RATIO = 0.9

_ENGINES = ("closed_form", "numeric", "both")
_FAMILIES = {"pcpb": PiezoelectricBath, "dcpb": DeformationBath, "ohmic": OhmicBath}
_SWEPT_PARAMETERS = ("omega_l", "eta", "temperature")

# default interdot-tunneling binding T_c = 0.1 * omega_l
TC_BINDING = 0.1


class NoDecoherenceError(ValueError):
    """The coherence never decays (chi = 0); no decoherence time exists."""


class TrajectoryTooShortError(ValueError):
    """The trajectory does not span enough decay to extract a time constant."""


class SweepError(RuntimeError):
    """A sweep point failed; carries the partial results gathered so far."""

    def __init__(self, message: str, partial: "SweepResult", value: float, cause: Exception):
        super().__init__(message)
        self.partial = partial
        self.value = value
        self.cause = cause


def decoherence_time_analytic(rate: ChiRate) -> float:
    """1/e time of the coherence envelope: T2 = 1/chi."""
    if rate.chi == 0:
        raise NoDecoherenceError("chi = 0: coherence never decays")
    return 1.0 / rate.chi


def equilibrium_populations(n_occ: float) -> tuple[float, float]:
    """Long-time populations ((1+n)/(1+2n), n/(1+2n)); sums to 1 exactly."""
    if not n_occ >= 0:
        raise ValueError(f"n_occ must be >= 0, got {n_occ}")
    p_lower = (1.0 + n_occ) / (1.0 + 2.0 * n_occ)
    return p_lower, 1.0 - p_lower


def _refined_maxima(times: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strict 3-point local maxima, refined by quadratic interpolation."""
    interior = (amps[1:-1] > amps[:-2]) & (amps[1:-1] > amps[2:])
    idx = np.nonzero(interior)[0] + 1
    if len(idx) == 0:
        return np.empty(0), np.empty(0)
    left, mid, right = amps[idx - 1], amps[idx], amps[idx + 1]
    denom = left - 2.0 * mid + right
    safe = denom < 0
    shift = np.zeros_like(mid)
    peak = mid.copy()
    dt = times[idx + 1] - times[idx]
    shift[safe] = 0.5 * (left[safe] - right[safe]) / denom[safe]
    peak[safe] = mid[safe] - 0.125 * (left[safe] - right[safe]) ** 2 / denom[safe]
    return times[idx] + shift * dt, peak


def _stationary_samples(times: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Samples where |rho12| is momentarily flat.

    For the coherent initial state |rho12| decays monotonically with a
    stationary inflection every half period, and those flat spots sit exactly
    on the e^{-chi t}/2 envelope; they are found as strict local minima of
    the central-difference slope magnitude (which also catches genuine local
    maxima, where the slope crosses zero).
    """
    if len(amps) < 7:
        return np.empty(0), np.empty(0)
    slope = np.abs(amps[2:] - amps[:-2])  # centered at index i+1
    interior = (slope[1:-1] < slope[:-2]) & (slope[1:-1] < slope[2:])
    idx = np.nonzero(interior)[0] + 2
    return times[idx], amps[idx]


def decoherence_time_empirical(traj: Trajectory) -> float:
    """Extract T2 from the decay of |rho12| along a sampled trajectory.

    Tries, in order: a log-linear fit through refined local maxima of
    |rho12|; the same fit through its stationary (zero-slope) samples, which
    is what a monotonically modulated decay offers; the first crossing below
    e^-1/2 (overdamped).  Each fit needs >= 3 samples whose envelope has
    dropped by at least 10%.
    """
    times = traj.times
    amps = traj.abs_rho12

    for detect in (_refined_maxima, _stationary_samples):
        t_s, a_s = detect(times, amps)
        positive = a_s > 0
        t_s, a_s = t_s[positive], a_s[positive]
        if len(a_s) >= 3 and a_s[-1] < _MIN_DECAY_RATIO * a_s[0]:
            log_a = np.log(a_s)
            t_c = t_s - t_s.mean()
            slope = float(np.dot(t_c, log_a - log_a.mean()) / np.dot(t_c, t_c))
            if slope < 0:
                return -1.0 / slope

    below = amps < _DECAY_THRESHOLD
    if below[0]:
        raise ValueError("trajectory starts below the e^-1/2 threshold")
    if np.any(below):
        i = int(np.argmax(below))
        frac = (_DECAY_THRESHOLD - amps[i - 1]) / (amps[i] - amps[i - 1])
        return float(times[i - 1] + frac * (times[i] - times[i - 1]))

    t_s, a_s = _stationary_samples(times, amps)
    raise TrajectoryTooShortError(_too_short_message(times, t_s, a_s))


def _too_short_message(times: np.ndarray, t_peak: np.ndarray, a_peak: np.ndarray) -> str:
    span = float(times[-1] - times[0])
    if len(a_peak) >= 2 and a_peak[-1] < a_peak[0]:
        rate = math.log(a_peak[0] / a_peak[-1]) / float(t_peak[-1] - t_peak[0])
        suggestion = 5.0 / rate
        return (
            f"trajectory too short: envelope dropped only {a_peak[-1] / a_peak[0]:.3g}x "
            f"over {span:.6g} ps; extend t_end to at least {suggestion:.6g} ps"
        )
    return (
        f"trajectory too short: no decaying envelope detected over {span:.6g} ps; "
        f"extend t_end to at least {5.0 * span:.6g} ps or check that the coupling is nonzero"
    )


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep: which knob moves, and everything held fixed.

    When sweeping omega_l the tunneling binding T_c = 0.1*omega_l is
    re-applied at every point; otherwise T_c comes from tunneling_Tc or, for
    the phonon baths, from the binding applied to the bath's omega_l.
    Trajectories are produced only when a time grid (t_end, n_steps) is set.
    """

    bath_family: str
    swept_parameter: str
    values: tuple[float, ...]
    base_bath: BathModel
    temperature: Optional[float] = None  # K; None only when sweeping temperature
    tunneling_Tc: Optional[float] = None
    t_end: Optional[float] = None
    n_steps: Optional[int] = None
    store_every: int = 1
    engine: str = "closed_form"
    keep_trajectories: bool = False
    keep_every: int = 1

    def __post_init__(self) -> None:
        if self.bath_family not in _FAMILIES:
            raise ValueError(f"bath_family must be one of {sorted(_FAMILIES)}")
        if not isinstance(self.base_bath, _FAMILIES[self.bath_family]):
            raise ValueError(
                f"base_bath {type(self.base_bath).__name__} does not match "
                f"family '{self.bath_family}'"
            )
        if self.swept_parameter not in _SWEPT_PARAMETERS:
            raise ValueError(f"swept_parameter must be one of {_SWEPT_PARAMETERS}")
        if self.swept_parameter == "omega_l" and self.bath_family == "ohmic":
            raise ValueError("omega_l sweeps apply to the phonon baths only")
        if self.swept_parameter == "eta" and self.bath_family != "ohmic":
            raise ValueError("eta sweeps apply to the Ohmic bath only")
        if self.swept_parameter == "omega_l" and self.tunneling_Tc is not None:
            raise ValueError("omega_l sweeps re-bind tunneling_Tc; leave it unset")
        if len(self.values) == 0:
            raise ValueError("values must be non-empty")
        if any(not v > 0 for v in self.values):
            raise ValueError("swept values must be positive")
        if len(self.values) > 1 and any(
            b <= a for a, b in zip(self.values, self.values[1:])
        ):
            raise ValueError("values must be strictly increasing")
        if self.swept_parameter == "temperature":
            if self.temperature is not None:
                raise ValueError("fixed temperature conflicts with a temperature sweep")
        elif self.temperature is None or not self.temperature > 0:
            raise ValueError("a positive fixed temperature is required")
        if self.bath_family == "ohmic" and self.tunneling_Tc is None:
            raise ValueError("the Ohmic bath needs an explicit qubit (tunneling_Tc)")
        if self.engine not in _ENGINES:
            raise ValueError(f"engine must be one of {_ENGINES}")
        if (self.t_end is None) != (self.n_steps is None):
            raise ValueError("t_end and n_steps must be given together")


@dataclass(frozen=True)
class SweepPoint:
    """Result row for a single swept value."""

    index: int
    parameter: str
    value: float
    omega_21: float
    temperature: float
    chi: float
    n_occ: float
    t2_analytic: float
    t2_empirical: Optional[float] = None
    max_abs_diff: Optional[float] = None
    trajectory_closed: Optional[Trajectory] = None
    trajectory_numeric: Optional[Trajectory] = None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    points: tuple[SweepPoint, ...]


def _resolve_point(spec: SweepSpec, value: float) -> tuple[BathModel, float, float]:
    """Bath, temperature and tunneling for one swept value."""
    bath = spec.base_bath
    temperature = spec.temperature
    if spec.swept_parameter == "omega_l":
        bath = dataclasses.replace(bath, omega_l=value)
        tc = TC_BINDING * value
    else:
        if spec.swept_parameter == "eta":
            bath = dataclasses.replace(bath, eta=value)
        else:
            temperature = value
        if spec.tunneling_Tc is not None:
            tc = spec.tunneling_Tc
        else:
            tc = TC_BINDING * bath.omega_l
    return bath, float(temperature), tc


def _evaluate_point(spec: SweepSpec, index: int, value: float) -> SweepPoint:
    bath, temperature, tc = _resolve_point(spec, value)
    eig = diagonalize(QubitParams(tunneling_Tc=tc))
    rate = chi_rate(eig, bath, temperature)
    t2_analytic = decoherence_time_analytic(rate)

    closed = numeric = None
    t2_empirical = None
    max_abs_diff = None
    if spec.t_end is not None:
        times = time_grid(spec.t_end, spec.n_steps, spec.store_every)
        if spec.engine in ("closed_form", "both"):
            closed = closed_form_trajectory(rate, times)
        if spec.engine in ("numeric", "both"):
            tensor = build_tensor(eig, bath, temperature)
            numeric = propagate_numeric(
                tensor, eig, initial_state(), spec.t_end, spec.n_steps, spec.store_every
            )
        if spec.engine == "both":
            max_abs_diff = float(np.max(np.abs(closed.data - numeric.data)))
        t2_empirical = decoherence_time_empirical(numeric if numeric is not None else closed)

    keep = spec.keep_trajectories
    return SweepPoint(
        index=index,
        parameter=spec.swept_parameter,
        value=value,
        omega_21=eig.omega_21,
        temperature=temperature,
        chi=rate.chi,
        n_occ=rate.n_occ,
        t2_analytic=t2_analytic,
        t2_empirical=t2_empirical,
        max_abs_diff=max_abs_diff,
        trajectory_closed=_thin(closed, spec.keep_every) if keep else None,
        trajectory_numeric=_thin(numeric, spec.keep_every) if keep else None,
    )


def _thin(traj: Optional[Trajectory], every: int) -> Optional[Trajectory]:
    if traj is None or every == 1:
        return traj
    return Trajectory(times=traj.times[::every], data=traj.data[::every])


def run_sweep(spec: SweepSpec, max_workers: int = 1) -> SweepResult:
    """Evaluate every swept value; points run independently and in order.

    The first failing point aborts the sweep: the raised SweepError carries
    the offending value and the points completed before it.
    """
    if max_workers < 1:
        raise ValueError(f"max_workers must be >= 1, got {max_workers}")
    points: list[SweepPoint] = []
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [
            pool.submit(_evaluate_point, spec, i, v) for i, v in enumerate(spec.values)
        ]
        for i, future in enumerate(futures):
            try:
                points.append(future.result())
            except Exception as exc:
                partial = SweepResult(spec=spec, points=tuple(points))
                raise SweepError(
                    f"sweep failed at {spec.swept_parameter}={spec.values[i]}: {exc}",
                    partial=partial,
                    value=spec.values[i],
                    cause=exc,
                ) from exc
    return SweepResult(spec=spec, points=tuple(points))
