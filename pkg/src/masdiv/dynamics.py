"""Second-order diversity-vibration model ``M D'' + R D' + E D = F(t)``.

``D`` is the displacement of a diversity index from an operating point, so
negative values are allowed; it is not the raw (non-negative) entropy.
``M`` is inertia, ``R`` resistance (damping) and ``E`` resilience
(restoring coefficient).  ``omega`` always denotes a forcing frequency and
``omega0 = sqrt(E/M)`` the natural frequency.

Closed forms cover free undamped, the three damped regimes, sinusoidal
forcing (including undamped resonance), constant and step forcing, and
velocity impulses.  :func:`rk4_integrate` is an independent numerical
route used to check them.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import IntegrationError, RegimeError, ValidationError

CRITICAL_RTOL = 1e-12
RESONANCE_RTOL = 1e-12

UNDAMPED_FREE = "undamped-free"
OVERDAMPED = "overdamped"
CRITICAL = "critically-damped"
UNDERDAMPED = "underdamped"
FORCED_UNDAMPED = "forced-undamped"
FORCED_DAMPED = "forced-damped"


@dataclass(frozen=True)
class VibrationParams:
    M: float
    R: float
    E: float

    def __post_init__(self):
        for name in ("M", "R", "E"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
        if self.M <= 0:
            raise ValidationError(f"mass M must be positive, got {self.M}")
        if self.E <= 0:
            raise ValidationError(f"resilience E must be positive, got {self.E}")
        if self.R < 0:
            raise ValidationError(f"resistance R must be non-negative, got {self.R}")

    @property
    def omega0(self) -> float:
        return math.sqrt(self.E / self.M)

    @property
    def discriminant(self) -> float:
        return self.R * self.R - 4 * self.M * self.E

    def damping(self) -> str:
        if self.R == 0:
            return "undamped"
        disc = self.discriminant
        if abs(disc) <= CRITICAL_RTOL * max(self.R * self.R, 4 * self.M * self.E):
            return CRITICAL
        return OVERDAMPED if disc > 0 else UNDERDAMPED


@dataclass(frozen=True)
class InitialConditions:
    D0: float = 0.0
    V0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.D0) and math.isfinite(self.V0)):
            raise ValidationError("initial conditions must be finite")


@dataclass(frozen=True)
class SinusoidalTerm:
    """``amplitude * cos(omega * t + phase)``."""

    amplitude: float
    omega: float
    phase: float = 0.0
    label: str = "periodic"

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.amplitude, self.omega, self.phase)):
            raise ValidationError(f"forcing term {self.label!r} has non-finite values")
        if self.omega < 0:
            raise ValidationError(f"forcing term {self.label!r}: omega must be >= 0")

    def __call__(self, t):
        return self.amplitude * np.cos(self.omega * np.asarray(t, dtype=float) + self.phase)


@dataclass(frozen=True)
class Forcing:
    """Sum of sinusoids, a constant, step changes and velocity impulses.

    ``steps`` are ``(time, delta)`` pairs adding ``delta`` to the constant
    from ``time`` on.  ``impulses`` are ``(time, J)`` pairs that change
    ``D'`` by ``J / M`` instantly; they are not part of ``F(t)``.  Term
    labels are free-form, typically the name of the diversity driver.
    """

    terms: tuple[SinusoidalTerm, ...] = ()
    constant: float = 0.0
    steps: tuple[tuple[float, float], ...] = ()
    impulses: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "steps", tuple(sorted((float(a), float(b)) for a, b in self.steps)))
        object.__setattr__(
            self, "impulses", tuple(sorted((float(a), float(b)) for a, b in self.impulses))
        )
        vals = [self.constant] + [v for pair in self.steps + self.impulses for v in pair]
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("forcing has non-finite values")

    @classmethod
    def sinusoid(cls, amplitude, omega, phase=0.0, label="periodic") -> "Forcing":
        return cls((SinusoidalTerm(amplitude, omega, phase, label),))

    def constant_at(self, t: float) -> float:
        return self.constant + math.fsum(d for t0, d in self.steps if t0 <= t)

    def periodic(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term(t)
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.periodic(t) + self.constant
        for t0, d in self.steps:
            out = out + np.where(t >= t0, d, 0.0)
        return out

    def event_times(self) -> list[float]:
        return sorted({t for t, _ in self.steps} | {t for t, _ in self.impulses})

    def impulse_at(self, t: float) -> float:
        return math.fsum(j for t0, j in self.impulses if t0 == t)

    def __add__(self, other: "Forcing") -> "Forcing":
        return Forcing(
            self.terms + other.terms,
            self.constant + other.constant,
            self.steps + other.steps,
            self.impulses + other.impulses,
        )

    @property
    def is_free(self) -> bool:
        return (
            all(t.amplitude == 0 for t in self.terms)
            and self.constant == 0
            and all(d == 0 for _, d in self.steps)
            and all(j == 0 for _, j in self.impulses)
        )


NO_FORCE = Forcing()


@dataclass(frozen=True)
class RegimeReport:
    regime: str
    omega0: float
    damping: str
    quasifrequency: float | None = None
    quasiperiod: float | None = None
    roots: tuple[float, float] | None = None

    @property
    def natural_period(self) -> float:
        return 2 * math.pi / self.omega0


def natural_frequency(params: VibrationParams) -> float:
    return params.omega0


def classify_regime(params: VibrationParams, forcing: Forcing | None = None) -> RegimeReport:
    damping = params.damping()
    mu = quasi = roots = None
    if damping == "undamped":
        mu = params.omega0
    elif damping == UNDERDAMPED:
        mu = math.sqrt(-params.discriminant) / (2 * params.M)
        quasi = 2 * math.pi / mu
    else:
        roots = _real_roots(params)
    if forcing is not None and not forcing.is_free:
        regime = FORCED_UNDAMPED if params.R == 0 else FORCED_DAMPED
    elif damping == "undamped":
        regime = UNDAMPED_FREE
    else:
        regime = damping
    return RegimeReport(regime, params.omega0, damping, mu, quasi, roots)


def _real_roots(params: VibrationParams) -> tuple[float, float]:
    M, R, E = params.M, params.R, params.E
    if params.damping() == CRITICAL:
        r = -R / (2 * M)
        return (r, r)
    sq = math.sqrt(params.discriminant)
    h = (-R - sq) / (2 * M)
    g = E / (M * h)  # product of the roots is E/M; avoids cancellation
    return (g, h)


# ------------------------------------------------------------ closed forms


class _Homogeneous:
    """Free response fitted to ``(D0, V0)`` at local time 0."""

    def __init__(self, params: VibrationParams, D0: float, V0: float):
        self.kind = params.damping()
        M, R = params.M, params.R
        if self.kind == "undamped":
            w = params.omega0
            self.coef = (D0, V0 / w, w)
        elif self.kind == UNDERDAMPED:
            a = -R / (2 * M)
            mu = math.sqrt(-params.discriminant) / (2 * M)
            self.coef = (D0, (V0 - a * D0) / mu, a, mu)
        elif self.kind == CRITICAL:
            r = -R / (2 * M)
            self.coef = (D0, V0 - r * D0, r)
        else:
            g, h = _real_roots(params)
            self.coef = ((V0 - h * D0) / (g - h), (g * D0 - V0) / (g - h), g, h)

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "undamped":
            A, B, w = self.coef
            c, s = np.cos(w * tau), np.sin(w * tau)
            D = A * c + B * s
            return D, w * (B * c - A * s), -w * w * D
        if self.kind == UNDERDAMPED:
            A, B, a, mu = self.coef
            env = np.exp(a * tau)
            c, s = np.cos(mu * tau), np.sin(mu * tau)
            vc, vs = a * A + mu * B, a * B - mu * A
            ac, as_ = a * vc + mu * vs, a * vs - mu * vc
            return env * (A * c + B * s), env * (vc * c + vs * s), env * (ac * c + as_ * s)
        if self.kind == CRITICAL:
            A, B, r = self.coef
            env = np.exp(r * tau)
            return (
                (A + B * tau) * env,
                (r * A + B + r * B * tau) * env,
                (r * r * A + 2 * r * B + r * r * B * tau) * env,
            )
        R1, R2, g, h = self.coef
        eg, eh = np.exp(g * tau), np.exp(h * tau)
        return R1 * eg + R2 * eh, g * R1 * eg + h * R2 * eh, g * g * R1 * eg + h * h * R2 * eh


def is_resonant(params: VibrationParams, omega: float) -> bool:
    w0 = params.omega0
    return params.R == 0 and abs(omega - w0) <= RESONANCE_RTOL * w0


def steady_amplitude(params: VibrationParams, F0: float, omega: float) -> float:
    """``F0 / sqrt(M^2 (omega0^2 - omega^2)^2 + R^2 omega^2)``."""
    M, R = params.M, params.R
    w0 = params.omega0
    den = math.sqrt(M * M * (w0 * w0 - omega * omega) ** 2 + (R * omega) ** 2)
    return math.inf if den == 0 else abs(F0) / den


def phase_lag(params: VibrationParams, omega: float) -> float:
    """Lag of the steady displacement behind the force, in [0, pi]."""
    return math.atan2(params.R * omega, params.E - params.M * omega * omega)


class _Particular:
    """Particular solution for the periodic terms plus a constant."""

    def __init__(self, params: VibrationParams, terms: Sequence[SinusoidalTerm], constant: float):
        self.params = params
        self.constant = constant
        self.parts = []
        for term in terms:
            if term.amplitude == 0:
                continue
            if is_resonant(params, term.omega):
                k = term.amplitude / (2 * params.M * params.omega0)
                self.parts.append(("secular", k, params.omega0, term.phase))
            else:
                M, R, E = params.M, params.R, params.E
                w = term.omega
                den = math.hypot(E - M * w * w, R * w)
                K = term.amplitude / den
                self.parts.append(("steady", K, w, term.phase - phase_lag(params, w)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        D = np.full_like(t, self.constant / self.params.E)
        V = np.zeros_like(t)
        A = np.zeros_like(t)
        for kind, k, w, ph in self.parts:
            th = w * t + ph
            c, s = np.cos(th), np.sin(th)
            if kind == "steady":
                D = D + k * c
                V = V - k * w * s
                A = A - k * w * w * c
            else:
                D = D + k * t * s
                V = V + k * s + k * w * t * c
                A = A + 2 * k * w * c - k * w * w * t * s
        return D, V, A


class ClosedForm:
    """Exact solution, piecewise between step and impulse times."""

    def __init__(
        self,
        params: VibrationParams,
        forcing: Forcing = NO_FORCE,
        init: InitialConditions = InitialConditions(),
        t0: float = 0.0,
    ):
        self.params = params
        self.forcing = forcing
        self.init = init
        self.t0 = t0
        events = [t for t in forcing.event_times() if t > t0]
        self.starts = [t0] + events
        self.segments = []
        D, V = init.D0, init.V0 + forcing.impulse_at(t0) / params.M
        for k, start in enumerate(self.starts):
            if k > 0:
                V = V + forcing.impulse_at(start) / params.M
            part = _Particular(params, forcing.terms, forcing.constant_at(start))
            pD, pV, _ = part(np.array([start]))
            hom = _Homogeneous(params, D - pD[0], V - pV[0])
            self.segments.append((start, part, hom))
            if k + 1 < len(self.starts):
                end = self.starts[k + 1]
                D, V, _ = self._eval_segment(k, np.array([end]))
                D, V = float(D[0]), float(V[0])

    def _eval_segment(self, k, t, which="total"):
        start, part, hom = self.segments[k]
        pD, pV, pA = part(t)
        hD, hV, hA = hom(t - start)
        if which == "steady":
            return pD, pV, pA
        if which == "transient":
            return hD, hV, hA
        return pD + hD, pV + hV, pA + hA

    def _evaluate(self, t, which):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = [np.empty_like(t) for _ in range(3)]
        idx = np.searchsorted(self.starts, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        for k in np.unique(idx):
            mask = idx == k
            vals = self._eval_segment(int(k), t[mask], which)
            for o, v in zip(out, vals):
                o[mask] = v
        return tuple(out)

    def evaluate(self, t):
        """``(D, D', D'')`` at times ``t``."""
        return self._evaluate(t, "total")

    def steady(self, t):
        return self._evaluate(t, "steady")[0]

    def transient(self, t):
        return self._evaluate(t, "transient")[0]

    def __call__(self, t):
        return self._evaluate(t, "total")[0]

    def residual(self, t):
        D, V, A = self.evaluate(t)
        p = self.params
        return p.M * A + p.R * V + p.E * D - self.forcing(t)

    def trajectory(self, t, regime: str | None = None) -> "Trajectory":
        t = np.asarray(t, dtype=float)
        D, V, _ = self.evaluate(t)
        regime = regime or classify_regime(self.params, self.forcing).regime
        return Trajectory(t, D, V, self.forcing(t), regime, "closed-form")


# ------------------------------------------------------------ trajectories


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    D: np.ndarray
    V: np.ndarray
    F: np.ndarray
    regime: str = ""
    solver: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValidationError("trajectory needs a non-empty 1-D time grid")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValidationError("trajectory times must be strictly increasing")
        for name in ("t", "D", "V", "F"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != t.shape:
                raise ValidationError(f"trajectory column {name} has wrong length")
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.t.size

    def max_abs_deviation(self, other: "Trajectory") -> float:
        if not np.allclose(self.t, other.t, rtol=0, atol=1e-12):
            raise ValidationError("trajectories are sampled on different grids")
        return float(np.max(np.abs(self.D - other.D)))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t", "D", "D_prime", "F"])
        for row in zip(self.t, self.D, self.V, self.F):
            w.writerow([f"{x:.9g}" for x in row])
        return out.getvalue()


def time_grid(t_end: float, dt: float, t0: float = 0.0) -> np.ndarray:
    if not (dt > 0 and t_end > t0):
        raise ValidationError("need dt > 0 and t_end > t0")
    n = int(round((t_end - t0) / dt))
    return t0 + dt * np.arange(n + 1)


# --------------------------------------------------------------- solvers


@dataclass(frozen=True)
class UndampedSolution:
    A: float
    B: float
    amplitude: float
    phase: float
    period: float
    solution: ClosedForm
    trajectory: Trajectory


def solve_free_undamped(
    params: VibrationParams, init: InitialConditions, t_end: float = 20.0, dt: float = 1e-3
) -> UndampedSolution:
    """``D = A cos(w0 t) + B sin(w0 t) = r cos(w0 t - delta)``."""
    if params.R != 0:
        raise RegimeError("solve_free_undamped needs R = 0")
    w0 = params.omega0
    A, B = init.D0, init.V0 / w0
    sol = ClosedForm(params, NO_FORCE, init)
    traj = sol.trajectory(time_grid(t_end, dt), UNDAMPED_FREE)
    return UndampedSolution(A, B, math.hypot(A, B), math.atan2(B, A), 2 * math.pi / w0, sol, traj)


@dataclass(frozen=True)
class DampedSolution:
    report: RegimeReport
    coefficients: tuple[float, ...]
    solution: ClosedForm
    trajectory: Trajectory

    @property
    def regime(self) -> str:
        return self.report.regime


def solve_free_damped(
    params: VibrationParams, init: InitialConditions, t_end: float = 20.0, dt: float = 1e-3
) -> DampedSolution:
    if params.R == 0:
        raise RegimeError("solve_free_damped needs R > 0")
    report = classify_regime(params)
    sol = ClosedForm(params, NO_FORCE, init)
    coef = sol.segments[0][2].coef
    return DampedSolution(report, tuple(coef), sol, sol.trajectory(time_grid(t_end, dt)))


@dataclass(frozen=True)
class ForcedSolution:
    report: RegimeReport
    amplitude: float
    phase_lag: float
    resonant: bool
    solution: ClosedForm
    trajectory: Trajectory

    def steady(self, t):
        return self.solution.steady(t)

    def transient(self, t):
        return self.solution.transient(t)


def solve_forced(
    params: VibrationParams,
    forcing: SinusoidalTerm | Forcing,
    init: InitialConditions = InitialConditions(),
    t_end: float = 20.0,
    dt: float = 1e-3,
) -> ForcedSolution:
    """Transient plus steady-state split for a single sinusoidal force.

    With ``R = 0`` and ``omega = omega0`` the steady part is the secular
    ``F0 t sin(omega0 t + phase) / (2 M omega0)`` and grows without bound.
    """
    if isinstance(forcing, Forcing):
        if len(forcing.terms) != 1 or forcing.steps or forcing.impulses or forcing.constant:
            raise ValidationError("solve_forced takes exactly one sinusoidal term")
        term = forcing.terms[0]
    else:
        term = forcing
        forcing = Forcing((term,))
    resonant = is_resonant(params, term.omega)
    amp = math.inf if resonant else steady_amplitude(params, term.amplitude, term.omega)
    lag = math.pi / 2 if resonant else phase_lag(params, term.omega)
    sol = ClosedForm(params, forcing, init)
    report = classify_regime(params, forcing)
    return ForcedSolution(report, amp, lag, resonant, sol, sol.trajectory(time_grid(t_end, dt)))


def rk4_integrate(
    params: VibrationParams,
    forcing: Forcing | Callable[[float], float],
    init: InitialConditions,
    dt: float,
    t_end: float,
    t0: float = 0.0,
) -> Trajectory:
    """Classical fourth-order Runge-Kutta on ``(D, D')``.

    For a :class:`Forcing`, steps are split at step and impulse times so the
    force is smooth inside every step and impulses land exactly.
    """
    if not (dt > 0 and t_end > t0):
        raise ValidationError("need dt > 0 and t_end > t0")
    M, R, E = params.M, params.R, params.E
    t = time_grid(t_end, dt, t0)
    D = np.empty_like(t)
    V = np.empty_like(t)
    if isinstance(forcing, Forcing):
        events = [e for e in forcing.event_times() if t0 < e <= t[-1]]
        waves = [(w.amplitude, w.omega, w.phase) for w in forcing.terms if w.amplitude != 0]

        def smooth_for(tt):
            c = forcing.constant_at(tt)
            return lambda s: c + math.fsum(a * math.cos(w * s + ph) for a, w, ph in waves)

        impulse = forcing.impulse_at
        F_out = forcing(t)
    else:
        events = []
        smooth_for = lambda tt: forcing  # noqa: E731
        impulse = lambda tt: 0.0  # noqa: E731
        F_out = np.array([float(forcing(x)) for x in t])

    def step(f, s, y, v, h):
        k1y, k1v = v, (f(s) - R * v - E * y) / M
        y2, v2 = y + h / 2 * k1y, v + h / 2 * k1v
        k2y, k2v = v2, (f(s + h / 2) - R * v2 - E * y2) / M
        y3, v3 = y + h / 2 * k2y, v + h / 2 * k2v
        k3y, k3v = v3, (f(s + h / 2) - R * v3 - E * y3) / M
        y4, v4 = y + h * k3y, v + h * k3v
        k4y, k4v = v4, (f(s + h) - R * v4 - E * y4) / M
        return (
            y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y),
            v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v),
        )

    y, v = init.D0, init.V0 + impulse(t0) / M
    f = smooth_for(t0)
    D[0], V[0] = y, v
    ev = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, t.size):
            s, end = t[k - 1], t[k]
            while ev < len(events) and events[ev] <= end:
                e = events[ev]
                if e > s:
                    y, v = step(f, s, y, v, e - s)
                    s = e
                v = v + impulse(e) / M
                f = smooth_for(e)
                ev += 1
            if end > s:
                y, v = step(f, s, y, v, end - s)
            if not (math.isfinite(y) and math.isfinite(v)):
                raise IntegrationError(float(end))
            D[k], V[k] = y, v
    regime = classify_regime(params, forcing if isinstance(forcing, Forcing) else None).regime
    return Trajectory(t, D, V, F_out, regime, "rk4")


# ------------------------------------------------------ analysis helpers


@dataclass(frozen=True)
class ForceComponents:
    inertial: float | np.ndarray
    resistive: float | np.ndarray
    resilient: float | np.ndarray
    total: float | np.ndarray


def force_components(params: VibrationParams, D, V, F) -> ForceComponents:
    """Split the applied force into ``M D''``, ``R D'`` and ``E D``.

    ``D''`` is recovered from the equation of motion, so the three parts
    always add back up to ``F``.
    """
    D, V, F = (np.asarray(x, dtype=float) for x in (D, V, F))
    resistive = params.R * V
    resilient = params.E * D
    inertial = F - resistive - resilient
    total = inertial + resistive + resilient
    if D.ndim == 0:
        return ForceComponents(float(inertial), float(resistive), float(resilient), float(total))
    return ForceComponents(inertial, resistive, resilient, total)


@dataclass(frozen=True)
class BeatReport:
    detected: bool
    modulation_depth: float
    envelope_period: float | None = None
    beat_frequency: float | None = None


def _peaks(x: np.ndarray) -> np.ndarray:
    return np.nonzero((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:]))[0] + 1


def _refine(t, y, i):
    """Vertex of the parabola through three neighbouring samples."""
    tt, yy = t[i - 1 : i + 2], y[i - 1 : i + 2]
    a, b, c = np.polyfit(tt - tt[1], yy, 2)
    if a >= 0:
        return float(t[i]), float(y[i])
    u = -b / (2 * a)
    return float(tt[1] + u), float(c - b * b / (4 * a))


def detect_beats(trajectory: Trajectory, min_depth: float = 0.05) -> BeatReport:
    """Measure slow amplitude modulation of ``D``.

    The envelope is traced through the local maxima of ``|D|``.
    ``envelope_period`` is the spacing of envelope maxima and
    ``beat_frequency = pi / envelope_period`` is the angular frequency of the
    modulating sinusoid, which for two close frequencies is
    ``|omega0 - omega| / 2``.
    """
    t, y = trajectory.t, np.abs(trajectory.D)
    idx = _peaks(y)
    if idx.size < 3:
        raise ValidationError("trajectory too short to trace an envelope")
    pts = [_refine(t, y, i) for i in idx]
    et = np.array([p[0] for p in pts])
    ea = np.array([p[1] for p in pts])
    hi, lo = float(ea.max()), float(ea.min())
    depth = 0.0 if hi == 0 else (hi - lo) / (hi + lo)
    if depth < min_depth:
        return BeatReport(False, depth)
    mid = (hi + lo) / 2
    env_idx = [i for i in _peaks(ea) if ea[i] > mid]
    if len(env_idx) < 2:
        raise ValidationError("trajectory covers fewer than two envelope periods")
    tops = [_refine(et, ea, i)[0] for i in env_idx]
    period = (tops[-1] - tops[0]) / (len(tops) - 1)
    return BeatReport(True, depth, period, math.pi / period)


@dataclass(frozen=True)
class ResonanceCurve:
    omegas: np.ndarray
    amplitudes: np.ndarray
    phase_lags: np.ndarray
    peak_omega: float
    peak_amplitude: float
    resonant_omega: float | None


def resonance_scan(params: VibrationParams, omegas: Sequence[float], F0: float = 1.0) -> ResonanceCurve:
    """Steady amplitude and phase lag over a grid of forcing frequencies.

    ``resonant_omega`` is the exact amplitude peak
    ``sqrt(omega0^2 - R^2 / (2 M^2))`` when it exists (light damping).
    """
    if params.R == 0:
        raise RegimeError(
            "undamped system: the response at omega0 is unbounded; use solve_forced"
        )
    w = np.asarray(omegas, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0):
        raise ValidationError("omegas must be a non-empty list of non-negative values")
    amps = np.array([steady_amplitude(params, F0, x) for x in w])
    lags = np.array([phase_lag(params, x) for x in w])
    k = int(np.argmax(amps))
    sq = params.omega0**2 - params.R**2 / (2 * params.M**2)
    return ResonanceCurve(w, amps, lags, float(w[k]), float(amps[k]), math.sqrt(sq) if sq > 0 else None)


@dataclass(frozen=True)
class StepResponse:
    trajectory: Trajectory
    equilibrium: float
    settling_time: float
    minimum: float
    final: float


def step_response(
    params: VibrationParams,
    step: float,
    init: InitialConditions | None = None,
    *,
    before: float = 0.0,
    t_step: float = 0.0,
    t_end: float = 40.0,
    dt: float = 1e-2,
    band: float = 0.02,
) -> StepResponse:
    """Response to the force jumping from ``before`` to ``step`` at ``t_step``.

    By default the system starts at rest in the ``before`` equilibrium.  The
    settling time is when ``D`` enters, for good, the band of ``band`` times
    the equilibrium shift around ``step / E``.
    """
    if init is None:
        init = InitialConditions(before / params.E, 0.0)
    forcing = Forcing(constant=before, steps=((t_step, step - before),))
    sol = ClosedForm(params, forcing, init)
    traj = sol.trajectory(time_grid(t_end, dt))
    eq = step / params.E
    tol = band * max(abs(step - before) / params.E, abs(init.D0 - eq), 1e-300)
    outside = np.nonzero(np.abs(traj.D - eq) > tol)[0]
    if outside.size == 0:
        settle = 0.0
    elif outside[-1] + 1 < traj.t.size:
        settle = float(traj.t[outside[-1] + 1])
    else:
        settle = math.inf
    after = traj.t >= t_step
    return StepResponse(traj, eq, settle, float(traj.D[after].min()), float(traj.D[-1]))


# ------------------------------------------------------------ scenarios


@dataclass(frozen=True)
class Scenario:
    params: VibrationParams
    init: InitialConditions
    forcing: Forcing
    dt: float = 1e-3
    t_end: float = 20.0
    name: str = ""


def scenario_from_dict(doc: Mapping) -> Scenario:
    def need(obj, key, where):
        if not isinstance(obj, Mapping) or key not in obj:
            raise ValidationError(f"{where}: missing field {key!r}")
        return obj[key]

    def num(obj, key, where, default=None):
        if default is not None and key not in obj:
            return default
        val = need(obj, key, where)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ValidationError(f"{where}.{key}: expected a number")
        return float(val)

    p = need(doc, "params", "scenario")
    params = VibrationParams(num(p, "M", "params"), num(p, "R", "params"), num(p, "E", "params"))
    i = doc.get("init", {})
    init = InitialConditions(num(i, "D0", "init", 0.0), num(i, "V0", "init", 0.0))
    terms = []
    for k, term in enumerate(doc.get("forcing", [])):
        where = f"forcing[{k}]"
        terms.append(
            SinusoidalTerm(
                num(term, "amplitude", where),
                num(term, "omega", where),
                num(term, "phase", where, 0.0),
                str(term.get("label", "periodic")),
            )
        )
    steps = [(num(s, "t", "steps"), num(s, "delta", "steps")) for s in doc.get("steps", [])]
    imps = [(num(s, "t", "impulses"), num(s, "J", "impulses")) for s in doc.get("impulses", [])]
    forcing = Forcing(tuple(terms), num(doc, "constant", "scenario", 0.0), tuple(steps), tuple(imps))
    grid = doc.get("grid", {})
    dt = num(grid, "dt", "grid", 1e-3)
    t_end = num(grid, "t_end", "grid", 20.0)
    if not (dt > 0 and t_end > 0):
        raise ValidationError("grid: dt and t_end must be positive")
    return Scenario(params, init, forcing, dt, t_end, str(doc.get("name", "")))


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(doc)
