import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from masdiv.dynamics import (
    NO_FORCE,
    ClosedForm,
    Forcing,
    InitialConditions,
    SinusoidalTerm,
    Trajectory,
    VibrationParams,
    classify_regime,
    detect_beats,
    force_components,
    load_scenario,
    natural_frequency,
    phase_lag,
    resonance_scan,
    rk4_integrate,
    scenario_from_dict,
    solve_forced,
    solve_free_damped,
    solve_free_undamped,
    steady_amplitude,
    step_response,
    time_grid,
)
from masdiv.errors import IntegrationError, RegimeError, ValidationError

REGIME_SETS = {
    "undamped-free": [(1, 0, 1), (2, 0, 5), (0.5, 0, 8)],
    "underdamped": [(1, 0.5, 4), (2, 1, 3), (1, 0.1, 1)],
    "critically-damped": [(1, 2, 1), (1, 4, 4), (2, 4, 2)],
    "overdamped": [(1, 3, 1), (1, 5, 4), (0.5, 6, 2)],
}


def scipy_solution(p: VibrationParams, forcing, init, t):
    sol = solve_ivp(
        lambda s, y: [y[1], (float(forcing(s)) - p.R * y[1] - p.E * y[0]) / p.M],
        (t[0], t[-1]),
        [init.D0, init.V0],
        t_eval=t,
        rtol=1e-11,
        atol=1e-12,
        method="DOP853",
    )
    return sol.y[0]


def test_natural_frequency():
    assert natural_frequency(VibrationParams(1, 0, 1)) == 1.0
    assert natural_frequency(VibrationParams(1, 0, 4)) == 2.0
    rep = classify_regime(VibrationParams(1, 0, 4))
    assert rep.natural_period == pytest.approx(math.pi)


def test_param_validation():
    for bad in [(0, 1, 1), (1, 1, 0), (1, -1, 1), (1, math.nan, 1), (-1, 0, 1)]:
        with pytest.raises(ValidationError):
            VibrationParams(*bad)
    with pytest.raises(ValidationError):
        InitialConditions(math.inf, 0)


@pytest.mark.parametrize(
    "R, regime",
    [(0, "undamped-free"), (2, "critically-damped"), (3, "overdamped"), (1, "underdamped")],
)
def test_classify_examples(R, regime):
    assert classify_regime(VibrationParams(1, R, 1)).regime == regime


def test_classify_forced_and_reports():
    f = Forcing.sinusoid(1, 2)
    assert classify_regime(VibrationParams(1, 0, 1), f).regime == "forced-undamped"
    assert classify_regime(VibrationParams(1, 1, 1), f).regime == "forced-damped"
    under = classify_regime(VibrationParams(1, 1, 1))
    assert under.quasifrequency == pytest.approx(math.sqrt(3) / 2)
    assert under.quasiperiod == pytest.approx(4 * math.pi / math.sqrt(3))
    over = classify_regime(VibrationParams(1, 3, 1))
    g, h = over.roots
    for r in (g, h):
        assert r * r + 3 * r + 1 == pytest.approx(0, abs=1e-12)


def test_regime_grid_matches_discriminant():
    for M in (0.5, 1, 2):
        for E in (0.5, 1, 3):
            for R in np.linspace(0, 6, 25):
                reg = classify_regime(VibrationParams(M, R, E)).damping
                disc = R * R - 4 * M * E
                if R == 0:
                    assert reg == "undamped"
                elif abs(disc) <= 1e-12 * max(R * R, 4 * M * E):
                    assert reg == "critically-damped"
                else:
                    assert reg == ("overdamped" if disc > 0 else "underdamped")


def test_critical_tolerance():
    R = 2 * (1 + 1e-14)
    assert classify_regime(VibrationParams(1, R, 1)).damping == "critically-damped"
    assert classify_regime(VibrationParams(1, 2.0001, 1)).damping == "overdamped"


def test_free_undamped():
    p = VibrationParams(1, 0, 1)
    sol = solve_free_undamped(p, InitialConditions(1, 0))
    assert sol.solution(math.pi)[0] == pytest.approx(-1, abs=1e-12)
    assert sol.A == 1 and sol.B == 0
    zero = solve_free_undamped(p, InitialConditions(0, 0))
    assert np.all(zero.trajectory.D == 0)
    p = VibrationParams(2, 0, 5)
    sol = solve_free_undamped(p, InitialConditions(0.3, -1.2))
    T = 2 * math.pi / p.omega0
    assert sol.solution(T)[0] == pytest.approx(0.3, abs=1e-9)
    assert sol.amplitude == pytest.approx(math.hypot(0.3, -1.2 / p.omega0))
    # two-argument arctangent keeps the quadrant
    assert sol.phase == pytest.approx(math.atan2(-1.2 / p.omega0, 0.3))
    t = np.linspace(0, 10, 101)
    assert np.allclose(sol.solution(t), sol.amplitude * np.cos(p.omega0 * t - sol.phase), atol=1e-12)
    with pytest.raises(RegimeError):
        solve_free_undamped(VibrationParams(1, 1, 1), InitialConditions(1, 0))


def test_free_damped_decay_and_regime_error():
    # |D(50 / (zeta w0))| < 1e-6 of the initial amplitude
    light = REGIME_SETS["underdamped"] + REGIME_SETS["critically-damped"] + [(1, 2.5, 1)]
    for M, R, E in light:
        p = VibrationParams(M, R, E)
        sol = solve_free_damped(p, InitialConditions(1.0, 0.5))
        zeta = R / (2 * math.sqrt(M * E))
        assert abs(sol.solution(50 / (zeta * p.omega0))[0]) < 1e-6 * math.hypot(1.0, 0.5)
    with pytest.raises(RegimeError):
        solve_free_damped(VibrationParams(1, 0, 1), InitialConditions(1, 0))


def test_heavy_overdamping_decays_on_the_slow_root():
    # the slow root is about w0 / (2 zeta), so 50 / (zeta w0) is too short
    # once zeta > 1.4; 50 slow time constants always suffice
    for M, R, E in REGIME_SETS["overdamped"]:
        p = VibrationParams(M, R, E)
        sol = solve_free_damped(p, InitialConditions(1.0, 0.5))
        slow = max(classify_regime(p).roots)
        assert abs(sol.solution(50 / abs(slow))[0]) < 1e-6 * math.hypot(1.0, 0.5)


def test_overdamped_overshoot():
    # released toward equilibrium fast enough to cross it once
    p = VibrationParams(1, 5, 4)
    sol = solve_free_damped(p, InitialConditions(1.0, -6.0), t_end=10)
    D = sol.trajectory.D
    assert D.min() < 0
    crossings = np.count_nonzero(np.diff(np.sign(D[np.abs(D) > 1e-12])))
    assert crossings == 1
    assert abs(D[-1]) < 1e-3


def test_damped_envelope_non_increasing():
    p = VibrationParams(1, 0.3, 4)
    sol = solve_free_damped(p, InitialConditions(1, 0), t_end=40, dt=1e-3)
    energy = 0.5 * p.M * sol.trajectory.V**2 + 0.5 * p.E * sol.trajectory.D**2
    assert np.all(np.diff(energy) <= 1e-12)


@pytest.mark.parametrize("regime", list(REGIME_SETS))
def test_closed_form_vs_oracles(regime):
    for M, R, E in REGIME_SETS[regime]:
        p = VibrationParams(M, R, E)
        init = InitialConditions(0.7, -0.4)
        forcing = Forcing((SinusoidalTerm(0.8, 1.3, 0.2),), constant=0.1)
        for f in (NO_FORCE, forcing):
            exact = ClosedForm(p, f, init).trajectory(time_grid(20, 1e-3))
            numeric = rk4_integrate(p, f, init, 1e-3, 20)
            assert exact.max_abs_deviation(numeric) < 1e-6
            t = np.linspace(0, 20, 401)
            assert np.max(np.abs(ClosedForm(p, f, init)(t) - scipy_solution(p, f, init, t))) < 1e-6


def test_residual_dense_grid():
    t = np.linspace(0, 20, 20001)
    for sets in REGIME_SETS.values():
        for M, R, E in sets:
            p = VibrationParams(M, R, E)
            f = Forcing((SinusoidalTerm(1.0, 0.7), SinusoidalTerm(0.3, 2.1, 1.0)), constant=-0.2)
            assert np.max(np.abs(ClosedForm(p, f, InitialConditions(1, 1)).residual(t))) < 1e-8


def test_undamped_resonance_residual():
    p = VibrationParams(1, 0, 4)
    cf = ClosedForm(p, Forcing.sinusoid(1.0, 2.0, 0.4), InitialConditions(0.1, 0))
    t = np.linspace(0, 50, 5001)
    assert np.max(np.abs(cf.residual(t))) < 1e-8


def test_undamped_energy_constant():
    for M, _, E in REGIME_SETS["undamped-free"]:
        p = VibrationParams(M, 0, E)
        traj = solve_free_undamped(p, InitialConditions(0.8, -1.1)).trajectory
        energy = 0.5 * p.M * traj.V**2 + 0.5 * p.E * traj.D**2
        assert np.max(np.abs(energy - energy[0])) < 1e-8


def test_superposition():
    p = VibrationParams(1, 0.4, 3)
    f1 = Forcing((SinusoidalTerm(1.0, 0.9),), steps=((5.0, 0.5),))
    f2 = Forcing((SinusoidalTerm(0.5, 2.5, 0.3),), constant=0.2, impulses=((3.0, 1.0),))
    i1, i2 = InitialConditions(0.5, 0.1), InitialConditions(-0.2, 0.3)
    t = np.linspace(0, 20, 2001)
    whole = ClosedForm(p, f1 + f2, InitialConditions(0.3, 0.4))(t)
    parts = ClosedForm(p, f1, i1)(t) + ClosedForm(p, f2, i2)(t)
    assert np.max(np.abs(whole - parts)) < 1e-8


def test_steady_state_formula_against_oracle():
    p = VibrationParams(2, 0.6, 5)
    w = 1.1
    amp = steady_amplitude(p, 1.5, w)
    assert amp == pytest.approx(1.5 / math.sqrt(4 * (2.5 - w * w) ** 2 + 0.36 * w * w))
    traj = rk4_integrate(p, Forcing.sinusoid(1.5, w), InitialConditions(), 1e-3, 120)
    late = traj.t > 80
    assert np.max(np.abs(traj.D[late])) == pytest.approx(amp, rel=1e-4)


def test_forced_split_and_transient_decay():
    p = VibrationParams(1, 4, 100)
    sol = solve_forced(p, SinusoidalTerm(1.0, 3.0), InitialConditions(0.01, 0))
    t = np.linspace(0, 20, 2001)
    assert np.allclose(sol.steady(t) + sol.transient(t), sol.solution(t), atol=1e-15)
    tau = 2 * p.M / p.R
    late = t >= 10 * tau
    assert np.max(np.abs(sol.solution(t[late]) - sol.steady(t[late]))) < 1e-6
    assert sol.amplitude == pytest.approx(steady_amplitude(p, 1.0, 3.0))
    assert not sol.resonant
    with pytest.raises(ValidationError):
        solve_forced(p, Forcing((SinusoidalTerm(1, 1), SinusoidalTerm(1, 2))))


def test_below_resonance_in_phase():
    p = VibrationParams(1, 0.2, 4)
    w = 0.2
    assert phase_lag(p, w) < math.radians(2)
    sol = solve_forced(p, SinusoidalTerm(1, w), t_end=200)
    t = np.linspace(150, 200, 5001)
    d, f = sol.steady(t), np.cos(w * t)
    assert np.corrcoef(d, f)[0, 1] > 0.999


def test_undamped_resonance_grows():
    p = VibrationParams(1, 0, 4)
    sol = solve_forced(p, SinusoidalTerm(1.0, 2.0), t_end=80, dt=1e-2)
    assert sol.resonant and sol.amplitude == math.inf
    maxes = [np.max(np.abs(sol.trajectory.D[sol.trajectory.t <= T])) for T in (20, 40, 80)]
    assert maxes[0] < maxes[1] < maxes[2]
    # secular term: amplitude F0 t / (2 M w0)
    assert maxes[2] == pytest.approx(80 / 4, rel=0.02)


def test_rk4_basics():
    p = VibrationParams(1, 0.5, 2)
    zero = rk4_integrate(p, NO_FORCE, InitialConditions(), 1e-2, 5)
    assert np.all(zero.D == 0)
    with pytest.raises(ValidationError):
        rk4_integrate(p, NO_FORCE, InitialConditions(), 0, 5)
    # plain callables are accepted
    f = Forcing.sinusoid(1, 1)
    a = rk4_integrate(p, lambda s: math.cos(s), InitialConditions(1, 0), 1e-2, 5)
    b = rk4_integrate(p, f, InitialConditions(1, 0), 1e-2, 5)
    assert np.allclose(a.D, b.D, atol=1e-13)


def test_rk4_blow_up_reports_time():
    p = VibrationParams(1, 0, 1)
    with pytest.raises(IntegrationError) as err:
        rk4_integrate(p, lambda s: 1e308 * math.exp(s), InitialConditions(), 0.5, 50)
    assert err.value.t > 0


def test_rk4_fourth_order_convergence():
    p = VibrationParams(1, 0.3, 2)
    init = InitialConditions(1, 0)
    exact = ClosedForm(p, NO_FORCE, init)
    errs = []
    for dt in (0.04, 0.02):
        traj = rk4_integrate(p, NO_FORCE, init, dt, 10)
        errs.append(np.max(np.abs(traj.D - exact(traj.t))))
    assert 12 < errs[0] / errs[1] < 20


def test_steps_and_impulses_match_rk4():
    p = VibrationParams(1, 0.5, 2)
    f = Forcing(
        (SinusoidalTerm(0.4, 1.7),), constant=0.3, steps=((2.5, -1.0), (7.25, 0.5)), impulses=((4.0, 2.0),)
    )
    init = InitialConditions(0.2, 0)
    exact = ClosedForm(p, f, init).trajectory(time_grid(20, 1e-3))
    assert exact.max_abs_deviation(rk4_integrate(p, f, init, 1e-3, 20)) < 1e-6
    # the impulse changes the velocity by J/M
    cf = ClosedForm(p, f, init)
    _, v_before, _ = cf.evaluate(4.0 - 1e-9)
    _, v_after, _ = cf.evaluate(4.0)
    assert v_after[0] - v_before[0] == pytest.approx(2.0, abs=1e-6)


def test_force_components():
    p = VibrationParams(1, 0.5, 2)
    c = force_components(p, 0.0, 0.0, 0.0)
    assert (c.inertial, c.resistive, c.resilient, c.total) == (0, 0, 0, 0)
    free = rk4_integrate(p, NO_FORCE, InitialConditions(1, 0), 1e-3, 20)
    comp = force_components(p, free.D, free.V, free.F)
    # recover D'' independently by differentiating D' along the trajectory
    acc = np.gradient(free.V, free.t, edge_order=2)
    assert np.max(np.abs(p.M * acc - comp.inertial)) < 1e-5
    assert np.max(np.abs(comp.inertial + comp.resistive + comp.resilient)) < 1e-9
    f = Forcing.sinusoid(1.2, 0.8)
    forced = rk4_integrate(p, f, InitialConditions(), 1e-3, 20)
    comp = force_components(p, forced.D, forced.V, forced.F)
    assert np.max(np.abs(comp.total - f(forced.t))) < 1e-9


def test_detect_beats():
    p = VibrationParams(1, 0, 1)
    for phase in (0.0, 1.0):
        sol = solve_forced(p, SinusoidalTerm(1.0, 0.9, phase), t_end=200, dt=1e-2)
        rep = detect_beats(sol.trajectory)
        assert rep.detected
        assert rep.beat_frequency == pytest.approx(0.05, rel=0.05)
    single = solve_free_undamped(p, InitialConditions(1, 0), t_end=60, dt=1e-2)
    assert not detect_beats(single.trajectory).detected
    short = solve_free_undamped(p, InitialConditions(1, 0), t_end=3, dt=1e-2)
    with pytest.raises(ValidationError):
        detect_beats(short.trajectory)


def test_resonance_scan():
    p = VibrationParams(1, 0.1, 4)
    w = np.linspace(0, 10, 2001)
    curve = resonance_scan(p, w, F0=2.0)
    assert curve.amplitudes[0] == pytest.approx(2.0 / 4)
    assert curve.amplitudes[-1] < 0.03
    assert abs(curve.peak_omega - p.omega0) < 0.01
    assert curve.resonant_omega == pytest.approx(math.sqrt(4 - 0.005))
    assert phase_lag(p, p.omega0) == pytest.approx(math.pi / 2)
    with pytest.raises(RegimeError):
        resonance_scan(VibrationParams(1, 0, 4), w)
    with pytest.raises(ValidationError):
        resonance_scan(p, [])


def test_step_response():
    p = VibrationParams(1, 0.5, 2)
    r = step_response(p, 1.0)
    assert r.equilibrium == 0.5
    assert r.final == pytest.approx(0.5, abs=1e-4)
    slow = step_response(VibrationParams(1, 0.3, 2), 1.0)
    fast = step_response(VibrationParams(1, 1.0, 2), 1.0)
    assert fast.settling_time < slow.settling_time


def test_partial_compensation_shape():
    # diversity held at 1 by a constant force, then the force drops and
    # the restoring side recovers part of the loss
    p = VibrationParams(1, 0.4, 1)
    r = step_response(p, 0.6, before=1.0, t_step=10, t_end=60, dt=1e-2)
    pre = 1.0
    assert r.minimum < r.final < pre
    assert r.final == pytest.approx(0.6, abs=1e-3)


def test_trajectory_validation_and_csv():
    with pytest.raises(ValidationError):
        Trajectory(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2), np.zeros(2))
    with pytest.raises(ValidationError):
        Trajectory(np.array([0.0, 1.0]), np.zeros(3), np.zeros(2), np.zeros(2))
    traj = solve_free_undamped(VibrationParams(1, 0, 1), InitialConditions(1, 0), t_end=1, dt=0.5).trajectory
    lines = traj.to_csv().strip().splitlines()
    assert lines[0] == "t,D,D_prime,F"
    assert lines[1] == "0,1,0,0"
    assert len(lines) == 4


def test_scenarios(tmp_path):
    sc = scenario_from_dict(
        {
            "params": {"M": 1, "R": 0.2, "E": 3},
            "init": {"D0": 1},
            "forcing": [{"amplitude": 1, "omega": 2}],
            "steps": [{"t": 1, "delta": 0.5}],
            "impulses": [{"t": 2, "J": 1}],
            "grid": {"dt": 0.01, "t_end": 5},
        }
    )
    assert sc.forcing.steps == ((1.0, 0.5),)
    assert sc.init.V0 == 0.0
    with pytest.raises(ValidationError, match="params"):
        scenario_from_dict({})
    with pytest.raises(ValidationError, match="M"):
        scenario_from_dict({"params": {"M": 0, "R": 0, "E": 1}})
    with pytest.raises(ValidationError, match=r"forcing\[0\]"):
        scenario_from_dict({"params": {"M": 1, "R": 0, "E": 1}, "forcing": [{"omega": 1}]})
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"params": {"M": 1, "R": 0, "E": 1}}) + "\n{")
    with pytest.raises(ValidationError, match="line 2"):
        load_scenario(path)


@given(
    st.floats(0.2, 5),
    st.floats(0, 5),
    st.floats(0.2, 5),
    st.floats(-2, 2),
    st.floats(-2, 2),
)
def test_random_params_residual(M, R, E, D0, V0):
    p = VibrationParams(M, R, E)
    cf = ClosedForm(p, Forcing.sinusoid(1.0, 1.3), InitialConditions(D0, V0))
    t = np.linspace(0, 10, 201)
    scale = 1 + np.max(np.abs(cf(t)))
    assert np.max(np.abs(cf.residual(t))) < 1e-8 * scale * max(1, p.E, p.R, p.M)
