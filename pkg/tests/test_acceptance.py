"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line to the terminal
(bypassing capture) before asserting, so ``pytest -v`` shows the tally.
"""

import math
import time

import numpy as np
import pytest

from epr_trajectory.analysis import epr_variance
from epr_trajectory.dynamics import (
    FreeParticleModel,
    OscillatorModel,
    decohere,
    free_propagator,
    oscillator_drift,
    oscillator_propagator,
)
from epr_trajectory.emit import emit
from epr_trajectory.gaussian import (
    SymplecticMatrix,
    apply_symplectic,
    displace,
    is_physical,
    physicality_margin,
    symplectic_residual,
    two_mode_squeezer,
    vacuum_state,
)
from epr_trajectory.measurement import (
    MeasurementChannel,
    condition_on_outcome,
    continuous_condition,
    continuous_qnd_model,
    qnd_interaction,
    qnd_pulse,
)
from epr_trajectory.scenarios import (
    MOMENTUM_SUM,
    RELATIVE_POSITION,
    PulseConfig,
    ScenarioConfig,
    run_entangled_trajectory,
    run_epr_decay,
    run_mass_sign_comparison,
    run_scenario,
    run_uncorrelated_trajectory,
)

from conftest import random_state, random_symplectic


@pytest.fixture
def report(capsys):
    def _report(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _report


def test_criterion_1_sql_boundary(report):
    start = time.perf_counter()
    delta = epr_variance(vacuum_state(2)).delta_epr
    r = run_uncorrelated_trajectory(ScenarioConfig("uncorrelated_trajectory", n_runs=10_000))
    elapsed = time.perf_counter() - start
    ratio = r.stats.std_ratio_to_sql
    ok = abs(delta - 2.0) <= 1e-12 and abs(ratio - 1.0) <= 0.03 and elapsed < 10
    assert report(1, ok, f"delta_epr={delta!r} std_ratio={ratio:.4f} runtime={elapsed:.1f}s")


def test_criterion_2_entangled_replication(report):
    start = time.perf_counter()
    r = run_entangled_trajectory(ScenarioConfig("entangled_trajectory", n_runs=10_000, target_delta_epr=1.4))
    elapsed = time.perf_counter() - start
    ratio = r.stats.std_ratio_to_sql
    ok = abs(ratio - math.sqrt(0.7)) <= 0.02 and abs(r.delta_epr[0] - 1.4) < 1e-6 and elapsed < 30
    assert report(
        2, ok, f"std_ratio={ratio:.4f} target={math.sqrt(0.7):.4f} delta_epr={r.delta_epr[0]:.6f} runtime={elapsed:.1f}s"
    )


def _rotation_oracle(cov, theta_a, theta_b):
    """Explicit 4x4 rotation, written out independently of the propagator."""
    ca, sa, cb, sb = math.cos(theta_a), math.sin(theta_a), math.cos(theta_b), math.sin(theta_b)
    rot = np.array([[ca, sa, 0, 0], [-sa, ca, 0, 0], [0, 0, cb, sb], [0, 0, -sb, cb]])
    return rot @ cov @ rot.T


def test_criterion_3_back_action_evasion(report):
    from epr_trajectory.scenarios import entangled_state

    start = time.perf_counter()
    omega, mv = 2 * math.pi, 0.5
    grid = tuple(np.linspace(0.0, 1.0, 41))  # contains the quarter period 0.25
    quarter = grid.index(0.25)
    u = np.array([1.0, 0.0, -1.0, 0.0]) / math.sqrt(2)
    worst_neg = worst_pos = worst_oracle = 0.0
    for kappa in (1.0, 3.0, 10.0):
        pulse = PulseConfig(kappa=kappa, meter_variance=mv)
        cfg = ScenarioConfig("mass_sign_comparison", entangle=pulse, omega=omega, time_grid=grid)
        r = run_mass_sign_comparison(cfg)
        neg = r.series["var_rel_neg"]
        worst_neg = max(worst_neg, float(neg.max() - neg.min()))
        pos_q = r.series["var_rel_pos"][quarter]
        worst_pos = max(worst_pos, abs(pos_q - (0.5 + kappa**2 * mv)))
        _, state = entangled_state(kappa, pulse)
        oracle = u @ _rotation_oracle(state.cov, omega * 0.25, omega * 0.25) @ u
        worst_oracle = max(worst_oracle, abs(pos_q - oracle))
    elapsed = time.perf_counter() - start
    ok = worst_neg <= 1e-8 and worst_pos <= 1e-8 and worst_oracle <= 1e-8 and elapsed < 5
    assert report(
        3,
        ok,
        f"neg spread={worst_neg:.2e} pos quarter err={worst_pos:.2e} "
        f"oracle err={worst_oracle:.2e} runtime={elapsed:.2f}s",
    )


def _schur_oracle(mean, cov, c, r, y):
    n = mean.size
    joint = np.block([[cov, cov @ c.T], [c @ cov, c @ cov @ c.T + r]])
    sxy, syy = joint[:n, n:], joint[n:, n:]
    return mean + sxy @ np.linalg.solve(syy, y - c @ mean), joint[:n, :n] - sxy @ np.linalg.solve(syy, sxy.T)


def test_criterion_4_conditioning_oracle(report):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(200):
        s = random_state(rng, 2)
        k = int(rng.integers(1, 3))
        c = rng.normal(size=(k, 4))
        a = rng.normal(size=(k, k))
        r = a @ a.T + 0.1 * np.eye(k)
        y = rng.normal(size=k)
        out = condition_on_outcome(s, c, r, y, require_physical=False)
        m, cov = _schur_oracle(s.mean, s.cov, c, r, y)
        worst = max(worst, np.abs(out.mean - m).max(), np.abs(out.cov - cov).max())
    ok = worst <= 1e-10
    assert report(4, ok, f"max deviation over 200 instances={worst:.2e}")


def test_criterion_5_symplectic_and_physicality(report):
    rng = np.random.default_rng(5)
    worst_res = 0.0
    worst_margin = math.inf
    unphysical = 0
    n_states = 0
    rows = [RELATIVE_POSITION, MOMENTUM_SUM]

    def check_map(s):
        nonlocal worst_res
        m = s.s if isinstance(s, SymplecticMatrix) else s
        worst_res = max(worst_res, symplectic_residual(m))
        return s

    def check_state(st):
        nonlocal worst_margin, unphysical, n_states
        n_states += 1
        worst_margin = min(worst_margin, physicality_margin(st.cov))
        if not is_physical(st.cov):
            unphysical += 1
        return st

    def random_models(decay):
        return [
            OscillatorModel(
                rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 10.0),
                rng.uniform(0.0, 2.0) if decay else 0.0,
                rng.uniform(0.5, 2.0),
            )
            for _ in range(2)
        ]

    def step(st):
        op = int(rng.integers(8))
        if op == 0:
            return apply_symplectic(st, check_map(SymplecticMatrix(random_symplectic(rng, 2))))
        if op == 1:
            model = FreeParticleModel(tuple(rng.choice([-1, 1], size=2)), rng.uniform(0.2, 5.0))
            return apply_symplectic(st, check_map(free_propagator(rng.uniform(-3, 3), model)))
        if op == 2:
            return apply_symplectic(st, check_map(oscillator_propagator(rng.uniform(-5, 5), random_models(False))))
        if op == 3:
            return apply_symplectic(st, check_map(two_mode_squeezer(rng.uniform(-1.5, 1.5))))
        if op == 4:
            return decohere(st, random_models(True), rng.uniform(0, 3))
        if op == 5:
            return displace(st, rng.normal(scale=5.0, size=4))
        pulse = PulseConfig(None, rng.uniform(0.5, 2.0), rng.uniform(0.2, 1.0))
        chosen = rows if rng.random() < 0.5 else [rows[int(rng.integers(2))]]
        if op == 6:
            kappa = rng.uniform(0, 5)
            channels = [MeasurementChannel(c, kappa, pulse.meter_variance, pulse.efficiency) for c in chosen]
            check_map(qnd_interaction(channels, 2))
            return qnd_pulse(st, channels, rng)[1]
        model = continuous_qnd_model(
            oscillator_drift(random_models(False)), chosen, rng.uniform(0.1, 5.0), pulse.meter_variance, pulse.efficiency
        )
        states, _ = continuous_condition(st, model, 0.01, 5, rng, "kalman")
        for s in states[1:-1]:
            check_state(s)
        return states[-1]

    start = time.perf_counter()
    for _ in range(10_000):
        st = check_state(random_state(rng, 2))
        for _ in range(4):
            st = check_state(step(st))
    elapsed = time.perf_counter() - start
    ok = worst_res < 1e-10 and unphysical == 0
    assert report(
        5,
        ok,
        f"10000 compositions, {n_states} states: max residual={worst_res:.2e} "
        f"min margin={worst_margin:.2e} unphysical={unphysical} runtime={elapsed:.1f}s",
    )


def test_criterion_6_continuous_pulse_consistency(report):
    # matched coupling: rate * T = kappa^2, no free evolution during the window
    kappa, t_end, mv, eff = 1.0, 1.0, 0.5, 0.8
    channels = PulseConfig(kappa, mv, eff).channels(kappa)
    _, pulsed = qnd_pulse(vacuum_state(2), channels, 0)
    model = continuous_qnd_model(np.zeros((4, 4)), [RELATIVE_POSITION, MOMENTUM_SUM], kappa**2 / t_end, mv, eff)

    steps = (10, 20, 40, 80)
    euler = []
    kalman = []
    for n in steps:
        states, _ = continuous_condition(vacuum_state(2), model, t_end / n, n, 0, "euler")
        euler.append(float(np.abs(states[-1].cov - pulsed.cov).max()))
        states, _ = continuous_condition(vacuum_state(2), model, t_end / n, n, 0, "kalman")
        kalman.append(float(np.abs(states[-1].cov - pulsed.cov).max()))
    ratios = [a / b for a, b in zip(euler, euler[1:])]
    first_order = all(1.7 < q < 2.3 for q in ratios)
    ok = first_order and max(kalman) < 1e-12
    assert report(
        6,
        ok,
        "euler errors=" + ", ".join(f"{e:.3e}" for e in euler)
        + " ratios=" + ", ".join(f"{q:.3f}" for q in ratios)
        + f" kalman max err={max(kalman):.1e}",
    )


def test_criterion_7_epr_decay_curve(report):
    worst = 0.0
    grid = tuple(np.linspace(0.0, 5.0, 50))
    t = np.array(grid)
    for gamma in (0.1, 0.5, 2.0):
        r = run_epr_decay(ScenarioConfig("epr_decay", gamma=gamma, time_grid=grid))
        expect = 1.4 * np.exp(-gamma * t) + 2 * (1 - np.exp(-gamma * t))
        worst = max(worst, float(np.abs(r.series["delta_epr"] - expect).max()))
    ok = worst <= 1e-10
    assert report(7, ok, f"max deviation on 50-point grid={worst:.2e}")


def test_criterion_8_determinism(report, tmp_path):
    configs = [
        ScenarioConfig("uncorrelated_trajectory", n_runs=2000, seed=17),
        ScenarioConfig("entangled_trajectory", n_runs=2000, seed=17, gamma=0.2),
        ScenarioConfig("epr_decay", seed=17, gamma=0.7),
        ScenarioConfig("mass_sign_comparison", seed=17, entangle=PulseConfig(kappa=3.0)),
    ]
    mismatches = []
    for cfg in configs:
        outputs = []
        for label, workers in (("a", 1), ("b", 1), ("c", 4)):
            paths = emit(run_scenario(cfg, workers=workers), tmp_path / label)
            outputs.append([p.read_bytes() for p in paths])
        if not outputs[0] == outputs[1] == outputs[2]:
            mismatches.append(cfg.scenario)
    ok = not mismatches
    assert report(8, ok, f"4 scenarios x (2 repeats, 1 vs 4 workers): mismatches={mismatches or 'none'}")
