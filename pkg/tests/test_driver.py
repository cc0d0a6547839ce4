import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqe.driver import (
    CycleConfig,
    compute_threshold,
    diagnostics,
    initialize_new_coefficients,
    prune_order,
    prune_reference,
    run_cvqe,
    select_determinants,
)
from cvqe.optimizers import RestartPolicy
from cvqe.statevector import ReferenceSet


def test_threshold_scales_and_clamps():
    cfg = CycleConfig(threshold_scale=2.0, n_shots=1000)
    assert cfg.floor == pytest.approx(1e-3)
    assert compute_threshold(0.01, cfg) == pytest.approx(0.02)
    assert compute_threshold(1e-6, cfg) == pytest.approx(1e-3)
    assert compute_threshold(10.0, cfg) == 0.5
    assert CycleConfig(n_shots=10**7).floor == pytest.approx(1e-4)
    with pytest.raises(ValueError):
        compute_threshold(-1.0, cfg)


def test_selection_orders_and_filters():
    ref = ReferenceSet([0b0011], [1.0])
    probs = {0b0011: 0.5, 0b0101: 0.2, 0b1010: 0.2, 0b1100: 0.05, 0b0111: 0.4}
    # present det excluded, wrong sector ignored, tie broken by bitmask
    assert select_determinants(probs, 0.1, ref) == [0b0101, 0b1010]
    assert select_determinants(probs, 0.9, ref) == []


def test_new_coefficient_scale(rng):
    cfg = CycleConfig(coeff_init_scale=0.1)
    c = initialize_new_coefficients([1, 2, 3], 0.5, cfg, rng)
    assert c.shape == (3,)
    assert np.all(np.abs(c) <= 0.05)
    tiny = initialize_new_coefficients([1], 0.0, cfg, rng)
    assert abs(tiny[0]) <= 0.1 * cfg.coeff_init_fallback


def test_omega_is_uniform_on_symmetric_interval():
    cfg = CycleConfig(coeff_init_scale=1.0)
    w = initialize_new_coefficients(range(10_000), 1.0, cfg, np.random.default_rng(3))
    sigma = np.sqrt(1 / 3 / len(w))
    assert abs(w.mean()) < 3 * sigma
    assert w.min() >= -1 and w.max() <= 1
    np.testing.assert_allclose(np.var(w), 1 / 3, rtol=0.05)


def test_prune_keeps_largest_with_stable_ties():
    c = np.array([0.1, -0.5, 0.3, 0.3, 0.05])
    assert prune_order(c, 3) == [1, 2, 3]
    assert prune_order(c, 10) == [0, 1, 2, 3, 4]
    c = np.array([0.2, 0.2, 0.2])
    assert prune_order(c, 2) == [0, 1]


def test_prune_reference_renormalizes():
    ref = ReferenceSet([0b0011, 0b0101, 0b1001], [0.8, 0.1, 0.59]).normalized()
    out = prune_reference(ref, 2)
    assert out.dets == [0b0011, 0b1001]
    assert out.norm() == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=30), st.integers(1, 40))
def test_prune_order_properties(c, n):
    c = np.array(c)
    keep = prune_order(c, n)
    assert len(keep) == min(n, len(c))
    assert keep == sorted(keep)
    dropped = np.setdiff1d(np.arange(len(c)), keep)
    if len(dropped) and len(keep):
        assert np.abs(c[keep]).min() >= np.abs(c[dropped]).max()


def test_diagnostics():
    hf = 0b000111
    ref = ReferenceSet([hf, 0b001011, 0b111000], [0.8, 0.4, np.sqrt(0.2)])
    p_hf, p_top = diagnostics(ref, hf)
    # 0b111000 is a triple excitation
    assert p_hf == pytest.approx(0.8)
    assert p_top == pytest.approx(1.0)


def test_h2_one_cycle_reaches_fci(h2):
    cfg = CycleConfig(iters_per_cycle=200, max_cycles=1, theta_step_size=0.5)
    traj = run_cvqe(h2.H, h2.excs, cfg, h2.hf)
    assert traj.best_energy - h2.meta["e_fci"] < 1e-6


def test_disabled_selection_equals_uccsd_only(h4):
    base = dict(iters_per_cycle=30, max_cycles=3, theta_step_size=0.3, seed=5)
    a = run_cvqe(h4.H, h4.excs, CycleConfig(selection_enabled=False, **base), h4.hf)
    b = run_cvqe(h4.H, h4.excs, CycleConfig(selection_enabled=False, n_shots=7, **base), h4.hf)
    assert a.energies == b.energies
    assert len(a.reference) == 1
    assert all(ev.added == [] for ev in a.events)


@pytest.fixture(scope="module")
def h4_run(h4):
    cfg = CycleConfig(
        iters_per_cycle=40, max_cycles=5, theta_step_size=0.3, n_dets=6, seed=11,
        restart=RestartPolicy(period=40),
    )
    return cfg, run_cvqe(h4.H, h4.excs, cfg, h4.hf)


def test_run_invariants(h4, h4_run):
    cfg, traj = h4_run
    n = cfg.iters_per_cycle * traj.cycles_completed
    assert len(traj.energies) == len(traj.best_energies) == len(traj.cycles) == n
    assert np.all(np.diff(traj.best_energies) <= 0)
    assert min(traj.energies) >= h4.meta["e_fci"] - 1e-10
    assert max(traj.n_dets) <= cfg.n_dets
    assert traj.reference.norm() == pytest.approx(1.0, abs=1e-12)
    assert any(ev.added for ev in traj.events)


def test_resets_fire_on_period(h4_run):
    cfg, traj = h4_run
    fired = [i + 1 for i, f in enumerate(traj.reset_flags) if f]
    assert fired == list(range(40, len(traj.energies) + 1, 40))


def test_run_is_deterministic(h4, h4_run):
    cfg, traj = h4_run
    again = run_cvqe(h4.H, h4.excs, cfg, h4.hf)
    assert again.energies == traj.energies
    assert again.reference.dets == traj.reference.dets


def test_exact_selection_mode(h4):
    cfg = CycleConfig(iters_per_cycle=40, max_cycles=3, theta_step_size=0.3, selection_mode="exact")
    traj = run_cvqe(h4.H, h4.excs, cfg, h4.hf)
    assert len(traj.reference) > 1
    assert traj.best_energy >= h4.meta["e_fci"] - 1e-10


def test_mismatched_excitations_rejected(h2, h4):
    with pytest.raises(ValueError):
        run_cvqe(h4.H, h2.excs, CycleConfig(max_cycles=1), h4.hf)


def test_unreachable_threshold_reduces_to_uccsd(h4):
    base = dict(iters_per_cycle=30, max_cycles=3, theta_step_size=0.3)
    blocked = CycleConfig(selection_mode="exact", threshold_ceiling=1.0, threshold_scale=1e12, **base)
    a = run_cvqe(h4.H, h4.excs, blocked, h4.hf)
    b = run_cvqe(h4.H, h4.excs, CycleConfig(selection_enabled=False, **base), h4.hf)
    assert a.energies == b.energies
    assert all(ev.added == [] for ev in a.events)
