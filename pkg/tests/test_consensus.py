import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from etconsensus.consensus import (
    ConsensusConfig, NodeState, apply_event, check_trigger, on_event_update_Z, step_consensus,
)
from etconsensus.errors import ConfigError, NumericalDivergence
from etconsensus.graph import Graph, is_connected, random_graph, ring_graph
from etconsensus.harness import run_scenario

from reference import reference_run

CFG = ConsensusConfig(kappa1=0.5, kappa2=20.0, delta=(2.0,), tau_min=0.01)


def _node_with_drift(norm, last_event_time=0.0):
    d = np.array([3.0, 4.0]) / 5.0 * norm
    return NodeState(p=np.zeros(2), z_hat=d, Z_hat=np.eye(2), last_broadcast_z=np.zeros(2),
                     last_event_time=last_event_time)


def test_trigger_below_threshold():
    assert not check_trigger(_node_with_drift(0.99 * 2.0), 0.5, CFG, 1)


def test_trigger_at_threshold_is_inclusive():
    assert check_trigger(_node_with_drift(2.0), 0.5, CFG, 1)


def test_trigger_time_regularisation_dominates():
    assert not check_trigger(_node_with_drift(20.0, last_event_time=0.5), 0.5 + CFG.tau_min / 2, CFG, 1)


def test_trigger_grid_form_allows_gap_of_tau():
    cfg = ConsensusConfig(0.5, 20.0, delta=(2.0,), tau_min=0.25)
    node = _node_with_drift(5.0, last_event_time=0.5)
    assert check_trigger(node, 0.75, cfg, 1, h=0.25)
    assert not check_trigger(node, 0.75, cfg, 1)        # strict continuous form
    assert not check_trigger(node, 0.5, cfg, 1, h=0.25)


def test_per_node_thresholds():
    cfg = ConsensusConfig(0.5, 20.0, delta=(1.0, 10.0), tau_min=0.01)
    node = _node_with_drift(5.0)
    assert check_trigger(node, 1.0, cfg, 1)
    assert not check_trigger(node, 1.0, cfg, 2)


def test_config_validation():
    with pytest.raises(ConfigError):
        ConsensusConfig(0.0, 1.0, (1.0,), 0.1)
    with pytest.raises(ConfigError):
        ConsensusConfig(1.0, 1.0, (-1.0,), 0.1)
    with pytest.raises(ConfigError):
        ConsensusConfig(1.0, 1.0, (1.0,), 0.0)


def test_isolated_node_tracks_local_signal_exactly():
    rng = np.random.default_rng(0)
    zs = rng.standard_normal((200, 3)) * 50
    node = NodeState.initial(zs[0], np.eye(3))
    for k in range(1, 200):
        node = step_consensus(node, zs[k - 1], zs[k], [], CFG, 1e-3)
        assert np.array_equal(node.p, np.zeros(3))
        assert np.array_equal(node.z_hat, zs[k])


def test_agreement_gives_no_correction():
    node = NodeState.initial(np.array([1.0, 2.0]), np.eye(2))
    out = step_consensus(node, node.z_hat, node.z_hat, [node.z_hat.copy()] * 3, CFG, 1e-3)
    assert np.array_equal(out.p, np.zeros(2))


def test_identity_zhat_equals_z_minus_p():
    rng = np.random.default_rng(1)
    node = NodeState.initial(rng.standard_normal(4), np.eye(4))
    for _ in range(50):
        z_next = rng.standard_normal(4)
        node = step_consensus(node, None, z_next, [rng.standard_normal(4)], CFG, 1e-3)
        assert np.array_equal(node.z_hat, z_next - node.p)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_consensus_aborts():
    node = NodeState.initial(np.array([1e308]), np.eye(1))
    with pytest.raises(NumericalDivergence):
        step_consensus(node, node.z_hat, np.array([1e308]), [np.array([-1e308])], CFG, 1e3)


def test_two_node_constant_signals_against_exact_ode():
    k1, k2, h, T = 0.5, 20.0, 1e-4, 2.0
    cfg = ConsensusConfig(k1, k2, (1e-12,), tau_min=h)
    z = np.array([0.0, 1.0])
    nodes = [NodeState.initial(z[i:i + 1], np.eye(1)) for i in range(2)]
    latched = [nd.z_hat.copy() for nd in nodes]
    steps = int(round(T / h))
    for _ in range(steps):
        nodes = [step_consensus(nodes[i], z[i:i + 1], z[i:i + 1], [latched[1 - i]], cfg, h)
                 for i in range(2)]
        latched = [nd.z_hat.copy() for nd in nodes]
    # continuous communication oracle: p' = M p + b, z_hat = z - p, via the matrix exponential
    L = np.array([[1.0, -1.0], [-1.0, 1.0]])
    M = -k1 * np.eye(2) - k2 * L
    b = k2 * L @ z
    aug = np.zeros((3, 3))
    aug[:2, :2] = M
    aug[:2, 2] = b
    p_T = (scipy.linalg.expm(aug * T) @ np.array([0.0, 0.0, 1.0]))[:2]
    zhat_oracle = z - p_T
    zhat = np.array([nd.z_hat[0] for nd in nodes])
    assert np.allclose(zhat, zhat_oracle, atol=2e-3)
    assert np.all(np.abs(zhat - 0.5) < 0.05)


def test_z_update_examples():
    M = on_event_update_Z(1, np.array([[2.0]]), [np.array([[1.0]]), np.array([[3.0]])])
    assert M[0, 0] == 2.0
    Zs = [np.array([[1.0]]), np.array([[2.0]]), np.array([[3.0]])]
    before = sum(Zs)
    apply_event(Zs, 1, [0, 2])
    assert np.array_equal(sum(Zs), before)
    same = np.array([[1.0, 2.0], [2.0, 5.0]])
    assert np.array_equal(on_event_update_Z(0, same, [same, same]), same)
    lone = np.eye(2) * 7
    assert np.array_equal(on_event_update_Z(0, lone, []), lone)


def _random_psd(rng, n):
    X = rng.standard_normal((n, n))
    return X @ X.T


def test_round_robin_ring_reaches_initial_mean():
    rng = np.random.default_rng(42)
    g = ring_graph(5)
    A = g.adjacency
    Zs = [_random_psd(rng, 3) for _ in range(5)]
    target = sum(Zs) / 5
    for e in range(200):
        i = e % 5
        apply_event(Zs, i, list(np.flatnonzero(A[i])))
    for Z in Zs:
        assert np.allclose(Z, target, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10**6), st.integers(10, 80))
def test_event_updates_preserve_sum_hull_and_psd(N, seed, n_events):
    g = random_graph(N, 0.6, seed=seed)
    if not is_connected(g):
        g = Graph(N, g.edges | ring_graph(N).edges)
    rng = np.random.default_rng(seed)
    A = g.adjacency
    Zs = [_random_psd(rng, 2) for _ in range(N)]
    total = sum(Zs)
    lo = np.min(Zs, axis=0)
    hi = np.max(Zs, axis=0)
    for _ in range(n_events):
        i = int(rng.integers(N))
        apply_event(Zs, i, list(np.flatnonzero(A[i])))
        assert np.allclose(sum(Zs), total, rtol=1e-10, atol=1e-10 * np.abs(total).max())
        new_lo, new_hi = np.min(Zs, axis=0), np.max(Zs, axis=0)
        assert np.all(new_lo >= lo - 1e-12) and np.all(new_hi <= hi + 1e-12)
        lo, hi = new_lo, new_hi
        for Z in Zs:
            assert np.array_equal(Z, Z.T)
            assert np.linalg.eigvalsh(Z)[0] > -1e-9


@pytest.mark.parametrize("mode,delta", [("event-triggered", 25), ("event-triggered", 10),
                                        ("every-step", 25)])
def test_engine_matches_per_node_reference(make_cfg, mode, delta):
    cfg = make_cfg("sim.T_f=0.2", "sim.stride=1", f"consensus.delta={delta}", f"mode={mode}")
    zhat_ref, xhat_ref, events_ref, Zs_ref = reference_run(cfg)
    res = run_scenario(cfg, record_zhat=True)
    assert list(zip(res.event_steps, res.event_nodes)) == events_ref
    assert len(events_ref) > 5 * 10
    assert np.allclose(res.z_hat, zhat_ref, rtol=1e-12, atol=1e-9)
    assert np.allclose(res.x_hat, xhat_ref, rtol=1e-9, atol=1e-12)
