import math

import numpy as np
import pytest

import phetc


def test_pendulum_matrices():
    model = phetc.pendulum_model()
    A = model.A()
    assert A.shape == (3, 3)
    np.testing.assert_allclose(A, [[0, 1, 0], [-1, -0.1, -1], [0, 0, -1]])
    assert model.hamiltonian(np.zeros(3)) == 0.0


def test_simulate_converges_and_counts_samples():
    model = phetc.pendulum_model()
    cfg = phetc.TriggerDelayConfig(h=0.3, sigma=0.0)
    trace = phetc.simulate(model, cfg, np.array([2.0, 0.0, 0.0]), 40.0, 1e-3)
    assert trace.transmission_count == math.floor(40.0 / 0.3) + 1
    assert np.linalg.norm(trace.states[-1]) < 1e-2
    idx = trace.indices
    assert idx["ise"] > 0 and idx["iae"] > 0 and idx["itae"] > 0


def test_step_mismatch_raises():
    model = phetc.pendulum_model()
    cfg = phetc.TriggerDelayConfig(h=0.3)
    with pytest.raises(phetc.StepMismatch):
        phetc.simulate(model, cfg, np.zeros(3), 1.0, 0.007)


def test_certify_and_sigma_max():
    model = phetc.pendulum_model()
    vertices = phetc.pendulum_hessian_vertices(3.0)
    cert = phetc.certify(model, 0.3, 0.1, vertices)
    assert cert.feasible
    assert cert.xi_max_eigenvalue < 0
    assert np.all(np.linalg.eigvalsh(cert.P) > 0)
    res = phetc.sigma_max(model, 0.1, vertices)
    assert res["sigma_max"] > 0.3


def test_wirtinger_gap_constant_and_sine():
    t = np.linspace(0.0, 1.0, 201)
    const = np.tile([1.0, -2.0], (t.size, 1))
    assert abs(phetc.wirtinger_gap(np.eye(2), t, const)) < 1e-9
    sine = np.sin(5 * t)[:, None]
    assert phetc.wirtinger_gap(np.eye(1), t, sine) > 0


def test_check_trigger_inclusive():
    cfg = phetc.TriggerDelayConfig(sigma=1.0)
    assert phetc.check_trigger(cfg, np.array([1.0]), np.array([1.0]))
    assert not phetc.check_trigger(cfg, np.array([0.5]), np.array([1.0]))
