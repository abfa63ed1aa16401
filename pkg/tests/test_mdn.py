import numpy as np
import pytest

from markovorder import MdnTrainConfig, fit_mixture_density, make_trajectory
from markovorder.errors import InsufficientDataError
from markovorder.mdn import _loss_and_grads, _init_params, fit_window


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    cfg = MdnTrainConfig(components=2, hidden=4)
    z = rng.standard_normal((12, 3))
    y = rng.standard_normal((12, 2))
    params = _init_params(3, 2, cfg, rng)
    _, grads = _loss_and_grads(params, z, y, 2, 2)
    eps = 1e-6
    for key in params:
        flat = params[key].reshape(-1)
        for idx in (0, flat.size // 2, flat.size - 1):
            orig = flat[idx]
            flat[idx] = orig + eps
            up, _ = _loss_and_grads(params, z, y, 2, 2)
            flat[idx] = orig - eps
            down, _ = _loss_and_grads(params, z, y, 2, 2)
            flat[idx] = orig
            numeric = (up - down) / (2 * eps)
            assert grads[key].reshape(-1)[idx] == pytest.approx(numeric, abs=1e-5)


def test_linear_gaussian_recovers_analytic_cf():
    rng = np.random.default_rng(42)
    T = 2000
    x = np.empty(T)
    x[0] = rng.standard_normal()
    noise = 0.5 * rng.standard_normal(T)
    for t in range(1, T):
        x[t] = 0.6 * x[t - 1] + noise[t]
    traj = make_trajectory(x[:, None], dt=1.0)
    est = fit_mixture_density(traj, components=1,
                              train=MdnTrainConfig(components=1, hidden=16,
                                                   epochs=400, lr=0.05),
                              rng=np.random.default_rng(1))
    # conditional law is N(0.6 x, 0.25); its CF is exp(i mu 0.6 x - mu^2 0.25 / 2)
    for x0 in (-1.0, 0.0, 1.0):
        for mu in (0.5, 1.0, 2.0):
            got = est.evaluate(np.array([mu]), np.array([x0]))
            want = np.exp(1j * mu * 0.6 * x0 - 0.5 * mu ** 2 * 0.25)
            assert abs(got - want) <= 0.1


def test_zero_frequency_exact_one():
    rng = np.random.default_rng(5)
    traj = make_trajectory(rng.standard_normal((80, 2)), dt=1.0)
    est = fit_mixture_density(traj, components=2, rng=np.random.default_rng(2))
    assert est.evaluate(np.zeros(2), traj.states[3]) == 1.0 + 0.0j


def test_modulus_bounded():
    rng = np.random.default_rng(6)
    traj = make_trajectory(rng.standard_normal((100, 1)), dt=1.0)
    est = fit_mixture_density(traj, components=2, rng=np.random.default_rng(3))
    freqs = rng.standard_normal((30, 1))
    points = rng.standard_normal((10, 1))
    assert np.abs(est.evaluate_many(freqs, points)).max() <= 1.0 + 1e-12


def test_deterministic_given_seed():
    rng = np.random.default_rng(7)
    traj = make_trajectory(rng.standard_normal((60, 1)), dt=1.0)
    a = fit_mixture_density(traj, components=2, rng=np.random.default_rng(9))
    b = fit_mixture_density(traj, components=2, rng=np.random.default_rng(9))
    mu, x = np.array([0.7]), np.array([0.1])
    assert a.evaluate(mu, x) == b.evaluate(mu, x)


def test_preconditions():
    rng = np.random.default_rng(8)
    traj = make_trajectory(rng.standard_normal((25, 1)), dt=1.0)
    with pytest.raises(InsufficientDataError):
        fit_mixture_density(traj, components=0)
    with pytest.raises(InsufficientDataError):
        fit_mixture_density(traj, components=3)  # needs T >= 30


def test_backward_direction_fits():
    rng = np.random.default_rng(10)
    states = rng.standard_normal((120, 1))
    est = fit_window(states, window=2, direction="backward",
                     train=MdnTrainConfig(components=2, hidden=8, epochs=50),
                     rng=np.random.default_rng(4))
    assert est.cond_dim == 2
    assert est.target_dim == 1
    val = est.evaluate(np.array([0.5]), np.array([0.0, 0.1]))
    assert abs(val) <= 1.0 + 1e-12
