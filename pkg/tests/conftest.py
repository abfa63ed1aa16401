import math

import numpy as np
import pytest
from scipy import integrate

from markovorder import TestConfig, make_trajectory

TestConfig.__test__ = False  # a config dataclass, not a pytest test class


# -- independent distribution oracles (adaptive quadrature of densities) -----

def t_density(x: float, df: int) -> float:
    ln = (math.lgamma((df + 1) / 2) - math.lgamma(df / 2)
          - 0.5 * math.log(df * math.pi)
          - (df + 1) / 2 * math.log1p(x * x / df))
    return math.exp(ln)


def t_cdf_quadrature(x: float, df: int) -> float:
    half, _ = integrate.quad(t_density, 0.0, abs(x), args=(df,), epsabs=1e-12)
    return 0.5 + half if x >= 0 else 0.5 - half


def f_density(x: float, d1: int, d2: int) -> float:
    ln = (math.lgamma((d1 + d2) / 2) - math.lgamma(d1 / 2) - math.lgamma(d2 / 2)
          + (d1 / 2) * math.log(d1 / d2) + (d1 / 2 - 1) * math.log(x)
          - (d1 + d2) / 2 * math.log1p(d1 * x / d2))
    return math.exp(ln)


def f_cdf_quadrature(x: float, d1: int, d2: int) -> float:
    val, _ = integrate.quad(f_density, 0.0, x, args=(d1, d2),
                            epsabs=1e-12, limit=200)
    return val


def ar1_trajectory(rho: float, T: int, seed: int, warmup: int = 300):
    """Scalar AR(1) trajectory, stationary start via warmup."""
    rng = np.random.default_rng(seed)
    n = T + warmup
    x = np.empty(n)
    e = rng.standard_normal(n)
    x[0] = e[0]
    for t in range(1, n):
        x[t] = rho * x[t - 1] + e[t]
    return make_trajectory(x[warmup:][:, None], dt=1.0, id=f"ar1_{seed}")


def skip_order2_trajectory(coeff: float, T: int, seed: int, warmup: int = 400):
    """Scalar process X_{t+1} = coeff * X_{t-1} + eps (true order 2)."""
    rng = np.random.default_rng(seed)
    n = T + warmup
    x = np.empty(n)
    e = rng.standard_normal(n)
    x[:2] = e[:2]
    for t in range(2, n):
        x[t] = coeff * x[t - 2] + e[t]
    return make_trajectory(x[warmup:][:, None], dt=1.0, id=f"skip2_{seed}")


def iid_trajectory(T: int, d: int, seed: int):
    rng = np.random.default_rng(seed)
    return make_trajectory(rng.standard_normal((T, d)), dt=1.0, id=f"iid_{seed}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
