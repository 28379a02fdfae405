import numpy as np
import pytest

import dynfl as dl
from dynfl.lp import certificate_errors, solve_lp
from dynfl.relaxation import build_lp_fixed, build_lp_hourly, extract_fractional


def _small_fixed():
    rng = np.random.default_rng(20240801)
    out = []
    for k in range(60):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(2, 5))
        T = int(rng.integers(2, 6))
        f = float(rng.uniform(0.1, 2.0))
        g = float(rng.uniform(0.1, 1.5))
        step = float(rng.uniform(0.05, 0.4))
        out.append((f"fixed-{k}",
                    dl.gen_random_walk(n, m, T, step=step, f=f, g=g, seed=1000 + k)))
    return out


def _small_hourly():
    rng = np.random.default_rng(20240802)
    out = []
    for k in range(40):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(2, 4))
        T = int(rng.integers(2, 5))
        f = float(rng.uniform(0.1, 1.0))
        g = float(rng.uniform(0.1, 1.0))
        step = float(rng.uniform(0.05, 0.4))
        out.append((f"hourly-{k}",
                    dl.gen_random_walk(n, m, T, step=step, f=f, g=g, seed=2000 + k,
                                       mode=dl.Mode.HOURLY)))
    return out


def _acceptance_instances(mode, base_seed):
    return [(f"{mode.value}-acc-{k}",
             dl.gen_random_walk(6, 6, 8, step=0.25, f=1.0, g=1.0,
                                seed=base_seed + k, mode=mode))
            for k in range(10)]


@pytest.fixture(scope="session")
def fixed_corpus():
    return _small_fixed()


@pytest.fixture(scope="session")
def hourly_corpus():
    return _small_hourly()


@pytest.fixture(scope="session")
def acceptance_fixed():
    return _acceptance_instances(dl.Mode.FIXED, 100)


@pytest.fixture(scope="session")
def acceptance_hourly():
    return _acceptance_instances(dl.Mode.HOURLY, 200)


@pytest.fixture(scope="session")
def relaxed():
    """Memoized LP solve: name -> (fractional solution, certificate errors)."""
    cache = {}

    def get(name, instance):
        if name not in cache:
            builder = (build_lp_fixed if instance.mode is dl.Mode.FIXED
                       else build_lp_hourly)
            lp, index = builder(instance)
            sol = solve_lp(lp)
            cache[name] = (extract_fractional(sol, index),
                           certificate_errors(lp, sol))
        return cache[name]

    return get
