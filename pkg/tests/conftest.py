import numpy as np
import pytest

from subaffine.symbolic import SubshiftSpec, compile_subshift, full_shift

# the pressure zero of the swapped-diagonal fixture (root of 2^-s + 4^-s = 1),
# frozen from a scalar bisection oracle (see test_acceptance.solve_scalar)
S_NOT_UNIQUE = 0.694241913630617


@pytest.fixture(scope="session")
def shift2():
    return full_shift(2)


@pytest.fixture(scope="session")
def shift4():
    return full_shift(4)


@pytest.fixture(scope="session")
def no01():
    return compile_subshift(SubshiftSpec(2, ((0, 1),)))


@pytest.fixture(scope="session")
def two_fixed():
    return compile_subshift(SubshiftSpec(2, ((0, 1), (1, 0))))


@pytest.fixture(scope="session")
def not_unique_matrices():
    return [np.diag([0.5, 0.25]), np.diag([0.25, 0.5])]


@pytest.fixture(scope="session")
def shear_matrices():
    a = 0.25 * np.array([[1.0, 1.0], [0.0, 1.0]])
    return [a, a.copy()]


@pytest.fixture(scope="session")
def nondiff_matrices():
    return [np.diag([0.25, 0.03125]), np.diag([0.25, 0.5])]


@pytest.fixture(scope="session")
def tractable_system():
    lam_bar = 1.0 / 3.0
    mats, trs = [], []
    for beta, theta in ((0.17, 0.13), (0.13, 0.17)):
        mats.append(np.array([[lam_bar - beta, theta],
                              [beta, lam_bar - theta]]))
        trs.append(np.array([(1 - lam_bar) * theta / (beta + theta),
                             (1 - lam_bar) * beta / (beta + theta)]))
    return mats, trs


def random_contractive(rng, d=2, top=0.6):
    """Random invertible matrix with alpha_1 <= top."""
    while True:
        a = rng.uniform(-1.0, 1.0, size=(d, d))
        s = np.linalg.svd(a, compute_uv=False)
        if s[-1] > 1e-3:
            return a * (rng.uniform(0.3, 1.0) * top / s[0])


def random_sft(rng, kappa=2, max_len=3, max_words=2):
    """Random nonempty subshift of finite type."""
    while True:
        forb = []
        for _ in range(rng.integers(1, max_words + 1)):
            ln = int(rng.integers(2, max_len + 1))
            forb.append(tuple(int(x) for x in rng.integers(0, kappa, ln)))
        try:
            spec = SubshiftSpec(kappa, tuple(forb))
            return spec, compile_subshift(spec)
        except Exception:
            continue
