"""Built-in example systems, one per phenomenon they demonstrate.

Each fixture is a plain config dict (the CLI schema) so it can be loaded
by name anywhere a config file is accepted.  Matrix entries are the exact
decimal values of the corresponding construction.

not-unique          two swapped diagonal maps whose attractor carries two
                    distinct ergodic equilibrium measures (and all their
                    mixtures, which are semiconformal)
no-semiconformal    equal shear maps: unique equilibrium measure, but the
                    lower Gibbs bound fails at rate n^-s, so no
                    semiconformal measure exists
nondifferentiable   diagonal maps whose pressure is the maximum of an
                    affine and a strictly convex branch, with a corner
                    between them
tractable           strictly positive matrices fixing a line: the cone
                    condition holds yet the attractor is trapped in the
                    line, so its box dimension stays below the pressure
                    zero
"""

from __future__ import annotations


def _bisect_scalar(f, lo: float, hi: float, iters: int = 200) -> float:
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def not_unique(lam: float = 0.5, gamma: float = 0.25) -> dict:
    """Swapped diagonal pair diag(lam, gamma), diag(gamma, lam)."""
    s = _bisect_scalar(lambda t: lam ** t + gamma ** t - 1.0, 0.0, 2.0)
    return {
        "dimension": 2,
        "maps": [
            {"matrix": [[lam, 0.0], [0.0, gamma]], "translation": [0.0, 0.0]},
            {"matrix": [[gamma, 0.0], [0.0, lam]],
             "translation": [1.0 - gamma, 1.0 - lam]},
        ],
        "measure": {"type": "bernoulli", "p": [lam ** s, gamma ** s]},
        "seed": 0,
    }


def no_semiconformal(lam: float = 0.25) -> dict:
    """Two copies of the shear lam * [[1, 1], [0, 1]]."""
    return {
        "dimension": 2,
        "maps": [
            {"matrix": [[lam, lam], [0.0, lam]], "translation": [0.0, 0.0]},
            {"matrix": [[lam, lam], [0.0, lam]], "translation": [1.0, 1.0]},
        ],
        "measure": {"type": "bernoulli", "p": [0.5, 0.5]},
        "seed": 0,
    }


def nondifferentiable() -> dict:
    """diag(1/4, 1/32) and diag(1/4, 1/2): pressure with a corner."""
    return {
        "dimension": 2,
        "maps": [
            {"matrix": [[0.25, 0.0], [0.0, 0.03125]],
             "translation": [0.0, 0.0]},
            {"matrix": [[0.25, 0.0], [0.0, 0.5]],
             "translation": [0.0, 0.0]},
        ],
        "seed": 0,
    }


def tractable() -> dict:
    """Positive matrices fixing the line x + y = 1 (similitude ratio 1/30)."""
    lam_bar = 1.0 / 3.0
    maps = []
    for beta, theta in ((0.17, 0.13), (0.13, 0.17)):
        maps.append({
            "matrix": [[lam_bar - beta, theta], [beta, lam_bar - theta]],
            "translation": [(1.0 - lam_bar) * theta / (beta + theta),
                            (1.0 - lam_bar) * beta / (beta + theta)],
        })
    return {"dimension": 2, "maps": maps, "seed": 0}


FIXTURES = {
    "not-unique": not_unique,
    "no-semiconformal": no_semiconformal,
    "nondifferentiable": nondifferentiable,
    "tractable": tractable,
}


def fixture_config(name: str) -> dict:
    if name not in FIXTURES:
        raise KeyError(
            f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    return FIXTURES[name]()
