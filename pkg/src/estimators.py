"""
Closed-form estimates and bounds for the expected critical coupling E(k_c).

Unless a sigma is passed, every formula is in units of Uniform[0,1]
frequencies (sigma^2 = 1/12). Passing sigma gives the same curve for any
frequency law with that standard deviation.
"""
import math
from typing import Dict, NamedTuple, Optional

import numpy as np
from scipy import integrate

from constants import (
    BINARY_CURVE,
    CHAIN_CURVE,
    CHAIN_CURVE_SIGMA,
    EULER_GAMMA,
    RANDOM_WALK_OFFSET,
    SIGMA_UNIFORM,
)
from errors import BadParameters


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise BadParameters(message)


# ------------------ Chain ------------------


def chi(n: float, sigma: Optional[float] = None) -> float:
    """
    Empirical expected critical coupling of an n-vertex chain.

    0.252*sqrt(n) - 0.168 for Uniform[0,1]; with sigma given,
    0.873*sigma*sqrt(n) - 0.581*sigma.
    """
    _require(n >= 2, f"chi needs n >= 2, got {n}")
    if sigma is None:
        return CHAIN_CURVE["a"] * math.sqrt(n) + CHAIN_CURVE["b"]
    return sigma * (CHAIN_CURVE_SIGMA["a"] * math.sqrt(n) + CHAIN_CURVE_SIGMA["b"])


class ChainBounds(NamedTuple):
    lower: float
    upper: float
    kolmogorov: float


def chain_bounds(n: float, sigma: float = SIGMA_UNIFORM) -> ChainBounds:
    """Random-walk lower/upper bounds and the Kolmogorov asymptote for the chain."""
    _require(n >= 2, f"chain bounds need n >= 2, got {n}")
    return ChainBounds(
        lower=sigma * math.sqrt(math.pi * n / 8.0),
        upper=sigma * math.sqrt(math.pi * n / 4.0),
        kolmogorov=sigma * math.sqrt(math.pi * n / 2.0) * math.log(2.0),
    )


def random_walk_estimate(n: float, sigma: float = SIGMA_UNIFORM) -> float:
    """Crude chain estimate: expected displacement of an n-step walk."""
    _require(n >= 1, f"random walk estimate needs n >= 1, got {n}")
    return sigma * math.sqrt(n / math.pi) - RANDOM_WALK_OFFSET * sigma


def chain_walk(freqs) -> np.ndarray:
    """Partition sums of a chain carrying freqs in path order: entry j is the sum of the first j+1 deviations."""
    freqs = np.asarray(freqs, dtype=float)
    return np.cumsum(freqs - freqs.mean())[:-1]


# ------------------ Star ------------------


def expected_uniform_max(n: int, sigma: float = SIGMA_UNIFORM) -> float:
    """Expected largest of n uniform draws, measured from the center of their interval."""
    _require(n >= 1, f"need n >= 1, got {n}")
    return sigma * math.sqrt(3.0) * (n - 1) / (n + 1)


def estimator_star(n: int, sigma: float = SIGMA_UNIFORM) -> float:
    """sigma*sqrt(3)*(n-2)/n + sigma*sqrt(2/(n*pi)); tends to 1/2 for Uniform[0,1]."""
    _require(n >= 3, f"star estimator needs n >= 3, got {n}")
    return sigma * math.sqrt(3.0) * (n - 2) / n + sigma * math.sqrt(2.0 / (n * math.pi))


# Giles' single-precision erfinv polynomials, used only as a starting guess
_CENTRAL = (
    2.81022636e-08, 3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
    -0.00125372503, -0.00417768164, 0.246640727, 1.50140941,
)
_TAIL = (
    -0.000200214257, 0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
    -0.0076224613, 0.00943887047, 1.00167406, 2.83297682,
)


def _horner(coefficients, w: float) -> float:
    p = 0.0
    for c in coefficients:
        p = p * w + c
    return p


# Below this the erfc values themselves underflow; the tail is solved in log space
_FAR_TAIL = 1e-300


def _log_erfc_tail(z: float) -> float:
    s = 1.0 / (2.0 * z * z)
    series = 1.0 - s + 3.0 * s**2 - 15.0 * s**3 + 105.0 * s**4
    return -z * z - math.log(z * math.sqrt(math.pi)) + math.log(series)


def _tail_guess(y: float) -> float:
    # erfc(z) ~ exp(-z^2) / (z sqrt(pi))
    t = math.sqrt(-math.log(y))
    return t - (math.log(t) + 0.5 * math.log(math.pi)) / (2.0 * t)


def erfcinv(y: float) -> float:
    """
    Inverse complementary error function on (0, 2).

    A starting guess (Giles' polynomials, or the asymptotic tail for tiny y)
    is polished by Newton steps on math.erfc until the step is below 1e-15
    relative. erfcinv(2 - y) = -erfcinv(y).
    """
    _require(0.0 <= y <= 2.0, f"erfcinv is defined on [0, 2], got {y}")
    if y == 0.0:
        return math.inf
    if y == 2.0:
        return -math.inf
    if y == 1.0:
        return 0.0
    if y > 1.0:
        return -erfcinv(2.0 - y)

    if y < _FAR_TAIL:
        z = _tail_guess(y)
        target = math.log(y)
        for _ in range(50):
            step = (_log_erfc_tail(z) - target) / (2.0 * z + 1.0 / z)
            z += step
            if abs(step) <= 1e-15 * z:
                break
        return z

    w = -math.log(y * (2.0 - y))
    if w < 5.0:
        z = _horner(_CENTRAL, w - 2.5) * (1.0 - y)
    elif w < 16.0:
        z = _horner(_TAIL, math.sqrt(w) - 3.0) * (1.0 - y)
    else:
        z = _tail_guess(y)

    half_root_pi = 0.5 * math.sqrt(math.pi)
    for _ in range(50):
        step = (math.erfc(z) - y) * half_root_pi * math.exp(z * z)
        z += step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z


def _mu_closed_form(x: float) -> float:
    return math.sqrt(2.0) * (
        (1.0 - EULER_GAMMA) * erfcinv(1.0 / x) + EULER_GAMMA * erfcinv(1.0 / (x * math.e))
    )


def mu(x: float) -> float:
    """
    Expected maximum of |Z_1|..|Z_x| for unit normals, closed-form approximation.

    mu(0) = 0 and mu(1) = sqrt(2/pi) exactly; x >= 2 uses the Gumbel-type
    formula with erfc^-1; non-integer x below 2 interpolates linearly.
    """
    _require(x >= 0, f"mu needs x >= 0, got {x}")
    if x == 0:
        return 0.0
    root = math.sqrt(2.0 / math.pi)
    if x <= 1:
        return x * root
    if x < 2:
        return root + (x - 1.0) * (_mu_closed_form(2.0) - root)
    return _mu_closed_form(x)


def mu_exact(x: float) -> float:
    """E max of x absolute unit normals by quadrature of 1 - erf(t/sqrt(2))**x."""
    _require(x >= 0, f"mu needs x >= 0, got {x}")
    if x == 0:
        return 0.0

    def tail(t: float) -> float:
        return -math.expm1(x * math.log1p(-math.erfc(t / math.sqrt(2.0))))

    upper = math.sqrt(2.0) * erfcinv(1e-18 / max(x, 1.0)) + 1.0
    value, _ = integrate.quad(tail, 0.0, upper, limit=200)
    return float(value)


def estimator_star_normal(n: int, sigma: float = SIGMA_UNIFORM, exact: bool = False) -> float:
    """sigma * mu(n - 2): star with normally distributed frequencies."""
    _require(n >= 3, f"star estimator needs n >= 3, got {n}")
    return sigma * (mu_exact(n - 2) if exact else mu(n - 2))


# ------------------ Dumb-bell and binary ------------------


def estimator_dumbbell(n: int, sigma: float = SIGMA_UNIFORM) -> float:
    """Leading term sigma*sqrt(n/(2 pi)) plus the leaf correction sigma*sqrt(18/(n pi))."""
    _require(n >= 4 and n % 2 == 0, f"dumbbell estimator needs an even n >= 4, got {n}")
    return sigma * math.sqrt(n / (2.0 * math.pi)) + sigma * math.sqrt(18.0 / (n * math.pi))


def estimator_binary(n: float) -> float:
    """Empirical 0.212*sqrt(n) - 0.082."""
    _require(n >= 3, f"binary estimator needs n >= 3, got {n}")
    return BINARY_CURVE["a"] * math.sqrt(n) + BINARY_CURVE["b"]


# ------------------ General-tree bounds ------------------


def lower_by_diameter(d: int, sigma: float = SIGMA_UNIFORM) -> float:
    """chi(D + 1): a tree contains a chain of D + 1 vertices."""
    return chi(d + 1) * sigma / SIGMA_UNIFORM


def upper_by_order(n: int, sigma: float = SIGMA_UNIFORM) -> float:
    """chi(n): the chain dominates every tree of the same order."""
    return chi(n) * sigma / SIGMA_UNIFORM


def lower_by_partition(p: int, sigma: float = SIGMA_UNIFORM) -> float:
    """sigma*sqrt(P/pi) = sqrt(P/(12 pi)) for Uniform[0,1]."""
    _require(p >= 1, f"partition size must be >= 1, got {p}")
    return sigma * math.sqrt(p / math.pi)


def upper_by_partition(n: int, p: int, sigma: float = SIGMA_UNIFORM) -> float:
    """(3/2)*sigma*sqrt(P log(n/P)) = (1/4)*sqrt(3 P log(n/P)) for Uniform[0,1]."""
    _require(1 <= p <= n / 2, f"partition size must be in 1..n/2, got P={p}, n={n}")
    return 1.5 * sigma * math.sqrt(p * math.log(n / p))


def bound_values(n: int, d: int, p: int, sigma: float = SIGMA_UNIFORM) -> Dict[str, float]:
    return {
        "lower_by_diameter": lower_by_diameter(d, sigma),
        "upper_by_order": upper_by_order(n, sigma),
        "lower_by_partition": lower_by_partition(p, sigma),
        "upper_by_partition": upper_by_partition(n, p, sigma),
    }
