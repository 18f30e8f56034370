"""Symbolic cost accounting for standard and reinforced regression.

Costs are measured in two units: ``c_f`` per evaluation of a basis or reward
function and ``c_star`` per add-multiply pair.  The order-of-magnitude
expressions are treated as exact so they can be unit tested.  Pass
:class:`fractions.Fraction` values to get exact rational results.
"""
from dataclasses import asdict, dataclass
from fractions import Fraction
import warnings

from .errors import ConfigError


@dataclass(frozen=True)
class CostParams:
    c_f: float = 1
    c_star: float = 1
    N: int = 1
    N_test: int = 1
    J: int = 1
    K: int = 1
    K_r: int = 1
    b: int = 1

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0:
                raise ConfigError(f"{name} must be non-negative, got {value}")
        if self.K == 0:
            raise ConfigError("K must be positive")
        if self.K_r >= self.K:
            warnings.warn(f"K_r={self.K_r} >= K={self.K}: reinforcement saves nothing",
                          RuntimeWarning, stacklevel=3)


def _half(x):
    # exact for ints and Fractions, plain division for floats
    return Fraction(x, 2) if isinstance(x, int) else x / 2


def reinforced_training_cost(p):
    """``N J^2 c_f / 2 + N J K_r c_f + N J K_r^2 c_* + N J^2 K_r c_* / 2``."""
    n, j, k = p.N, p.J, p.K_r
    return _half(n * j * j) * p.c_f + n * j * k * p.c_f + n * j * k * k * p.c_star \
        + _half(n * j * j * k) * p.c_star


def standard_training_cost(p):
    """``N J K c_f + N J K^2 c_*``."""
    return p.N * p.J * p.K * p.c_f + p.N * p.J * p.K ** 2 * p.c_star


def evaluation_cost(p):
    """Cost of the reinforced lower-bound estimate on ``N_test`` paths."""
    n, j, k = p.N_test, p.J, p.K_r
    return n * j * k * p.c_f + _half(j * j * n) * p.c_f + _half(n * k * j * j) * p.c_star


def cost_ratios(p):
    """``(training, evaluation)`` cost of reinforced relative to standard regression."""
    if p.c_f == 0:
        raise ZeroDivisionError("cost ratios need c_f > 0")
    u = p.c_star / Fraction(p.c_f) if _exact(p) else p.c_star / p.c_f
    lead = (p.K_r + _half(p.J)) / (Fraction(p.K) if _exact(p) else p.K)
    training = lead * (1 + p.K_r * u) / (1 + p.K * u)
    evaluation = lead + _half(p.J * p.K_r) / p.K * u
    return training, evaluation


def _exact(p):
    return all(isinstance(v, (int, Fraction)) for v in asdict(p).values())


def max_call_ratio(d, J):
    """Reinforced linear versus standard quadratic basis, ``(2d + J) / (d (d + 1))``."""
    return Fraction(2 * d + J, d * (d + 1))


def predicted_costs(p):
    """Dictionary of all predictions, as floats, for reports."""
    training, evaluation = cost_ratios(p) if p.c_f else (float("nan"), float("nan"))
    return {"reinforced_training": float(reinforced_training_cost(p)),
            "standard_training": float(standard_training_cost(p)),
            "evaluation": float(evaluation_cost(p)),
            "training_ratio": float(training), "evaluation_ratio": float(evaluation)}
