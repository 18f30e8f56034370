"""Fixed regression bases and the reinforcing functions appended to them.

Feature order is frozen so coefficient vectors stay meaningful across runs:

* ``constant-linear``            1, y_1..y_d
* ``constant-linear-quadratic``  1, y_1..y_d, y_i*y_j for i <= j (lexicographic)
* ``constant-linear-payoff``     1, y_1..y_d, g(x)
* ``swap-order-stats``           1, c, x_(1)..x_(d)
* ``swap-order-stats-quadratic`` 1, c, x_(1)..x_(d), x_(i)*x_(j) for i <= j

``y`` is the state itself, or its ascending order statistics when the family
is ``ordered``; ``g(x)`` is the product's undiscounted payoff and ``c`` the
swap's discounted net coupon at the state's own date.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

LINEAR, QUADRATIC, PAYOFF, SWAP_LINEAR, SWAP_QUADRATIC = range(5)

FAMILIES = {
    "constant-linear": LINEAR,
    "constant-linear-quadratic": QUADRATIC,
    "constant-linear-payoff": PAYOFF,
    "swap-order-stats": SWAP_LINEAR,
    "swap-order-stats-quadratic": SWAP_QUADRATIC,
}

# Row labels used in the published tables, mapped to family names.
TABLE_LABELS = {
    "1, X_i": "constant-linear",
    "1, X_i, X_iX_j": "constant-linear-quadratic",
    "1, X_i, g(X)": "constant-linear-payoff",
    "1, C, X_(i)": "swap-order-stats",
    "1, C, X_(i), X_(i)X_(j)": "swap-order-stats-quadratic",
}

VARIANTS = ("value", "indicator")


def family_name(label):
    """Resolve a family name or published row label (whitespace-insensitive)."""
    if label in FAMILIES:
        return label
    squeeze = {k.replace(" ", ""): v for k, v in TABLE_LABELS.items()}
    name = squeeze.get(str(label).replace(" ", ""))
    if name is None:
        raise ConfigError(f"unknown basis family {label!r}; choose from {sorted(FAMILIES)} "
                          f"or {sorted(TABLE_LABELS)}")
    return name


@dataclass(frozen=True)
class FixedBasisFamily:
    family: str
    dim: int
    ordered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", family_name(self.family))
        if self.dim < 1:
            raise ConfigError("basis dimension must be >= 1")

    @property
    def code(self):
        return FAMILIES[self.family]

    @property
    def uses_order_stats(self):
        return self.ordered or self.code in (SWAP_LINEAR, SWAP_QUADRATIC)

    @property
    def size(self):
        """Number ``K`` of fixed basis functions."""
        d = self.dim
        return {
            LINEAR: 1 + d,
            QUADRATIC: 1 + d + d * (d + 1) // 2,
            PAYOFF: 2 + d,
            SWAP_LINEAR: 2 + d,
            SWAP_QUADRATIC: 2 + d + d * (d + 1) // 2,
        }[self.code]

    def evaluate(self, states, scalar=None):
        """Feature matrix ``(n, K)`` for states ``(n, d)``.

        ``scalar`` is the per-state payoff (payoff family) or net coupon (swap
        families); it is ignored by the polynomial families.
        """
        x = np.asarray(states, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ConfigError(f"expected states of shape (n, {self.dim}), got {x.shape}")
        if self.uses_order_stats:
            x = np.sort(x, axis=1)
        n = x.shape[0]
        code = self.code
        cols = [np.ones((n, 1))]
        if code in (SWAP_LINEAR, SWAP_QUADRATIC):
            cols.append(_scalar_column(scalar, n))
        cols.append(x)
        if code in (QUADRATIC, SWAP_QUADRATIC):
            iu, ju = np.triu_indices(self.dim)
            cols.append(x[:, iu] * x[:, ju])
        if code == PAYOFF:
            cols.append(_scalar_column(scalar, n))
        return np.hstack(cols)


def _scalar_column(scalar, n):
    if scalar is None:
        raise ConfigError("this basis family needs a payoff or coupon value per state")
    return np.broadcast_to(np.asarray(scalar, dtype=float), (n,)).reshape(n, 1)


@dataclass(frozen=True)
class ReinforcementSpec:
    """``count`` reinforcing functions (0 = plain regression) of the given variant."""

    count: int = 1
    variant: str = "value"

    def __post_init__(self):
        if self.count not in (0, 1):
            raise ConfigError("only 0 or 1 reinforcing functions are supported")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown reinforcement variant {self.variant!r}")


@dataclass(frozen=True)
class BasisSpec:
    fixed: FixedBasisFamily
    reinforcement: ReinforcementSpec = ReinforcementSpec(0)

    @property
    def K(self):
        return self.fixed.size

    @property
    def b(self):
        return self.reinforcement.count

    @property
    def width(self):
        return self.K + self.b

    def to_dict(self):
        return {"family": self.fixed.family, "dim": self.fixed.dim, "ordered": self.fixed.ordered,
                "reinforcement": self.reinforcement.count, "variant": self.reinforcement.variant}

    @classmethod
    def from_dict(cls, doc):
        return cls(FixedBasisFamily(doc["family"], doc["dim"], doc.get("ordered", False)),
                   ReinforcementSpec(doc["reinforcement"], doc.get("variant", "value")))


def eval_fixed(spec, state, reward_at_state=None):
    """Fixed features ``psi_1..psi_K`` of a single state."""
    fixed = spec.fixed if isinstance(spec, BasisSpec) else spec
    state = np.asarray(state, dtype=float)
    if state.shape != (fixed.dim,):
        raise ConfigError(f"state has dimension {state.shape}, basis expects ({fixed.dim},)")
    return fixed.evaluate(state[None, :], reward_at_state)[0]


def reinforcing(variant, reward_next, continuation_next):
    """Vectorised reinforcing feature built from next-date reward and continuation.

    ``value`` gives ``max(g, C)``; ``indicator`` gives ``1{g >= C}``, the same
    tie convention as the stopping rule.
    """
    g = np.asarray(reward_next, dtype=float)
    c = np.asarray(continuation_next, dtype=float)
    if variant == "value":
        return np.maximum(g, c)
    if variant == "indicator":
        return (g >= c).astype(float)
    raise ConfigError(f"unknown reinforcement variant {variant!r}")


def eval_reinforcing(variant, reward_next, continuation_next):
    """Reinforcing feature vector (length 1) for scalar inputs."""
    return np.atleast_1d(reinforcing(variant, reward_next, continuation_next)).astype(float)
