"""The two binary action models used throughout the tests and demos.

Both use X ~ Bern(1/2), binary actions with cost Lambda(a) = a, and the
policy parameterisation alpha = P(A=1 | X=0), beta = P(A=0 | X=1).
"""

from __future__ import annotations

import numpy as np

from .info import ActionModel, CondPmf, Pmf

UNIFORM_BIT = (0.5, 0.5)
UNIT_COST = (0.0, 1.0)


def binary_policy(alpha: float, beta: float) -> np.ndarray:
    return np.array([[1.0 - alpha, alpha], [beta, 1.0 - beta]])


def independent_policy(q: float) -> np.ndarray:
    """Action independent of X with P(A=1) = q."""
    return np.array([[1.0 - q, q], [1.0 - q, q]])


def sensor_channel() -> np.ndarray:
    """Example 1 channel, indexed [x, a, y].

    A=1 gives a clean copy of X; A=0 gives a fair coin.  The published
    formulas for this example only hold with this assignment.
    """
    ch = np.empty((2, 2, 2))
    ch[:, 0, :] = 0.5
    ch[:, 1, :] = np.eye(2)
    return ch


def zs_channel(delta: float) -> np.ndarray:
    """Example 2 channel: Z-channel for A=0 (1 -> 0 w.p. delta), S-channel for A=1 (0 -> 1 w.p. delta)."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    ch = np.empty((2, 2, 2))
    ch[0, 0] = (1.0, 0.0)
    ch[1, 0] = (delta, 1.0 - delta)
    ch[0, 1] = (1.0 - delta, delta)
    ch[1, 1] = (0.0, 1.0)
    return ch


def example1_model(gamma: float, alpha: float = 0.0, beta: float = 1.0) -> ActionModel:
    return ActionModel(
        Pmf(UNIFORM_BIT), CondPmf(binary_policy(alpha, beta)), CondPmf(sensor_channel()), UNIT_COST, gamma
    )


def example2_model(delta: float, gamma: float, alpha: float = 0.0, beta: float = 1.0) -> ActionModel:
    return ActionModel(
        Pmf(UNIFORM_BIT), CondPmf(binary_policy(alpha, beta)), CondPmf(zs_channel(delta)), UNIT_COST, gamma
    )
