"""Continuous-armed bandit policies with a propose/update lifecycle.

Policies never mutate state in ``propose``; every accepted interaction is
fed back through ``update`` exactly once. All randomness flows through the
``numpy.random.Generator`` handed to ``propose``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rewards import ActionRange


class RankDeficiencyError(ValueError):
    """Quadratic fit attempted on data that cannot identify three coefficients."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A matrix required to be positive definite failed factorization."""


@dataclass(frozen=True)
class QuadraticCoefficients:
    b0: float
    b1: float
    b2: float


def least_squares_quadratic(history) -> QuadraticCoefficients:
    """Fit r = b0 + b1*a + b2*a^2 by normal equations.

    Requires at least three distinct action values; raises
    RankDeficiencyError otherwise or when the normal matrix is
    numerically singular (condition estimate above 1e12).
    """
    actions = np.asarray([a for a, _ in history], dtype=float)
    rewards = np.asarray([r for _, r in history], dtype=float)
    if len(set(actions.tolist())) < 3:
        raise RankDeficiencyError(
            f"need >= 3 distinct actions, got {len(set(actions.tolist()))}"
        )
    X = np.column_stack([np.ones_like(actions), actions, actions**2])
    xtx = X.T @ X
    if np.linalg.cond(xtx) > 1e12:
        raise RankDeficiencyError("normal matrix numerically singular")
    b = np.linalg.solve(xtx, X.T @ rewards)
    return QuadraticCoefficients(float(b[0]), float(b[1]), float(b[2]))


def argmax_quadratic(b1: float, b2: float, action_range: ActionRange) -> float:
    """Maximize b1*a + b2*a^2 over the range.

    Returns the interior vertex when it exists; otherwise the better
    endpoint (ties broken toward lo). Never leaves [lo, hi].
    """
    lo, hi = action_range.lo, action_range.hi
    if b2 < 0.0:
        vertex = -b1 / (2.0 * b2)
        if lo <= vertex <= hi:
            return vertex
    val_lo = b1 * lo + b2 * lo * lo
    val_hi = b1 * hi + b2 * hi * hi
    return lo if val_lo >= val_hi else hi


def _cholesky_lower(matrix: np.ndarray, jitter: float = 1e-10) -> np.ndarray:
    # One jitter retry guards against accumulated rounding on a matrix that
    # is positive definite in exact arithmetic.
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        try:
            return np.linalg.cholesky(matrix + jitter * np.eye(matrix.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(str(exc)) from exc


def sample_mvn(mu: np.ndarray, sigma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One draw from N(mu, sigma) via the lower Cholesky factor."""
    L = _cholesky_lower(np.asarray(sigma, dtype=float))
    return np.asarray(mu, dtype=float) + L @ rng.standard_normal(len(mu))


class Policy:
    """Base lifecycle: ``propose(rng)`` reads state, ``update`` advances it."""

    kind = "base"

    def __init__(self, action_range: ActionRange):
        self.range = action_range
        self.t = 0

    def propose(self, rng: np.random.Generator) -> float:
        raise NotImplementedError

    def update(self, action: float, reward: float) -> None:
        self.t += 1

    def params(self) -> dict:
        return {}


class UniformRandomPolicy(Policy):
    """Draws every action uniformly over the range; the naive benchmark."""

    kind = "UR"

    def propose(self, rng):
        return float(rng.uniform(self.range.lo, self.range.hi))


class ConstantPolicy(Policy):
    """Always proposes a fixed action. Used for calibration and testing."""

    kind = "constant"

    def __init__(self, action_range: ActionRange, action: float):
        super().__init__(action_range)
        self.action = action

    def propose(self, rng):
        return self.action

    def params(self):
        return {"action": self.action}


class EpsilonFirstPolicy(Policy):
    """Explore uniformly for N steps, then exploit the fitted quadratic's argmax.

    The quadratic fit happens once, on the update that completes the
    exploration phase; the exploitation action is frozen thereafter.
    """

    kind = "EF"

    def __init__(self, action_range: ActionRange, explore_steps: int = 2000):
        super().__init__(action_range)
        if explore_steps < 3:
            raise ValueError("explore_steps must be at least 3 to fit a quadratic")
        self.explore_steps = explore_steps
        self.history: list[tuple[float, float]] = []
        self.fitted: QuadraticCoefficients | None = None
        self.exploit_action: float | None = None

    def propose(self, rng):
        if self.t < self.explore_steps:
            return float(rng.uniform(self.range.lo, self.range.hi))
        return self.exploit_action

    def update(self, action, reward):
        if self.t < self.explore_steps:
            self.history.append((action, reward))
        super().update(action, reward)
        if self.t == self.explore_steps:
            self.fitted = least_squares_quadratic(self.history)
            self.exploit_action = argmax_quadratic(
                self.fitted.b1, self.fitted.b2, self.range
            )

    def params(self):
        return {"explore_steps": self.explore_steps}


class ThompsonQuadraticPolicy(Policy):
    """Thompson sampling over a Bayesian quadratic regression of the reward.

    Tracks the information vector J = P*mu and the precision matrix P of
    the coefficient posterior; each proposal draws one coefficient vector
    from N(inv(P)*J, inv(P)) and plays the argmax of the drawn quadratic.
    """

    kind = "TBL"

    DEFAULT_J = (0.0, 0.05, -0.05)
    DEFAULT_P_DIAG = (2.0, 2.0, 5.0)

    def __init__(
        self,
        action_range: ActionRange,
        J=None,
        P=None,
        sigma2: float = 1.0,
        clamp_vertex: bool = True,
    ):
        super().__init__(action_range)
        if sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        self.J = np.array(self.DEFAULT_J if J is None else J, dtype=float)
        self.P = (
            np.diag(self.DEFAULT_P_DIAG).astype(float)
            if P is None
            else np.array(P, dtype=float)
        )
        self.sigma2 = sigma2
        self.clamp_vertex = clamp_vertex
        self._cached_draw_factors: tuple[np.ndarray, np.ndarray] | None = None

    def posterior(self) -> tuple[np.ndarray, np.ndarray]:
        """Posterior (mu, Sigma) with Sigma = inv(P), mu = Sigma @ J."""
        _cholesky_lower(self.P)  # PD check; raises otherwise
        sigma = np.linalg.inv(self.P)
        sigma = (sigma + sigma.T) / 2.0
        return sigma @ self.J, sigma

    def propose(self, rng):
        if self._cached_draw_factors is None:
            mu, sigma = self.posterior()
            self._cached_draw_factors = (mu, _cholesky_lower(sigma))
        mu, L = self._cached_draw_factors
        theta = mu + L @ rng.standard_normal(3)
        b1, b2 = float(theta[1]), float(theta[2])
        if not self.clamp_vertex and b2 < 0.0:
            return -b1 / (2.0 * b2)
        return argmax_quadratic(b1, b2, self.range)

    def update(self, action, reward):
        features = np.array([1.0, action, action * action])
        self.J += reward * features / self.sigma2
        self.P += np.outer(features, features) / self.sigma2
        self._cached_draw_factors = None
        super().update(action, reward)

    def params(self):
        return {
            "J0": list(self.DEFAULT_J),
            "P0_diag": list(self.DEFAULT_P_DIAG),
            "sigma2": self.sigma2,
            "clamp_vertex": self.clamp_vertex,
        }


class LockInFeedbackPolicy(Policy):
    """Gradient ascent on a lock-in amplified oscillation around a center.

    Proposes a0 + A*cos(omega*t), accumulates reward * cos(omega*t) over an
    integration window of length i, and moves the center by gamma times the
    window average. The step counter is global and never resets, preserving
    oscillation phase across windows.
    """

    kind = "LiF"

    def __init__(
        self,
        action_range: ActionRange,
        a0: float = 0.5,
        amplitude: float = 0.05,
        window: int = 50,
        gamma: float = 0.1,
        omega: float = 1.0,
    ):
        super().__init__(action_range)
        if amplitude <= 0 or window < 1 or gamma <= 0 or omega <= 0:
            raise ValueError("amplitude, window, gamma, and omega must be positive")
        self.a0 = a0
        self.amplitude = amplitude
        self.window = window
        self.gamma = gamma
        self.omega = omega
        self.t_local = 0
        self.r_sum = 0.0

    def propose(self, rng):
        # Deliberately unclamped: the oscillation may leave [lo, hi].
        return self.a0 + self.amplitude * math.cos(self.omega * (self.t_local + 1))

    def update(self, action, reward):
        self.t_local += 1
        self.r_sum += reward * math.cos(self.omega * self.t_local)
        if self.t_local % self.window == 0:
            self.a0 += self.gamma * (self.r_sum / self.window)
            self.r_sum = 0.0
        super().update(action, reward)

    def params(self):
        return {
            "a0": self.a0,
            "amplitude": self.amplitude,
            "window": self.window,
            "gamma": self.gamma,
            "omega": self.omega,
        }
