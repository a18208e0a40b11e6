"""
Constant-Velocity Kalman Filter
===============================
Per-object filter on the world-frame state [px, py, pz, vx, vy, vz].
Motion and measurement models are linear; the covariance update uses the
Joseph form and every result is re-symmetrised.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

H = np.hstack([np.eye(3), np.zeros((3, 3))])


class TimeOrderError(ValueError):
    """Raised for a non-positive time step or a non-increasing timestamp."""
    pass


class NumericalError(ArithmeticError):
    """Raised when the innovation covariance cannot be factorised."""
    pass


@dataclass(frozen=True, eq=False)
class TrackState:
    x: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64).reshape(6)
        P = np.asarray(self.P, dtype=np.float64).reshape(6, 6)
        x.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "P", P)

    @property
    def position(self) -> np.ndarray:
        return self.x[:3]

    @property
    def velocity(self) -> np.ndarray:
        return self.x[3:]

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.x[3:]))


def _symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def initial_state(position, pos_std: float, vel_std: float) -> TrackState:
    """New track at position with zero velocity."""
    x = np.concatenate([np.asarray(position, dtype=np.float64).reshape(3), np.zeros(3)])
    P = np.diag([pos_std ** 2] * 3 + [vel_std ** 2] * 3)
    return TrackState(x, P)


def transition_matrix(dt: float) -> np.ndarray:
    F = np.eye(6)
    F[:3, 3:] = dt * np.eye(3)
    return F


def process_noise(dt: float, q_pos: float, q_vel: float) -> np.ndarray:
    return np.diag([q_pos * dt] * 3 + [q_vel * dt] * 3)


def ekf_predict(state: TrackState, dt: float, q_pos: float, q_vel: float) -> TrackState:
    """
    Propagate the state by dt seconds.

    Args:
        state: Current state
        dt: Time step in seconds, must be positive
        q_pos: Position process noise density (m^2/s)
        q_vel: Velocity process noise density (m^2/s^3)

    Returns:
        Predicted state

    Raises:
        TimeOrderError: If dt <= 0
    """
    if not dt > 0:
        raise TimeOrderError(f"prediction step must be positive, got dt={dt}")
    F = transition_matrix(dt)
    x = F @ state.x
    P = F @ state.P @ F.T + process_noise(dt, q_pos, q_vel)
    return TrackState(x, _symmetrize(P))


def ekf_update(state: TrackState, z, r: float) -> TrackState:
    """
    Fuse a world-frame position measurement.

    Args:
        state: Predicted state
        z: Measured position (3,)
        r: Measurement variance per axis (m^2)

    Returns:
        Posterior state

    Raises:
        NumericalError: If the innovation covariance is not positive definite
    """
    z = np.asarray(z, dtype=np.float64).reshape(3)
    R = r * np.eye(3)
    S = state.P[:3, :3] + R
    if not np.all(np.isfinite(S)):
        raise NumericalError("innovation covariance is not finite")
    try:
        factor = cho_factor(S)
    except LinAlgError as e:
        raise NumericalError(f"innovation covariance is not positive definite: {e}")

    PHt = state.P[:, :3]
    K = cho_solve(factor, PHt.T).T
    innovation = z - state.x[:3]
    x = state.x + K @ innovation

    I_KH = np.eye(6) - K @ H
    P = I_KH @ state.P @ I_KH.T + K @ R @ K.T
    return TrackState(x, _symmetrize(P))
