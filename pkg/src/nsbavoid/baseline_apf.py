"""Velocity-level artificial-potential baseline for A/B comparison.

Classic reactive scheme: every control point feels a repulsion gradient
eta (1/rho - 1/rho_0) / rho^2 inside the influence distance rho_0, the task
point feels the attraction -k_p (x - x_d), and everything maps to joint
velocities through Jacobian transposes. The control points reuse the
avoidance controller's sensor mounts so both methods perceive the same
geometry.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .controller import ControlTick, _task_for
from .kinematics import check_configuration
from .sensing import _suppression_arrays


@dataclass(frozen=True)
class ApfGains:
    eta: float
    rho_0: float
    k_p: float
    control_points: tuple = None  # (link_index, offset) pairs; sensor mounts when None
    force_cap: float = 1e3

    def __post_init__(self):
        if self.eta <= 0.0 or self.rho_0 <= 0.0 or self.k_p <= 0.0:
            raise ValueError("APF gains must be positive")
        if self.force_cap <= 0.0:
            raise ValueError("force cap must be positive")


def repulsive_gradient(rho, rho_0, eta, direction, cap=1e3):
    """Repulsion (negative potential gradient) at distance rho.

    ``direction`` is d rho / d x, the unit vector along increasing distance;
    zero outside rho_0, magnitude capped as rho -> 0 where the potential
    diverges.
    """
    if rho < 0.0:
        raise ValueError("rho must be >= 0")
    direction = np.asarray(direction, dtype=float)
    if rho > rho_0:
        return np.zeros(3)
    if rho > 0.0:
        mag = min(eta * (1.0 / rho - 1.0 / rho_0) / (rho * rho), cap)
    else:
        mag = cap
    return mag * direction


def _point_arrays(chain, gains):
    if gains.control_points is None:
        frames, offs, fs, rk, _f = chain.mount_arrays()
        return frames, offs, fs, rk
    P = len(gains.control_points)
    frames = np.array([p[0] for p in gains.control_points], dtype=np.int64)
    offs = np.array([p[1] for p in gains.control_points], dtype=float).reshape(P, 3)
    # bare control points are not sensors: unlimited view, no spring
    return frames, offs, np.full(P, np.inf), np.zeros(P)


def apf_step(chain, q, scene, t, target, gains, task=None, rules=(), prev_d_min=np.inf):
    """Controller-compatible step for the baseline (same ControlTick shape).

    sigma is logged with the spring bookkeeping of the main controller so the
    two methods plot on one axis; lam records whether any repulsion is active.
    """
    arr = check_configuration(chain, q)
    frames, offs, fs, rk = _point_arrays(chain, gains)
    kind, sensed, center, rot, size, wp, wp_off, speed = scene.arrays()
    sup_s, sup_o, sup_d = _suppression_arrays(scene, rules)
    task_frame, task_off = _task_for(chain, task)
    x_d = np.asarray(target[0], dtype=float)
    qdot, sig, lam, dmin, x, dk = K.apf_step(
        *chain.arrays(), arr,
        kind, sensed, center, rot, size, wp, wp_off, speed, t,
        frames, offs, fs, rk,
        sup_s, sup_o, sup_d,
        task_frame, task_off, x_d,
        gains.eta, gains.rho_0, gains.k_p, gains.force_cap,
    )
    return ControlTick(
        sigma=float(sig),
        lam=float(lam),
        d_min=float(dmin),
        qdot_goal=qdot,
        qdot_avoid=qdot,
        qdot=qdot,
        x_err=float(np.linalg.norm(x_d - x)),
        e0_flag=bool(dmin <= gains.rho_0) and not bool(prev_d_min <= gains.rho_0),
    )


def apf_velocity(chain, q, scene, t, target, gains, task=None, rules=()):
    """Joint velocity of the baseline: sum of J_i^T repulsions plus the
    attraction mapped through the task-point Jacobian transpose."""
    return apf_step(chain, q, scene, t, target, gains, task=task, rules=rules).qdot
