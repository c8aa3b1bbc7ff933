"""Avoidance controller: elastic pseudo-energy task, its analytic gradient,
goal CLIK task, and the smooth task-combination supervisor.

Each compressed virtual spring stores energy 0.5 (d_k - r_k)^2; the avoidance
task regulates the total to zero along its configuration gradient while the
goal task is projected into the gradient's null space. A supervisor weight
lambda(d) in [0, 1] blends that composition with plain goal tracking as a
convex combination, so no task switch is ever discontinuous (the crisp
supervisor is kept only to reproduce the chattering it causes).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .kinematics import check_configuration, damped_pseudo_inverse, point_jacobian
from .sensing import _suppression_arrays, min_distance

DEFAULT_DAMPING = 1e-4


@dataclass(frozen=True)
class Arctan:
    """lambda(d) = arctan(-K (d - f)) / pi + 1/2; K sets the slope."""

    K: float

    def __post_init__(self):
        if self.K <= 0.0:
            raise ValueError("arctan supervisor gain K must be positive")

    def _code(self):
        return K.SUP_ARCTAN, self.K


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear ramp from 1 to 0 across [f - eps, f + eps]."""

    eps: float

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("piecewise supervisor eps must be positive")

    def _code(self):
        return K.SUP_PIECEWISE, self.eps


@dataclass(frozen=True)
class Crisp:
    """Discrete switch (lambda in {0, 1}); kept for the chattering comparison."""

    def _code(self):
        return K.SUP_CRISP, 0.0


@dataclass(frozen=True)
class ControllerGains:
    gamma_o: float
    gamma_g: float
    supervisor: object
    t_s: float
    damping: float = DEFAULT_DAMPING
    qdot_cap: object = None  # scalar, per-joint array, or None

    def __post_init__(self):
        if self.gamma_o <= 0.0 or self.gamma_g <= 0.0:
            raise ValueError("CLIK gains must be positive")
        if self.t_s <= 0.0:
            raise ValueError("sampling time must be positive")

    def cap_array(self, n):
        if self.qdot_cap is None:
            return np.zeros(n)
        cap = np.asarray(self.qdot_cap, dtype=float)
        if cap.ndim == 0:
            cap = np.full(n, float(cap))
        if cap.shape != (n,):
            raise ValueError(f"qdot_cap must be scalar or length {n}")
        return cap


@dataclass(frozen=True)
class TaskPoint:
    """The body point the goal task drives (1-based frame + local offset)."""

    link_index: int
    offset: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ControlTick:
    """Per-tick controller diagnostics."""

    sigma: float
    lam: float
    d_min: float
    qdot_goal: np.ndarray
    qdot_avoid: np.ndarray
    qdot: np.ndarray
    x_err: float
    e0_flag: bool


def pseudo_energy(d_k, r_k):
    """Elastic energy of one spring: 0.5 (d_k - r_k)^2 while compressed."""
    if d_k < 0.0:
        raise ValueError("distance must be >= 0")
    if r_k <= 0.0:
        raise ValueError("rest length must be positive")
    if d_k > r_k:
        return 0.0
    e = d_k - r_k
    return 0.5 * e * e


def sigma(readings, mounts):
    """Total pseudo-energy over the present hits."""
    total = 0.0
    for reading, mount in zip(readings, mounts):
        if reading.hit is not None:
            total += pseudo_energy(reading.hit.distance, mount.rest_length)
    return total


def jacobian_obstacle(chain, q, readings):
    """Configuration gradient of sigma as a 1xn row.

    Each compressed sensor contributes -(d_k - r_k) v_k^T J_k with v_k the
    unit vector from the sensor point toward its obstacle point and J_k the
    sensor-point Jacobian; sensors outside their rest length contribute
    nothing, so the row is zero when no sensor is active.
    """
    jo = np.zeros((1, chain.n))
    for reading, mount in zip(readings, chain.sensors):
        if reading.hit is None or reading.hit.distance > mount.rest_length:
            continue
        v = reading.hit.direction
        if reading.hit.penetration:
            # inside an obstacle the gradient must keep pointing the sensor
            # back toward the surface
            v = -v
        if not np.any(v):
            continue
        Js = point_jacobian(chain, q, mount.link_index, reading.position)
        jo[0] += -(reading.hit.distance - mount.rest_length) * (v @ Js)
    return jo


def lambda_arctan(d, f, K_gain):
    """Smooth supervisor weight; exactly 0.5 at d = f, limits 1 and 0."""
    return K.lambda_value(K.SUP_ARCTAN, d, f, K_gain)


def lambda_piecewise(d, f, eps):
    """Linear supervisor weight: 1 below f - eps, 0 above f + eps."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return K.lambda_value(K.SUP_PIECEWISE, d, f, eps)


def lambda_crisp(d, f):
    """Discrete supervisor: full avoidance at or below the threshold."""
    return K.lambda_value(K.SUP_CRISP, d, f, 0.0)


def goal_velocity(J_g, x, x_d, xdot_d, gamma_g, damping=DEFAULT_DAMPING):
    """CLIK reference for the goal task: J_g^+ (xdot_d + gamma_g (x_d - x))."""
    J_g = np.asarray(J_g, dtype=float)
    err = np.asarray(x_d, dtype=float) - np.asarray(x, dtype=float)
    return damped_pseudo_inverse(J_g, damping) @ (np.asarray(xdot_d, dtype=float) + gamma_g * err)


def null_space_project(J_o, v):
    """Project v into the null space of the 1xn row J_o (exact, undamped)."""
    jo = np.asarray(J_o, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float)
    n2 = jo @ jo
    if n2 <= 0.0:
        return v.copy()
    return v - jo * ((jo @ v) / n2)


def _task_for(chain, task):
    if task is None:
        task = TaskPoint(link_index=chain.n)
    return np.int64(task.link_index), np.asarray(task.offset, dtype=float)


def control_step(chain, q, scene, t, target, gains, task=None, rules=(), prev_d_min=np.inf):
    """One controller tick: the commanded velocity and its diagnostics.

    ``target`` is the (x_d, xdot_d) pair from the planner; ``task`` names the
    driven body point (end effector by default). ``prev_d_min`` lets the
    caller track activation: e0_flag marks the tick on which the minimum
    sensed distance first crosses the supervisor threshold.
    """
    arr = check_configuration(chain, q)
    frames, offs, fs, rk, f = chain.mount_arrays()
    kind, sensed, center, rot, size, wp, wp_off, speed = scene.arrays()
    sup_s, sup_o, sup_d = _suppression_arrays(scene, rules)
    task_frame, task_off = _task_for(chain, task)
    x_d = np.asarray(target[0], dtype=float)
    xd_dot = np.asarray(target[1], dtype=float)
    sup_kind, sup_param = gains.supervisor._code()
    qdot, qdot_g, qdot_av, sig, lam, dmin, f_sel, x, dk = K.nsb_step(
        *chain.arrays(), arr,
        kind, sensed, center, rot, size, wp, wp_off, speed, t,
        frames, offs, fs, rk, f,
        sup_s, sup_o, sup_d,
        task_frame, task_off, x_d, xd_dot,
        gains.gamma_o, gains.gamma_g, gains.damping,
        sup_kind, sup_param, gains.cap_array(chain.n),
    )
    e0 = bool(dmin <= f_sel) and not bool(prev_d_min <= f_sel)
    return ControlTick(
        sigma=float(sig),
        lam=float(lam),
        d_min=float(dmin),
        qdot_goal=qdot_g,
        qdot_avoid=qdot_av,
        qdot=qdot,
        x_err=float(np.linalg.norm(x_d - x)),
        e0_flag=e0,
    )
