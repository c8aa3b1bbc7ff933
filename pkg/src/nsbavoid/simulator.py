"""Velocity-level scenario execution: reference paths, explicit-Euler
integration of the commanded joint velocity, logging and run metrics."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .controller import TaskPoint, _task_for
from .kinematics import check_configuration


@dataclass(frozen=True)
class ReferencePath:
    """Piecewise-linear reference at constant speed, or a held fixed point
    (speed None, single waypoint). The feedforward velocity is zero at and
    beyond the final waypoint."""

    waypoints: np.ndarray
    speed: float = None

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=float).reshape(-1, 3)
        if wp.shape[0] < 1:
            raise ValueError("a path needs at least one waypoint")
        if self.speed is None:
            if wp.shape[0] != 1:
                raise ValueError("hold mode takes exactly one waypoint")
        elif self.speed <= 0.0:
            raise ValueError("path speed must be positive")
        object.__setattr__(self, "waypoints", wp)

    @staticmethod
    def hold(point):
        return ReferencePath(waypoints=np.asarray(point, dtype=float).reshape(1, 3))

    def arrays(self):
        wp = self.waypoints
        seg = np.linalg.norm(np.diff(wp, axis=0), axis=1) if len(wp) > 1 else np.zeros(0)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        hold = 1 if self.speed is None else 0
        return wp, cum, (0.0 if self.speed is None else float(self.speed)), np.int64(hold)


def sample_path(path, t):
    """(x_d, xdot_d) at time t >= 0."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    return K.path_sample(*path.arrays(), t)


@dataclass(frozen=True)
class BodyEnvelope:
    """Bounding cylinder another robot perceives this robot as (vertical
    axis through a body point)."""

    link_index: int = 2
    offset: tuple = (0.0, 0.0, 0.15)
    radius: float = 0.5
    half_height: float = 0.3


@dataclass(frozen=True)
class SecondRobot:
    """Lockstep partner for the two-robot scenario: same chain and gains,
    its own path and start; each robot senses the other as a moving
    envelope cylinder."""

    path: ReferencePath
    initial_q: np.ndarray
    task: TaskPoint = None
    envelope: BodyEnvelope = field(default_factory=BodyEnvelope)

    def __post_init__(self):
        object.__setattr__(self, "initial_q", np.asarray(self.initial_q, dtype=float))


@dataclass(frozen=True)
class Scenario:
    chain: object
    scene: object
    path: ReferencePath
    gains: object
    duration: float
    initial_q: np.ndarray
    controller: str = "nsb"
    apf_gains: object = None
    task: TaskPoint = None
    rules: tuple = ()
    second_robot: SecondRobot = None
    name: str = ""

    def __post_init__(self):
        if self.duration < 0.0:
            raise ValueError("duration must be >= 0")
        if self.controller not in ("nsb", "apf"):
            raise ValueError(f"unknown controller {self.controller!r}")
        if self.controller == "apf" and self.apf_gains is None:
            raise ValueError("controller 'apf' needs apf_gains")
        q0 = np.asarray(self.initial_q, dtype=float)
        if q0.shape != (self.chain.n,):
            raise ValueError(
                f"initial_q has {q0.shape[0] if q0.ndim else 0} values, chain has {self.chain.n} joints"
            )
        object.__setattr__(self, "initial_q", q0)


class NonFiniteStateError(RuntimeError):
    """The integration produced a non-finite velocity or state."""

    def __init__(self, tick, t, detail=""):
        self.tick = tick
        self.t = t
        super().__init__(
            f"non-finite controller state at tick {tick} (t = {t:.6g} s)"
            + (f": {detail}" if detail else "")
        )


class TrajectoryLog:
    """Dense per-tick table. Column order: t, q (n), x (3), x_d (3), sigma,
    lambda, d_min, qdot (n), per-sensor d_k (N)."""

    def __init__(self, data, n, nsensors, t_s):
        self.data = data
        self.n = n
        self.nsensors = nsensors
        self.t_s = t_s
        self.partner = None  # second robot's log in two-robot scenarios

    @property
    def t(self):
        return self.data[:, 0]

    @property
    def q(self):
        return self.data[:, 1 : 1 + self.n]

    @property
    def x(self):
        return self.data[:, self.n + 1 : self.n + 4]

    @property
    def x_d(self):
        return self.data[:, self.n + 4 : self.n + 7]

    @property
    def sigma(self):
        return self.data[:, self.n + 7]

    @property
    def lam(self):
        return self.data[:, self.n + 8]

    @property
    def d_min(self):
        return self.data[:, self.n + 9]

    @property
    def qdot(self):
        return self.data[:, self.n + 10 : 2 * self.n + 10]

    @property
    def d_k(self):
        return self.data[:, 2 * self.n + 10 :]

    def header(self):
        cols = ["t"]
        cols += [f"q{i+1}" for i in range(self.n)]
        cols += ["x", "y", "z", "xd", "yd", "zd", "sigma", "lambda", "d_min"]
        cols += [f"qd{i+1}" for i in range(self.n)]
        cols += [f"d{k+1}" for k in range(self.nsensors)]
        return cols

    def to_csv(self, path):
        """Write the table with 9-significant-digit floats."""
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(self.header()) + "\n")
            for row in self.data:
                fh.write(",".join("%.9g" % v for v in row) + "\n")


def _num_ticks(duration, t_s):
    return int(np.ceil(duration / t_s - 1e-9)) if duration > 0 else 0


def _controller_arrays(scenario):
    gains = scenario.gains
    if scenario.controller == "nsb":
        sup_kind, sup_param = gains.supervisor._code()
        return (
            K.CTRL_NSB,
            gains.gamma_o,
            gains.gamma_g,
            gains.damping,
            sup_kind,
            sup_param,
            gains.cap_array(scenario.chain.n),
            0.0, 0.0, 0.0, 0.0,
        )
    apf = scenario.apf_gains
    return (
        K.CTRL_APF,
        0.0, 0.0, 0.0, 0, 0.0,
        np.zeros(scenario.chain.n),
        apf.eta, apf.rho_0, apf.k_p, apf.force_cap,
    )


def _check_limit_warnings(chain, log):
    lo = chain._limits[:, 0]
    hi = chain._limits[:, 1]
    if np.any(log.q < lo) or np.any(log.q > hi):
        warnings.warn(
            f"trajectory leaves the joint limits of chain {chain.name!r}", stacklevel=3
        )


def run(scenario):
    """Deterministic rollout of a scenario; raises NonFiniteStateError with
    the offending tick if the commanded velocity blows up."""
    from .sensing import _suppression_arrays

    chain = scenario.chain
    n = chain.n
    q0 = check_configuration(chain, scenario.initial_q)
    nticks = _num_ticks(scenario.duration, scenario.gains.t_s)
    frames, offs, fs, rk, f = chain.mount_arrays()
    N = len(frames)
    sup_s, sup_o, sup_d = _suppression_arrays(scenario.scene, scenario.rules)
    task_frame, task_off = _task_for(chain, scenario.task)
    ctrl = _controller_arrays(scenario)

    if scenario.second_robot is None:
        kind, sensed, center, rot, size, wp, wp_off, speed = scenario.scene.arrays()
        log = np.empty((nticks + 1, K.log_width(n, N)))
        status, bad = K.simulate(
            *chain.arrays(), q0, nticks, scenario.gains.t_s,
            kind, sensed, center, rot, size, wp, wp_off, speed,
            frames, offs, fs, rk, f,
            sup_s, sup_o, sup_d,
            task_frame, task_off,
            *scenario.path.arrays(),
            *ctrl,
            log,
        )
        if status != 0:
            raise NonFiniteStateError(bad, bad * scenario.gains.t_s)
        out = TrajectoryLog(log, n, N, scenario.gains.t_s)
        _check_limit_warnings(chain, out)
        return out
    return _run_pair(scenario, q0, nticks, ctrl)


def _augmented_scene(scene, envelope):
    """Scene arrays extended with a placeholder partner cylinder (index -1)."""
    kind, sensed, center, rot, size, wp, wp_off, speed = scene.arrays()
    kind = np.concatenate([kind, [K.CYLINDER]]).astype(np.int64)
    sensed = np.concatenate([sensed, [1]]).astype(np.int64)
    center = np.concatenate([center, np.zeros((1, 3))])
    rot = np.concatenate([rot, np.eye(3)[None]])
    size = np.concatenate([size, [[envelope.radius, envelope.half_height, 0.0]]])
    wp_off = np.concatenate([wp_off, [wp_off[-1]]]).astype(np.int64)
    speed = np.concatenate([speed, [0.0]])
    return kind, sensed, center, rot, size, wp, wp_off, speed


def _run_pair(scenario, q0, nticks, ctrl):
    """Lockstep two-robot run: both step on each other's tick-start pose."""
    from .sensing import _suppression_arrays

    chain = scenario.chain
    n = chain.n
    second = scenario.second_robot
    env = second.envelope
    ts = scenario.gains.t_s
    frames, offs, fs, rk, f = chain.mount_arrays()
    N = len(frames)
    sup_s, sup_o, sup_d = _suppression_arrays(scenario.scene, scenario.rules)
    chain_arrays = chain.arrays()
    env_off = np.asarray(env.offset, dtype=float)

    if ctrl[0] != K.CTRL_NSB:
        raise ValueError("two-robot scenarios support the nsb controller only")
    (_, gamma_o, gamma_g, damping, sup_kind, sup_param, cap, *_rest) = ctrl

    scenes = [_augmented_scene(scenario.scene, env) for _ in range(2)]
    paths = [scenario.path.arrays(), second.path.arrays()]
    tasks = [_task_for(chain, scenario.task), _task_for(chain, second.task)]
    qs = [q0.copy(), check_configuration(chain, second.initial_q).copy()]
    logs = [np.empty((nticks + 1, K.log_width(n, N))) for _ in range(2)]

    for i in range(nticks + 1):
        t = i * ts
        # each robot is seen by the other as a cylinder at its tick-start pose
        centers = []
        for r in range(2):
            origins, rots = K.fk_frames(*chain_arrays, qs[r])
            centers.append(K.point_on_frame(origins, rots, env.link_index, env_off))
        qdots = []
        for r in range(2):
            kind, sensed, center, rot, size, wp, wp_off, speed = scenes[r]
            center[-1] = centers[1 - r]
            x_d, xd_dot = K.path_sample(*paths[r], t)
            qdot, qg, qa, sig, lam, dmin, fsel, x, dk = K.nsb_step(
                *chain_arrays, qs[r],
                kind, sensed, center, rot, size, wp, wp_off, speed, t,
                frames, offs, fs, rk, f,
                sup_s, sup_o, sup_d,
                tasks[r][0], tasks[r][1], x_d, xd_dot,
                gamma_o, gamma_g, damping, sup_kind, sup_param, cap,
            )
            if not (np.all(np.isfinite(qdot)) and np.isfinite(sig)):
                raise NonFiniteStateError(i, t, f"robot {r + 1}")
            row = logs[r][i]
            row[0] = t
            row[1 : 1 + n] = qs[r]
            row[n + 1 : n + 4] = x
            row[n + 4 : n + 7] = x_d
            row[n + 7] = sig
            row[n + 8] = lam
            row[n + 9] = dmin
            row[n + 10 : 2 * n + 10] = qdot
            row[2 * n + 10 :] = dk
            qdots.append(qdot)
        if i < nticks:
            for r in range(2):
                qs[r] = qs[r] + ts * qdots[r]

    out = TrajectoryLog(logs[0], n, N, ts)
    out.partner = TrajectoryLog(logs[1], n, N, ts)
    _check_limit_warnings(chain, out)
    _check_limit_warnings(chain, out.partner)
    return out


def _polyline_deviation(points, waypoints):
    """Distance from each point to the reference polyline (or point)."""
    pts = np.asarray(points, dtype=float)
    wp = np.asarray(waypoints, dtype=float)
    if wp.shape[0] == 1:
        return np.linalg.norm(pts - wp[0], axis=1)
    best = np.full(len(pts), np.inf)
    for a, b in zip(wp[:-1], wp[1:]):
        ab = b - a
        L2 = ab @ ab
        if L2 <= 0.0:
            d = np.linalg.norm(pts - a, axis=1)
        else:
            u = np.clip((pts - a) @ ab / L2, 0.0, 1.0)
            d = np.linalg.norm(pts - (a + u[:, None] * ab), axis=1)
        best = np.minimum(best, d)
    return best


def metrics(log, scenario, path_tol=0.05):
    """Scalar run metrics.

    min_clearance: smallest sensed obstacle distance over the run (inf when
    nothing entered any field of view); max_path_deviation / return_time:
    geometric distance of the task point from the reference polyline and the
    last time it exceeded path_tol; chattering: total variation of the
    commanded velocity; final_goal_error: tracking error on the last tick.
    Per-obstacle sensor clearances are reported under per_obstacle_clearance.
    """
    from .sensing import _suppression_arrays

    dk = log.d_k
    min_clearance = float(dk.min()) if dk.size else float("inf")
    dev = _polyline_deviation(log.x, scenario.path.waypoints)
    over = np.nonzero(dev > path_tol)[0]
    return_time = float(log.t[over[-1]]) if len(over) else 0.0
    dq = np.diff(log.qdot, axis=0)
    chattering = float(np.sum(np.linalg.norm(dq, axis=1))) if len(dq) else 0.0
    final_goal_error = float(np.linalg.norm(log.x_d[-1] - log.x[-1]))

    per_obstacle = {}
    if len(scenario.scene):
        chain = scenario.chain
        frames, offs, _fs, _rk, _f = chain.mount_arrays()
        sup_s, sup_o, sup_d = _suppression_arrays(scenario.scene, scenario.rules)
        kind, sensed, center, rot, size, wp, wp_off, speed = scenario.scene.arrays()
        table = K.clearance_table(
            *chain.arrays(), np.ascontiguousarray(log.q), np.ascontiguousarray(log.t),
            kind, center, rot, size, wp, wp_off, speed,
            frames, offs, sup_s, sup_o, sup_d,
        )
        for i, obs in enumerate(scenario.scene.obstacles):
            per_obstacle[obs.id or f"obstacle{i}"] = float(table[:, i].min())

    return {
        "min_clearance": min_clearance,
        "max_path_deviation": float(dev.max()),
        "return_time": return_time,
        "chattering": chattering,
        "final_goal_error": final_goal_error,
        "per_obstacle_clearance": per_obstacle,
    }
