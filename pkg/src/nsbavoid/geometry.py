"""Obstacle primitives with exact closest-point queries and waypoint motion."""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .kinematics import _as_vec3


def _unit(v, name):
    arr = _as_vec3(v, name)
    n = np.linalg.norm(arr)
    if abs(n - 1.0) > 1e-6:
        raise ValueError(f"{name} must be unit length")
    return arr / n


def _frame_from_axis(axis):
    """Right-handed orthonormal frame whose third column is axis."""
    z = axis
    ref = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = np.cross(ref, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center, "center"))
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be positive")

    def _packed(self):
        return K.SPHERE, self.center, np.eye(3), np.array([self.radius, 0.0, 0.0])


@dataclass(frozen=True)
class Box:
    center: np.ndarray
    half_extents: np.ndarray
    orientation: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center, "center"))
        he = _as_vec3(self.half_extents, "half_extents")
        if np.any(he <= 0.0):
            raise ValueError("box half extents must be positive")
        object.__setattr__(self, "half_extents", he)
        rot = np.eye(3) if self.orientation is None else np.asarray(self.orientation, dtype=float)
        if rot.shape != (3, 3) or np.max(np.abs(rot.T @ rot - np.eye(3))) > 1e-8:
            raise ValueError("box orientation must be an orthonormal 3x3 matrix")
        object.__setattr__(self, "orientation", rot)

    def _packed(self):
        return K.BOX, self.center, self.orientation, self.half_extents


@dataclass(frozen=True)
class Cylinder:
    center: np.ndarray
    axis: np.ndarray
    radius: float
    half_height: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center, "center"))
        object.__setattr__(self, "axis", _unit(self.axis, "axis"))
        if self.radius <= 0.0 or self.half_height <= 0.0:
            raise ValueError("cylinder radius and half height must be positive")

    def _packed(self):
        return (
            K.CYLINDER,
            self.center,
            _frame_from_axis(self.axis),
            np.array([self.radius, self.half_height, 0.0]),
        )


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear centre motion at constant speed; holds at the ends."""

    waypoints: np.ndarray
    speed: float

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=float).reshape(-1, 3)
        if wp.shape[0] < 1:
            raise ValueError("a trajectory needs at least one waypoint")
        if self.speed <= 0.0:
            raise ValueError("trajectory speed must be positive")
        object.__setattr__(self, "waypoints", wp)


@dataclass(frozen=True)
class Obstacle:
    """Scene object; ``sensed`` False marks a pure reference object (e.g. a
    grasp target) that proximity sensors ignore but suppression rules and
    metrics may still address by id."""

    shape: object
    motion: Trajectory = None
    id: str = ""
    sensed: bool = True


@dataclass(frozen=True)
class ProximityHit:
    """Closest obstacle surface point for a query.

    ``direction`` is the unit vector from the query point toward ``point``;
    for a query on or inside the surface ``distance`` clamps to 0 and
    ``penetration`` is set.
    """

    obstacle_id: str
    point: np.ndarray
    distance: float
    direction: np.ndarray
    penetration: bool = False


class Scene:
    """Immutable collection of obstacles with unique ids."""

    def __init__(self, obstacles=()):
        obstacles = tuple(obstacles)
        ids = [o.id for o in obstacles]
        if len(set(ids)) != len(ids):
            raise ValueError(f"obstacle ids must be unique, got {ids}")
        self.obstacles = obstacles
        m = len(obstacles)
        kind = np.empty(m, dtype=np.int64)
        sensed = np.array([1 if o.sensed else 0 for o in obstacles], dtype=np.int64)
        center = np.zeros((m, 3))
        rot = np.zeros((m, 3, 3))
        size = np.zeros((m, 3))
        wps = []
        wp_off = np.zeros(m + 1, dtype=np.int64)
        speed = np.zeros(m)
        for i, obs in enumerate(obstacles):
            kind[i], center[i], rot[i], size[i] = obs.shape._packed()
            if obs.motion is not None:
                wps.append(obs.motion.waypoints)
                speed[i] = obs.motion.speed
            wp_off[i + 1] = wp_off[i] + (0 if obs.motion is None else len(obs.motion.waypoints))
        wp = np.concatenate(wps, axis=0) if wps else np.zeros((0, 3))
        self._arrays = (kind, sensed, center, rot, size, wp, wp_off, speed)

    def __len__(self):
        return len(self.obstacles)

    def arrays(self):
        return self._arrays

    def index_of(self, obstacle_id):
        for i, obs in enumerate(self.obstacles):
            if obs.id == obstacle_id:
                return i
        raise KeyError(f"no obstacle with id {obstacle_id!r}")


def _hit_from_packed(obstacle_id, query, px, py, pz, dist, pen):
    point = np.array([px, py, pz])
    delta = point - query
    nrm = np.linalg.norm(delta)
    if nrm > 1e-12:
        direction = delta / nrm
    else:
        # query sitting on the surface: no defined approach direction
        direction = np.zeros(3)
    return ProximityHit(
        obstacle_id=obstacle_id,
        point=point,
        distance=float(dist),
        direction=direction,
        penetration=bool(pen) or nrm <= 1e-12,
    )


def closest_point(obstacle, query, t=0.0):
    """Exact closest surface point of one obstacle at time t."""
    if not isinstance(obstacle, Obstacle):
        obstacle = Obstacle(shape=obstacle)
    query = _as_vec3(query, "query")
    kind, center, rot, size = obstacle.shape._packed()
    if obstacle.motion is not None:
        wp = obstacle.motion.waypoints
        off = np.array([0, len(wp)], dtype=np.int64)
        center = K.obstacle_center_at(
            center.reshape(1, 3), 0, wp, off, np.array([obstacle.motion.speed]), t
        )
    px, py, pz, dist, pen = K.shape_closest(kind, center, rot, size, query)
    return _hit_from_packed(obstacle.id, query, px, py, pz, dist, pen)


def scene_nearest(scene, query, t=0.0, max_range=np.inf):
    """Minimum-distance hit over the scene, or None beyond max_range."""
    if max_range <= 0.0:
        raise ValueError("max_range must be positive")
    query = _as_vec3(query, "query")
    kind, sensed, center, rot, size, wp, wp_off, speed = scene.arrays()
    if len(scene) == 0:
        return None
    centers_t = K.moving_centers(center, wp, wp_off, speed, t)
    idx, dist, px, py, pz, pen = K.scene_nearest_idx(kind, sensed, centers_t, rot, size, query)
    if idx < 0 or dist > max_range:
        return None
    return _hit_from_packed(scene.obstacles[idx].id, query, px, py, pz, dist, pen)
