"""Distributed proximity sensing: one reading per mounted sensor."""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .geometry import _hit_from_packed
from .kinematics import check_configuration


@dataclass(frozen=True)
class SensorReading:
    """What sensor k reports: its own position, the nearest obstacle point
    within its field of view (absent otherwise), and whether the virtual
    spring is compressed (d_k <= r_k)."""

    sensor_index: int
    position: np.ndarray
    hit: object = None
    active: bool = False


@dataclass(frozen=True)
class SuppressionRule:
    """Turn a sensor off while it is within ``distance`` of a named obstacle's
    surface (e.g. let the gripper reach a target the skin would avoid)."""

    sensor_index: int
    obstacle_id: str
    distance: float


def _suppression_arrays(scene, rules):
    S = len(rules)
    sensors = np.empty(S, dtype=np.int64)
    targets = np.empty(S, dtype=np.int64)
    dists = np.empty(S)
    for i, rule in enumerate(rules):
        sensors[i] = rule.sensor_index
        targets[i] = scene.index_of(rule.obstacle_id)
        dists[i] = rule.distance
    return sensors, targets, dists


def sense_all(chain, q, scene, t=0.0, rules=()):
    """Readings for every mount on the chain; pure in (q, scene, t)."""
    arr = check_configuration(chain, q)
    origins, rots = K.fk_frames(*chain.arrays(), arr)
    frames, offs, fs, rk, _f = chain.mount_arrays()
    kind, sensed, center, rot, size, wp, wp_off, speed = scene.arrays()
    centers_t = K.moving_centers(center, wp, wp_off, speed, t)
    sup_s, sup_o, sup_d = _suppression_arrays(scene, rules)
    spos, dk, hidx, hpt, hpen = K.sense_arrays(
        origins, rots, kind, sensed, centers_t, rot, size, frames, offs, fs, sup_s, sup_o, sup_d
    )
    readings = []
    for k in range(len(frames)):
        if hidx[k] < 0:
            readings.append(SensorReading(sensor_index=k, position=spos[k]))
            continue
        hit = _hit_from_packed(
            scene.obstacles[hidx[k]].id, spos[k], hpt[k, 0], hpt[k, 1], hpt[k, 2],
            dk[k], hpen[k] == 1,
        )
        readings.append(
            SensorReading(
                sensor_index=k,
                position=spos[k],
                hit=hit,
                active=bool(dk[k] <= rk[k]),
            )
        )
    return readings


def min_distance(readings):
    """d = min_k d_k over present hits; +inf when nothing is in view."""
    d = np.inf
    for r in readings:
        if r.hit is not None and r.hit.distance < d:
            d = r.hit.distance
    return d
