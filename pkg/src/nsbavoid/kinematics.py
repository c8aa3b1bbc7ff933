"""Denavit-Hartenberg chain model, point Jacobians and damped pseudo-inversion.

The chain is described joint by joint with standard DH rows (theta, d, alpha,
a); each joint drives either theta (revolute) or d (prismatic). All lengths
are metres, all angles radians. An optional fixed base pose aligns the DH
base frame with the world the scenarios are written in; the bundled youBot
model uses it so that q1/q2 translate the base along world x/y and the base
revolute joint turns about world z (up).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

REVOLUTE = "revolute"
PRISMATIC = "prismatic"


class ConfigurationSizeError(ValueError):
    """Joint vector length does not match the chain."""


class SingularJacobianError(ValueError):
    """Undamped pseudo-inversion of a rank-deficient Jacobian."""


def _as_vec3(v, name):
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DHJoint:
    """One DH row; ``kind`` selects the driven variable (theta or d)."""

    kind: str
    theta: float
    d: float
    alpha: float
    a: float
    limits: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        if self.kind not in (REVOLUTE, PRISMATIC):
            raise ValueError(f"joint kind must be revolute or prismatic, got {self.kind!r}")
        lo, hi = self.limits
        if not lo <= hi:
            raise ValueError(f"joint limits must satisfy min <= max, got {self.limits}")


@dataclass(frozen=True)
class SensorMount:
    """A proximity sensor rigidly attached to a link.

    ``link_index`` is the 1-based DH frame the sensor rides on (joints
    1..link_index move it); ``offset`` is expressed in that frame. The
    geometry of its virtual spring: detection range ``field_of_view`` (f_s),
    spring rest length ``rest_length`` (r_k) and supervisor threshold
    ``threshold`` (f), constrained to 0 < f < r_k <= f_s. Scenario files
    reproducing published parameter sets that break r_k <= f_s can set
    ``allow_rest_beyond_fov``.
    """

    link_index: int
    offset: tuple
    field_of_view: float
    rest_length: float
    threshold: float
    allow_rest_beyond_fov: bool = False

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(float(v) for v in self.offset))
        if len(self.offset) != 3:
            raise ValueError("sensor offset must be a 3-vector")
        if not 0.0 < self.threshold:
            raise ValueError("sensor threshold must be positive")
        if not self.threshold < self.rest_length:
            raise ValueError(
                f"sensor threshold f={self.threshold} must be strictly below "
                f"rest length r={self.rest_length}"
            )
        if not self.rest_length <= self.field_of_view and not self.allow_rest_beyond_fov:
            raise ValueError(
                f"rest length r={self.rest_length} exceeds field of view "
                f"f_s={self.field_of_view}; set allow_rest_beyond_fov to reproduce "
                "published parameter sets that violate the constraint"
            )
        if self.field_of_view <= 0.0:
            raise ValueError("field of view must be positive")


@dataclass(frozen=True)
class FramePose:
    """Rigid pose: 3x3 rotation plus origin, validated orthonormal."""

    rotation: np.ndarray
    origin: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float)
        org = _as_vec3(self.origin, "origin")
        if rot.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if np.max(np.abs(rot.T @ rot - np.eye(3))) > 1e-10:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-10:
            raise ValueError("rotation determinant must be +1")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "origin", org)

    @staticmethod
    def identity():
        return FramePose(np.eye(3), np.zeros(3))


@dataclass(frozen=True)
class KinematicChain:
    """Ordered DH joints plus the sensor mounts riding on them."""

    joints: tuple
    sensors: tuple = ()
    name: str = ""
    base_pose: FramePose = field(default_factory=FramePose.identity)

    def __post_init__(self):
        joints = tuple(self.joints)
        sensors = tuple(self.sensors)
        if len(joints) < 1:
            raise ValueError("a chain needs at least one joint")
        for mnt in sensors:
            if not 1 <= mnt.link_index <= len(joints):
                raise ValueError(
                    f"sensor link_index {mnt.link_index} outside 1..{len(joints)}"
                )
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "sensors", sensors)
        kinds = np.array(
            [K.PRISMATIC if j.kind == PRISMATIC else K.REVOLUTE for j in joints],
            dtype=np.int64,
        )
        object.__setattr__(self, "_kinds", kinds)
        object.__setattr__(self, "_theta0", np.array([j.theta for j in joints], dtype=float))
        object.__setattr__(self, "_d0", np.array([j.d for j in joints], dtype=float))
        object.__setattr__(self, "_alpha", np.array([j.alpha for j in joints], dtype=float))
        object.__setattr__(self, "_a", np.array([j.a for j in joints], dtype=float))
        lims = np.array([j.limits for j in joints], dtype=float)
        object.__setattr__(self, "_limits", lims)

    @property
    def n(self) -> int:
        return len(self.joints)

    def arrays(self):
        """Packed (kinds, theta0, d0, alpha, a, base_rot, base_pos) for kernels."""
        return (
            self._kinds,
            self._theta0,
            self._d0,
            self._alpha,
            self._a,
            self.base_pose.rotation,
            self.base_pose.origin,
        )

    def mount_arrays(self):
        """Packed sensor mounts: (frames, offsets, f_s, r_k, f)."""
        N = len(self.sensors)
        frames = np.array([m.link_index for m in self.sensors], dtype=np.int64)
        offs = np.array([m.offset for m in self.sensors], dtype=float).reshape(N, 3)
        fs = np.array([m.field_of_view for m in self.sensors], dtype=float)
        rk = np.array([m.rest_length for m in self.sensors], dtype=float)
        f = np.array([m.threshold for m in self.sensors], dtype=float)
        return frames, offs, fs, rk, f


def check_configuration(chain, q):
    """Validate q against the chain; warn and clamp joint-limit violations."""
    arr = np.asarray(q, dtype=float).reshape(-1)
    if arr.shape != (chain.n,):
        raise ConfigurationSizeError(
            f"configuration has {arr.shape[0]} values, chain {chain.name!r} has {chain.n} joints"
        )
    lo = chain._limits[:, 0]
    hi = chain._limits[:, 1]
    if np.any(arr < lo) or np.any(arr > hi):
        bad = np.where((arr < lo) | (arr > hi))[0]
        warnings.warn(
            f"configuration outside joint limits at joints {[int(b) + 1 for b in bad]}; "
            "clamping for kinematics",
            stacklevel=3,
        )
        arr = np.clip(arr, lo, hi)
    return arr


def forward_kinematics(chain, q):
    """Cumulative DH poses, one FramePose per joint frame (world coordinates)."""
    arr = check_configuration(chain, q)
    origins, rots = K.fk_frames(*chain.arrays(), arr)
    return [FramePose(rots[i], origins[i]) for i in range(1, chain.n + 1)]


def point_on_link(chain, q, mount):
    """World position of a mount: p_i(q) + R_i(q) . offset."""
    arr = check_configuration(chain, q)
    origins, rots = K.fk_frames(*chain.arrays(), arr)
    return K.point_on_frame(origins, rots, mount.link_index, np.asarray(mount.offset, dtype=float))


def point_jacobian(chain, q, link_index, point):
    """3xn position Jacobian of a world point rigidly attached to a link.

    Column j is z_{j-1} for prismatic joints and z_{j-1} x (point - p_{j-1})
    for revolute ones, for joints j <= link_index; later columns are zero.
    """
    if not 1 <= link_index <= chain.n:
        raise ValueError(f"link_index {link_index} outside 1..{chain.n}")
    arr = check_configuration(chain, q)
    origins, rots = K.fk_frames(*chain.arrays(), arr)
    return K.point_jacobian(chain._kinds, origins, rots, link_index, _as_vec3(point, "point"))


def damped_pseudo_inverse(J, damping=1e-4):
    """Right pseudo-inverse J^T (J J^T + damping^2 I)^{-1} for m <= n.

    With damping 0 and full row rank this is the exact Moore-Penrose inverse;
    a rank-deficient J J^T with damping 0 raises SingularJacobianError.
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 2:
        raise ValueError("J must be a matrix")
    m, n = J.shape
    if m > n:
        raise ValueError(f"damped_pseudo_inverse expects m <= n, got {m}x{n}")
    if damping < 0.0:
        raise ValueError("damping must be >= 0")
    A = J @ J.T + (damping * damping) * np.eye(m)
    if damping == 0.0 and np.linalg.matrix_rank(A) < m:
        raise SingularJacobianError(
            "J J^T is rank deficient; use a positive damping to invert near singularities"
        )
    return np.linalg.solve(A, J).T


# youBot: 8-dof open chain, two prismatic base joints, base yaw, five arm
# joints. Lengths in metres. The base alignment maps the DH base frame onto
# the scenario world: q1 -> world x, q2 -> world y, yaw about world z.
_YOUBOT_BASE_ROT = np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]])

YOUBOT_DH = (
    (PRISMATIC, 0.0, 0.0, np.pi / 2, 0.0, (-100.0, 100.0)),
    (PRISMATIC, np.pi / 2, 0.0, np.pi / 2, 0.0, (-100.0, 100.0)),
    (REVOLUTE, 0.0, 0.0, 0.0, 0.167, (-4 * np.pi, 4 * np.pi)),
    (REVOLUTE, 0.0, 0.147, np.pi / 2, 0.033, (-2.95, 2.95)),
    (REVOLUTE, 0.0, 0.0, 0.0, 0.155, (-2.25, 2.25)),
    (REVOLUTE, 0.0, 0.0, 0.0, 0.135, (-2.75, 2.75)),
    (REVOLUTE, 0.0, 0.0, np.pi / 2, 0.0, (-2.25, 2.25)),
    (REVOLUTE, 0.0, 0.2175, 0.0, 0.0, (-2.95, 2.95)),
)


def youbot_chain(sensors=(), name="youbot"):
    """The bundled 8-dof mobile manipulator model."""
    joints = tuple(
        DHJoint(kind=k, theta=th, d=d, alpha=al, a=a, limits=lim)
        for (k, th, d, al, a, lim) in YOUBOT_DH
    )
    return KinematicChain(
        joints=joints,
        sensors=tuple(sensors),
        name=name,
        base_pose=FramePose(_YOUBOT_BASE_ROT, np.zeros(3)),
    )
