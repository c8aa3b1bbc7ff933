"""Behavioural obstacle avoidance for a redundant mobile manipulator.

Distributed proximity sensors wrap the robot in virtual springs; the
controller descends the total elastic pseudo-energy through its analytic
configuration-space gradient, keeps the goal task alive in the gradient's
null space, and blends both behaviours with a smooth task-combination
supervisor. A batch simulator replays the bundled case-study scenarios at
the velocity level.
"""

from ._accel import NUMBA_ENABLED
from .baseline_apf import ApfGains, apf_step, apf_velocity, repulsive_gradient
from .controller import (
    Arctan,
    ControllerGains,
    ControlTick,
    Crisp,
    PiecewiseLinear,
    TaskPoint,
    control_step,
    goal_velocity,
    jacobian_obstacle,
    lambda_arctan,
    lambda_crisp,
    lambda_piecewise,
    null_space_project,
    pseudo_energy,
    sigma,
)
from .geometry import (
    Box,
    Cylinder,
    Obstacle,
    ProximityHit,
    Scene,
    Sphere,
    Trajectory,
    closest_point,
    scene_nearest,
)
from .kinematics import (
    ConfigurationSizeError,
    DHJoint,
    FramePose,
    KinematicChain,
    SensorMount,
    SingularJacobianError,
    damped_pseudo_inverse,
    forward_kinematics,
    point_jacobian,
    point_on_link,
    youbot_chain,
)
from .scenario_io import ScenarioFormatError, bundled_scenarios, load_scenario
from .sensing import SensorReading, SuppressionRule, min_distance, sense_all
from .simulator import (
    BodyEnvelope,
    NonFiniteStateError,
    ReferencePath,
    Scenario,
    SecondRobot,
    TrajectoryLog,
    metrics,
    run,
    sample_path,
)

__version__ = "0.1.0"
