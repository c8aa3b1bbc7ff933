"""Scenario files: JSON schema validation and construction.

A scenario is one JSON document (see schema/scenario.schema.json, shipped
with the package); unknown keys are rejected. The five bundled case studies
live under scenarios/ and can be addressed by bare name from the CLI.
"""

import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .baseline_apf import ApfGains
from .controller import Arctan, ControllerGains, Crisp, PiecewiseLinear, TaskPoint
from .geometry import Box, Cylinder, Obstacle, Scene, Sphere, Trajectory
from .kinematics import DHJoint, FramePose, KinematicChain, SensorMount, youbot_chain
from .sensing import SuppressionRule
from .simulator import BodyEnvelope, ReferencePath, Scenario, SecondRobot

# fallback supervisor parameters when a CLI override switches the type and
# the file carries no parameter for it
DEFAULT_ARCTAN_K = 100.0
DEFAULT_PIECEWISE_EPS = 0.05


class ScenarioFormatError(ValueError):
    """Scenario file rejected; ``where`` is the offending field path."""

    def __init__(self, message, where="$"):
        self.where = where
        super().__init__(f"{where}: {message}")


def _schema():
    with resources.files("nsbavoid").joinpath("schema/scenario.schema.json").open() as fh:
        return json.load(fh)


def bundled_scenarios():
    """Names of the scenario files shipped with the package."""
    root = resources.files("nsbavoid").joinpath("scenarios")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario_path(spec):
    """Accept a filesystem path or the bare name of a bundled scenario."""
    p = Path(spec)
    if p.exists():
        return p
    candidate = resources.files("nsbavoid").joinpath(f"scenarios/{spec}.json")
    if candidate.is_file():
        return Path(str(candidate))
    raise FileNotFoundError(f"no scenario file {spec!r} (and no bundled scenario of that name)")


def validate_document(doc):
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=jsonschema.exceptions.relevance)
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise ScenarioFormatError(best.message, best.json_path)


def _build_chain(doc, mounts):
    spec = doc["chain"]
    if spec == "youbot":
        return youbot_chain(sensors=mounts)
    joints = tuple(
        DHJoint(
            kind=j["kind"],
            theta=j["theta"],
            d=j["d"],
            alpha=j["alpha"],
            a=j["a"],
            limits=tuple(j.get("limits", (-np.inf, np.inf))),
        )
        for j in spec["joints"]
    )
    base = FramePose.identity()
    if "base" in spec:
        base = FramePose(
            np.asarray(spec["base"].get("rotation", np.eye(3)), dtype=float),
            np.asarray(spec["base"].get("origin", np.zeros(3)), dtype=float),
        )
    return KinematicChain(
        joints=joints,
        sensors=mounts,
        name=spec.get("name", "custom"),
        base_pose=base,
    )


def _build_mounts(doc):
    allow = doc.get("overrides", {}).get("allow_rest_length_beyond_fov", False)
    return tuple(
        SensorMount(
            link_index=m["link_index"],
            offset=tuple(m["offset"]),
            field_of_view=m["field_of_view"],
            rest_length=m["rest_length"],
            threshold=m["threshold"],
            allow_rest_beyond_fov=allow,
        )
        for m in doc["sensors"]["mounts"]
    )


def _build_shape(spec):
    if spec["type"] == "sphere":
        return Sphere(center=spec["center"], radius=spec["radius"])
    if spec["type"] == "box":
        yaw = np.deg2rad(spec.get("yaw_deg", 0.0))
        c, s = np.cos(yaw), np.sin(yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return Box(center=spec["center"], half_extents=spec["half_extents"], orientation=rot)
    return Cylinder(
        center=spec["center"],
        axis=spec["axis"],
        radius=spec["radius"],
        half_height=spec["half_height"],
    )


def _build_scene(doc):
    obstacles = []
    for o in doc["scene"]["obstacles"]:
        motion = None
        if "motion" in o:
            motion = Trajectory(waypoints=o["motion"]["waypoints"], speed=o["motion"]["speed"])
        obstacles.append(
            Obstacle(
                shape=_build_shape(o["shape"]),
                motion=motion,
                id=o["id"],
                sensed=o.get("sensed", True),
            )
        )
    return Scene(obstacles)


def _build_path(spec):
    if "hold" in spec:
        return ReferencePath.hold(spec["hold"])
    return ReferencePath(waypoints=spec["waypoints"], speed=spec["speed"])


def _build_supervisor(spec):
    if spec["type"] == "arctan":
        return Arctan(K=spec["K"])
    if spec["type"] == "piecewise":
        return PiecewiseLinear(eps=spec["eps"])
    return Crisp()


def _build_task(spec):
    if spec is None:
        return None
    return TaskPoint(link_index=spec["link_index"], offset=tuple(spec.get("offset", (0, 0, 0))))


def apply_flag_overrides(doc, supervisor=None, controller=None, t_s=None, duration=None):
    """Fold CLI flag overrides into a scenario document (returns a copy)."""
    doc = json.loads(json.dumps(doc))
    if supervisor is not None:
        old = doc["gains"]["supervisor"]
        if supervisor == "arctan":
            doc["gains"]["supervisor"] = {"type": "arctan", "K": old.get("K", DEFAULT_ARCTAN_K)}
        elif supervisor == "piecewise":
            doc["gains"]["supervisor"] = {
                "type": "piecewise",
                "eps": old.get("eps", DEFAULT_PIECEWISE_EPS),
            }
        elif supervisor == "crisp":
            doc["gains"]["supervisor"] = {"type": "crisp"}
        else:
            raise ScenarioFormatError(f"unknown supervisor {supervisor!r}", "$.gains.supervisor")
    if controller is not None:
        doc["controller"] = controller
    if t_s is not None:
        doc["gains"]["t_s"] = t_s
    if duration is not None:
        doc["duration"] = duration
    return doc


def build_scenario(doc, name=""):
    """Validated document -> Scenario (semantic errors become format errors)."""
    validate_document(doc)
    try:
        mounts = _build_mounts(doc)
    except ValueError as exc:
        raise ScenarioFormatError(str(exc), "$.sensors.mounts") from exc
    try:
        chain = _build_chain(doc, mounts)
    except ValueError as exc:
        raise ScenarioFormatError(str(exc), "$.chain") from exc
    try:
        scene = _build_scene(doc)
    except ValueError as exc:
        raise ScenarioFormatError(str(exc), "$.scene") from exc
    rules = tuple(
        SuppressionRule(
            sensor_index=r["sensor_index"],
            obstacle_id=r["obstacle_id"],
            distance=r["distance"],
        )
        for r in doc["sensors"].get("suppression", ())
    )
    for rule in rules:
        if rule.sensor_index >= len(mounts):
            raise ScenarioFormatError(
                f"suppression rule names sensor {rule.sensor_index}, only {len(mounts)} mounted",
                "$.sensors.suppression",
            )
        try:
            scene.index_of(rule.obstacle_id)
        except KeyError as exc:
            raise ScenarioFormatError(str(exc), "$.sensors.suppression") from exc
    g = doc["gains"]
    gains = ControllerGains(
        gamma_o=g["gamma_o"],
        gamma_g=g["gamma_g"],
        supervisor=_build_supervisor(g["supervisor"]),
        t_s=g["t_s"],
        damping=g.get("damping", 1e-4),
        qdot_cap=g.get("qdot_cap"),
    )
    apf_gains = None
    if "apf" in g:
        a = g["apf"]
        apf_gains = ApfGains(
            eta=a["eta"], rho_0=a["rho_0"], k_p=a["k_p"], force_cap=a.get("force_cap", 1e3)
        )
    second = None
    if "second_robot" in doc:
        s = doc["second_robot"]
        env = s.get("envelope", {})
        second = SecondRobot(
            path=_build_path(s["path"]),
            initial_q=np.asarray(s["initial_q"], dtype=float),
            task=_build_task(s.get("task")),
            envelope=BodyEnvelope(
                link_index=env.get("link_index", 2),
                offset=tuple(env.get("offset", (0.0, 0.0, 0.15))),
                radius=env.get("radius", 0.5),
                half_height=env.get("half_height", 0.3),
            ),
        )
    try:
        return Scenario(
            chain=chain,
            scene=scene,
            path=_build_path(doc["path"]),
            gains=gains,
            duration=doc["duration"],
            initial_q=np.asarray(doc["initial_q"], dtype=float),
            controller=doc["controller"],
            apf_gains=apf_gains,
            task=_build_task(doc.get("task")),
            rules=rules,
            second_robot=second,
            name=doc.get("name", name),
        )
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def load_scenario(spec, supervisor=None, controller=None, t_s=None, duration=None):
    """Load a scenario by path or bundled name, applying flag overrides.

    Returns (scenario, document) with the overrides already folded into the
    document, so callers can echo the effective configuration verbatim.
    """
    path = resolve_scenario_path(spec)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"not valid JSON: {exc}", "$") from exc
    doc = apply_flag_overrides(
        doc, supervisor=supervisor, controller=controller, t_s=t_s, duration=duration
    )
    return build_scenario(doc, name=path.stem), doc
