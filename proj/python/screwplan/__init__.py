"""Dual-quaternion pose planning from demonstrations."""

from ._core import (
    Pose,
    Robot,
    ScrewplanError,
    __version__,
    bundled_robot_names,
    exp,
    load_robot,
    log,
    plan,
    pow,
    record_demo,
    run,
    sclerp,
    screw_parameters,
)

__all__ = [
    "Pose",
    "Robot",
    "ScrewplanError",
    "__version__",
    "bundled_robot_names",
    "exp",
    "load_robot",
    "log",
    "plan",
    "pow",
    "record_demo",
    "run",
    "sclerp",
    "screw_parameters",
]
