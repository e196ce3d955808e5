"""Embodiment models, kinematics, and command mapping."""
from .embodiment import (
    CameraSpec,
    Chain,
    EmbodimentSpec,
    Joint,
    TorsoSpec,
    bundled_embodiments,
    load_embodiment,
    spec_from_dict,
)
from .ik import damped_ls, diff_ik_step, displace_target, ee_error, track_target
from .kinematics import (
    LimitError,
    check_limits,
    clamp_to_limits,
    forward_kinematics,
    jacobian,
)
from .mapping import JointState, RobotCommand, filter_unusable, map_command
