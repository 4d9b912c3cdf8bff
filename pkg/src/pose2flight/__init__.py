"""Skeleton-pose human-drone interaction stack."""

from .skeleton import Joint, SkeletonFrame, joint_distance, elbow_angle, parse_skeleton_frame
from .view import ViewClass, ViewConfig, classify_view
from .gestures import (
    ArmState,
    Gesture,
    GestureEvent,
    StabilityConfig,
    StabilityFilter,
    classify_gesture,
)
from .head import BBox, head_bbox, select_user
from .control import ControlMode, PIDGains, PIDState, VelocityCommand, pid_step
from .sim import DroneSim, DroneState, parse_command
from .config import Config, load_config

__version__ = "0.1.0"
