"""Deterministic analyzers turning raw sensor frames into semantic events."""

from .gaze import GazeSample, Fixation, detect_fixations, map_fixation, GazeAnalyzer
from .hrv import HrvMetrics, analyze_hrv, rmssd, RrWindow, StressClassifier
from .kinematics import JointSample, KinematicSample, derive_kinematics, RobotDataAnalyzer
from .progress import ProgressTracker
from .voice import ingest_utterance
from .frames import SensorFrame, parse_frame

__all__ = [
    "GazeSample",
    "Fixation",
    "detect_fixations",
    "map_fixation",
    "GazeAnalyzer",
    "HrvMetrics",
    "analyze_hrv",
    "rmssd",
    "RrWindow",
    "StressClassifier",
    "JointSample",
    "KinematicSample",
    "derive_kinematics",
    "RobotDataAnalyzer",
    "ProgressTracker",
    "ingest_utterance",
    "SensorFrame",
    "parse_frame",
]
