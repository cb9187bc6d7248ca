"""Exhaustive linear-track detection in time-indexed 2D point sets.

Candidate tracks are enumerated by sweeping the arrangement of eps-offset
dual lines, first in (x, y) and then in (t, x).
"""

__version__ = "0.1.0"

from .errors import (CorruptState, DegenerateAbscissa, EmptyInput, InfeasibleConfig,
                     Parallel, ParseError, SchemaError, TooLarge, TrackSweepError)
from .geometry import (Axis, AxisPair, FeasibilityVerdict, FitResult, Line2, PointSet,
                       TimedPoint, chebyshev_fit, is_feasible, signed_residual)
from .arrangement import (LinearStructure, build_offset_arrangement, plane_sweep,
                          topo_sweep)
from .detection import (DetectorConfig, Threshold, TopK, Track, TrackSet, baseline_detect,
                        find_all_tracks, find_all_tracks_with_vertical, naive_enumerate,
                        select_tracks)
from .evaluation import MatchConfig, MetricsReport, bench_scaling, score
from .synthetic import GeneratedScene, SceneConfig, generate_scene, read_scene, write_scene
