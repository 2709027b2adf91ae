"""Eye-fixation map reconstruction and information-theoretic correlation analysis."""

__version__ = "0.1.0"

from .correlation import (  # noqa: E402
    ALL26,
    SPATIAL8,
    TEMPORAL2,
    AllNeighborsResult,
    AnalysisConfig,
    AnalysisReport,
    NeighborhoodSpec,
    SpatialMiMap,
    TemporalMiCurve,
    all_neighbors_entropy,
    run_report,
    spatial_mi_map,
    temporal_mi_pair,
    temporal_mi_window,
)
from .fixmap import FixationMap, ScaleSpec, build_map, read_map, rescale, write_map  # noqa: E402
from .gaze import GazeSample, Label, RecordingMeta, filter_attentive, parse_gaze_file, sample_to_frame  # noqa: E402
from .info import (  # noqa: E402
    JointPmf,
    Pmf,
    conditional_entropy,
    entropy,
    estimate_pmf,
    joint_from_pairs,
    mutual_information,
)
