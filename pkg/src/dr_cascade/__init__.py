"""Two-tier edge/cloud cascade for diabetic-retinopathy screening."""

__version__ = "0.1.0"

from .cascade import CascadeOutcome, Provenance, RoutingDecision, finalize, route, run_cascade
from .grading import CohortManifest, DeployedClass, ImageRecord, ReferableLabel, load_manifest, to_deployed, to_referable
from .metrics import ConfusionMatrix, accuracy, quadratic_weighted_kappa, sensitivity, specificity
from .scores import ScoreProvider, ScoreRecord, load_score_file, sigmoid, synthetic_provider
from .split import SplitAssignment, SplitSpec, stratified_split
from .tuning import OperatingPoint, select_operating_point, sweep_curve
