"""visimp: pixel-wise visual importance for designs and visualizations.

Turns human attention records into ground-truth importance maps, trains
and runs a toy fully convolutional importance predictor, evaluates
predictions (KL, CC, RMSE, R², Spearman, per-element scores), and feeds
the maps into retargeting, thumbnailing, and an HTTP service for
interactive tools.
"""

from .errors import (
    CheckpointError,
    DataError,
    ParameterError,
    TrainingDivergedError,
    VisimpError,
)
from .ground_truth import (
    AnnotationSet,
    ClickLog,
    ClickPoint,
    Participant,
    aggregate_masks,
    aggregate_points,
)
from .metrics import (
    Element,
    ElementSegmentation,
    MetricReport,
    compute_metrics,
    cross_correlation,
    kl_divergence,
    r_squared,
    rmse,
    score_elements,
    spearman,
)
from .raster import (
    BitmapImage,
    ImportanceMap,
    IntegralTable,
    edge_energy,
    gaussian_blur,
    integral,
    peak_normalized,
    read_image,
    read_map,
    resize_map,
    write_image,
    write_map,
)
from .retarget import CropResult, CropSpec, best_crop, random_crop, retarget_image
from .thumbnail import carve, fade_composite, make_thumbnail

__version__ = "0.1.0"
