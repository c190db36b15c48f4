"""Neighbor-based displacement resampling for imbalanced multiclass data."""

from .dataset import ClassStats, Dataset, DatasetError, class_stats, generate_synthetic, load_csv, write_csv
from .geometry import DistanceMetric, NeighborIndex, knn_indices, pairwise_distances
from .metrics import confusion_matrix, gmean, macro_prf
from .nde import class_centroids, displace, identify_displaceable
from .resamplers import ResampleOutcome, ResamplerSpec, ResamplingError, ndeso, resample

__version__ = "0.1.0"
