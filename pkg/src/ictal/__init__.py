"""EEG seizure detection from multichannel recordings.

Feature extraction couples a neural estimator of inter-channel mutual
information with a 1D convolutional detector over raw signal blocks; a
chain factor graph smooths the per-block soft scores into temporally
consistent detections.
"""

from .recording import Annotation, Recording
from .errors import ConfigError, DataError, EdfError, IctalError, NumericError

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "ConfigError",
    "DataError",
    "EdfError",
    "IctalError",
    "NumericError",
    "Recording",
    "__version__",
]
