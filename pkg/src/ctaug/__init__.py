"""Deterministic augmentation and experiment-prep toolkit for CT lung-lesion
segmentation."""

__version__ = "0.1.0"

from . import core, kernels, transforms  # noqa: F401
from .errors import CtaugError, DataError, ValidationError  # noqa: F401
