"""Expose fused gait sequences on disk as (tensor, identity) training samples."""

from .container import read_container
from .dataset import AdapterDataset, SequenceEntry, open_dataset
from .errors import AdapterError

__all__ = [
    "AdapterDataset",
    "AdapterError",
    "SequenceEntry",
    "open_dataset",
    "read_container",
]
__version__ = "0.1.0"
