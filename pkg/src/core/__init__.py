"""Module core - Types du domaine, erreurs, flux aléatoires et format JSONL"""
from .errors import (
    DomainError,
    IoError,
    NumericalError,
    ParseError,
    PPWGANError,
    QQNotFeasibleError,
    UsageError,
)
from .types import Dataset, EventSequence, Window, validate_sequence
from .rng import RngStream
from .dataset_io import dataset_io, read_dataset, write_dataset
