"""
Core modules for Synkin
"""

from .config import ActuatorModel, NmfOptions, PipelineConfig, PreprocessConfig
from .errors import (
    DataParseError,
    DegenerateInputError,
    NonFiniteInputError,
    ParameterError,
    StructuralError,
    SynkinError,
)
from .signal_model import (
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
    validate,
)
from .nmf import OrderSelection, SynergySet, factorize, select_order, vaf
from .synergy import CommandStream, ForceSynergySelection, normalize_interchannel, select_force_synergy
from .simulator import SimResult, run
from .synthgen import SynthDataset, SynthSpec, generate
from .csv_exporter import CSVExporter
from .data_loader import DataLoader
from .logger import ProcessLogger
from .processor import PipelineProcessor

__all__ = [
    'ActuatorModel',
    'NmfOptions',
    'PipelineConfig',
    'PreprocessConfig',
    'SynkinError',
    'ParameterError',
    'StructuralError',
    'NonFiniteInputError',
    'DataParseError',
    'DegenerateInputError',
    'Condition',
    'EmgMatrix',
    'ForceTrace',
    'PositionTrace',
    'PressureFrameSequence',
    'Trial',
    'TrialSet',
    'validate',
    'OrderSelection',
    'SynergySet',
    'factorize',
    'select_order',
    'vaf',
    'CommandStream',
    'ForceSynergySelection',
    'normalize_interchannel',
    'select_force_synergy',
    'SimResult',
    'run',
    'SynthDataset',
    'SynthSpec',
    'generate',
    'CSVExporter',
    'DataLoader',
    'ProcessLogger',
    'PipelineProcessor',
]
