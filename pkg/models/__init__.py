"""
Models package for the Lévy exponential-functional toolkit
Contains all data models and schemas
"""

from .process_models import *
from .report_models import *
from .sample_models import *

__all__ = [
    # Process catalog
    'Side',
    'Regime',
    'BrownianDrift',
    'StableSN',
    'BVDriftCPP',
    'PoissonMultiple',
    'DualOf',
    'ProcessSpec',
    'PROCESS_SPEC_ADAPTER',
    'parse_process_spec',
    'ExponentSummary',

    # Simulation
    'Horizon',
    'LevelUp',
    'BarrierThenLastZero',
    'TwoSidedExit',
    'StopRule',
    'StopReason',
    'RngStream',
    'VUpAlgorithm',
    'VariantTag',
    'FunctionalVariant',
    'PathSample',
    'EcdfBand',

    # Reports and configuration
    'MCEstimate',
    'RejectionBiasStudy',
    'Anchor',
    'CheckReport',
    'Report',
    'SuiteOverrides',
    'RunConfig',
]
