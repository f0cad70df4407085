"""Module experiments - Fichiers de configuration et pipeline de reproduction"""
from .config_files import (
    EvaluationSettings,
    SimulationSettings,
    evaluation_settings,
    fit_settings,
    load_config,
    parse_model,
    simulation_settings,
    train_settings,
)
from .reproduction import ReproductionPipeline, derive_seed
