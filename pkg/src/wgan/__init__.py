"""Module wgan - Objectif minimax, pénalité de Lipschitz et boucle d'entraînement"""
from .trainer import (
    LOG_COLUMNS,
    CriticLoss,
    TrainConfig,
    TrainingResult,
    WganTrainer,
    critic_loss,
    generator_loss,
    infer_noise_rate,
    sample_generator,
    train,
)
