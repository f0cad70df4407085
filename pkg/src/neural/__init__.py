"""Module neural - RNN générateur/critique, rétropropagation dans le temps et Adam"""
from .rnn import (
    CriticParams,
    CriticTrace,
    GeneratorParams,
    GeneratorTrace,
    critic_backward,
    critic_forward,
    critic_forward_batch,
    generator_backward,
    generator_forward,
    generator_forward_batch,
    pad_batch,
)
from .adam import AdamState, adam_step
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
