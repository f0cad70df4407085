"""Module mle - Vraisemblance, compensateurs et baselines par maximum de vraisemblance"""
from .likelihood import compensator, gauss_legendre, loglik, mean_loglik, total_compensator
from .families import EventBatch, IpFamily, NnFamily, ScFamily, SeFamily, make_family
from .fitter import FittedModel, fit, heldout_loglik, load_fitted_model, sample_fitted, save_fitted_model
