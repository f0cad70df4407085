"""Module simulation - Familles d'intensité et simulateurs (vérité terrain + bruit)"""
from .intensities import (
    FAMILIES,
    IpParams,
    MixtureModel,
    NnIntensityParams,
    ScParams,
    SeParams,
    default_model,
    intensity_at,
    model_from_dict,
    model_to_dict,
    random_nn_intensity,
)
from .simulator import make_dataset, mixture_assignments, simulate_homogeneous, simulate_thinning
