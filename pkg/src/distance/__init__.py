"""Module distance - Distance ⋆ entre séquences d'événements"""
from .star_distance import counting_measure_l1, pairwise_star_distances, star_distance, star_distance_oracle
