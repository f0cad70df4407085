"""
Hiérarchie d'erreurs de ppwgan
==============================
Chaque erreur porte le code de sortie utilisé par main.py.
"""


class PPWGANError(Exception):
    """Erreur de base du projet."""

    exit_code = 1


class UsageError(PPWGANError):
    """Mauvaise utilisation de la ligne de commande ou configuration invalide."""

    exit_code = 2


class DomainError(PPWGANError):
    """Valeur hors du domaine de définition (fenêtre, paramètres, tailles)."""

    exit_code = 3


class QQNotFeasibleError(DomainError):
    """QQ plot demandé sur un mélange de processus."""


class NumericalError(PPWGANError):
    """Divergence ou valeur non finie pendant un calcul."""

    exit_code = 4


class ParseError(PPWGANError):
    """Fichier mal formé (numéro de ligne dans le message)."""

    exit_code = 5

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"ligne {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class IoError(PPWGANError):
    """Lecture ou écriture impossible."""

    exit_code = 5
