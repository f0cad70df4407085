"""
Rapports d'évaluation - ppwgan
==============================
Fichiers produits dans le dossier de sortie :
- deviations_long.csv : dataset, metric, estimator, mean, std, n_seeds
- table1_<metric>.csv : une ligne par jeu de données, une colonne par estimateur, cellules "moyenne (écart-type)"
- intensity.svg : courbes d'intensité empirique
- qq.svg : nuages QQ contre les quantiles d'une Exp(1)

Les sorties sont reproductibles à l'octet près pour des entrées identiques.
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..config import DATASET_NAMES, ESTIMATORS, EVAL_CONFIG
from ..core.errors import IoError
from .metrics import exponential_quantiles

logger = logging.getLogger(__name__)

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False
    logger.warning("⚠ matplotlib non disponible - graphiques SVG désactivés")

LONG_COLUMNS = ["dataset", "metric", "estimator", "mean", "std", "n_seeds"]
RECORD_COLUMNS = ["dataset", "estimator", "metric", "seed", "value"]


@dataclass(frozen=True)
class EvaluationRecord:
    dataset: str
    estimator: str
    metric: str
    seed: int
    value: float


def records_to_frame(records):
    return pd.DataFrame([asdict(r) for r in records], columns=RECORD_COLUMNS)


def summarize(records):
    """Moyenne et écart-type (population) par (dataset, metric, estimator)."""
    frame = records_to_frame(records)
    if frame.empty:
        return pd.DataFrame(columns=LONG_COLUMNS)
    grouped = frame.groupby(["dataset", "metric", "estimator"], sort=True)["value"]
    summary = grouped.agg(mean="mean", std=lambda v: float(np.std(v, ddof=0)), n_seeds="count").reset_index()
    return summary[LONG_COLUMNS]


def _ordered(values, preferred):
    present = list(dict.fromkeys(values))
    return [v for v in preferred if v in present] + sorted(v for v in present if v not in preferred)


def table_for_metric(summary, metric):
    """Tableau jeux de données x estimateurs, cellules "moyenne (écart-type)"."""
    rows = summary[summary["metric"] == metric]
    datasets = _ordered(rows["dataset"], DATASET_NAMES)
    estimators = _ordered(rows["estimator"], ESTIMATORS)
    cells = {(r.dataset, r.estimator): f"{r.mean:.3f} ({r.std:.3f})" for r in rows.itertuples()}
    table = pd.DataFrame(
        [[d] + [cells.get((d, e), "") for e in estimators] for d in datasets],
        columns=["dataset"] + estimators,
    )
    return table


def _svg_settings():
    return {"svg.hashsalt": EVAL_CONFIG["svg_hashsalt"], "svg.fonttype": "none"}


def _save_svg(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_intensity_curves(curves, path):
    """Une ligne (gid "courbe-<nom>") par courbe d'intensité, plus une légende."""
    with plt.rc_context(_svg_settings()):
        fig, ax = plt.subplots(figsize=EVAL_CONFIG["figure_size"])
        for label, curve in curves.items():
            centers = curve.edges[:-1] + curve.bin_width / 2.0
            line, = ax.plot(centers, curve.array, label=label, linewidth=1.2)
            line.set_gid(f"courbe-{label}")
        ax.set_xlabel("t")
        ax.set_ylabel("intensité empirique")
        legend = ax.legend()
        legend.set_gid("legende")
        fig.tight_layout()
        _save_svg(fig, path)


def plot_qq(qq_points, path):
    """Quantiles empiriques des Λ contre ceux d'une Exp(1), avec la diagonale de référence."""
    with plt.rc_context(_svg_settings()):
        fig, ax = plt.subplots(figsize=EVAL_CONFIG["figure_size"])
        upper = 0.0
        for label, values in qq_points.items():
            values = np.sort(np.asarray(values, dtype=np.float64))
            theory = exponential_quantiles(values.size)
            line, = ax.plot(theory, values, linestyle="none", marker=".", markersize=2, label=label)
            line.set_gid(f"qq-{label}")
            if values.size:
                upper = max(upper, float(theory[-1]), float(values[-1]))
        ref, = ax.plot([0.0, upper], [0.0, upper], color="black", linewidth=0.8, label="y = x")
        ref.set_gid("reference")
        ax.set_xlabel("quantiles Exp(1)")
        ax.set_ylabel("quantiles empiriques")
        ax.legend().set_gid("legende")
        fig.tight_layout()
        _save_svg(fig, path)


def emit_report(records, out_dir, curves=None, qq_points=None):
    """
    Écrit les tableaux CSV et les graphiques SVG.

    Args:
        records: liste d'EvaluationRecord
        out_dir: dossier de sortie (créé si besoin)
        curves (dict): nom -> IntensityCurve
        qq_points (dict): nom -> incréments Λ regroupés

    Returns:
        liste des chemins écrits
    """
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        summary = summarize(records)
        long_path = out_dir / "deviations_long.csv"
        summary.to_csv(long_path, index=False, float_format="%.10g", lineterminator="\n")
        written.append(long_path)

        for metric in sorted(summary["metric"].unique()):
            table_path = out_dir / f"table1_{metric}.csv"
            table_for_metric(summary, metric).to_csv(table_path, index=False, lineterminator="\n")
            written.append(table_path)

        if MATPLOTLIB_AVAILABLE:
            if curves:
                plot_intensity_curves(curves, out_dir / "intensity.svg")
                written.append(out_dir / "intensity.svg")
            if qq_points:
                plot_qq(qq_points, out_dir / "qq.svg")
                written.append(out_dir / "qq.svg")
    except OSError as e:
        raise IoError(f"écriture du rapport impossible ({out_dir}): {e}") from e

    for path in written:
        logger.info(f"✓ {path}")
    return written
