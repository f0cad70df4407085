"""
Pipeline de reproduction - ppwgan
=================================
Pour chaque jeu de données (4 familles + 4 mélanges) et chaque graine :
    1. Simulation de la vérité terrain
    2. Entraînement du WGAN
    3. Ajustement des 4 baselines MLE
    4. Évaluation (écart d'intensité, écart de pente QQ hors mélanges)
puis émission des tableaux et du rapport texte.
"""

import json
import logging
import time
from datetime import datetime
from pathlib import Path

import numpy as np
from tqdm import tqdm

from ..config import (
    CHECKPOINTS_DIR,
    DATASET_NAMES,
    DATASETS_DIR,
    EVAL_CONFIG,
    REPORTS_DIR,
    REPRO_PRESETS,
    SIMULATION_CONFIG,
)
from ..core.dataset_io import write_dataset
from ..core.errors import PPWGANError, UsageError
from ..core.types import Window
from ..evaluation.metrics import empirical_intensity, intensity_deviation, pooled_increments, qq_from_increments
from ..evaluation.report import EvaluationRecord, emit_report, plot_intensity_curves, summarize, MATPLOTLIB_AVAILABLE
from ..mle.fitter import fit, sample_fitted, save_fitted_model
from ..neural.checkpoint import save_checkpoint
from ..simulation.intensities import MixtureModel, default_model, model_to_dict
from ..simulation.simulator import make_dataset
from ..wgan.trainer import TrainConfig, WganTrainer, sample_generator

logger = logging.getLogger(__name__)

MLE_FAMILIES = ("IP", "SE", "SC", "NN")


def derive_seed(*keys):
    """Graine 32 bits déterministe à partir d'une suite d'entiers."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


class ReproductionPipeline:
    """Orchestrateur simulation -> entraînement -> ajustement -> évaluation"""

    def __init__(self, out_dir, preset="desk", n_seeds=None, max_iters=None, base_seed=0, show_progress=True):
        if preset not in REPRO_PRESETS:
            raise UsageError(f"--preset: préréglage inconnu {preset!r} ({', '.join(REPRO_PRESETS)})")
        self.preset_name = preset
        self.preset = dict(REPRO_PRESETS[preset])
        if n_seeds is not None:
            self.preset["n_seeds"] = n_seeds
        if max_iters is not None:
            self.preset["max_iters"] = max_iters
        self.out_dir = Path(out_dir)
        self.base_seed = base_seed
        self.show_progress = show_progress
        self.window = Window(SIMULATION_CONFIG["horizon"])
        self.records = []
        self.curves = {}
        self.qq_points = {}
        self.stats = {"start_time": None, "duration": None, "stages": 0}

    # --- dossiers ---

    @property
    def datasets_dir(self):
        return self.out_dir / DATASETS_DIR.name

    @property
    def checkpoints_dir(self):
        return self.out_dir / CHECKPOINTS_DIR.name

    @property
    def reports_dir(self):
        return self.out_dir / REPORTS_DIR.name

    def _stage(self, stage, dataset, seed, func, *args, **kwargs):
        """Exécute une étape ; les erreurs gardent leur classe et gagnent le contexte."""
        try:
            result = func(*args, **kwargs)
        except PPWGANError as e:
            logger.error(f"✗ [{stage} | {dataset} | graine {seed}] {e}")
            raise type(e)(f"[{stage} | {dataset} | graine {seed}] {e}") from e
        self.stats["stages"] += 1
        return result

    # --- configuration des étapes ---

    def train_config(self, seed):
        return TrainConfig(
            hidden_dim=self.preset["hidden_dim"],
            max_iters=self.preset["max_iters"],
            batch_size=self.preset.get("batch_size", TrainConfig.batch_size),
            seed=seed,
            eval_every=0,
            checkpoint_every=0,
            record_wall_time=False,
            show_progress=False,
        )

    def fit_config(self, seed):
        config = {"seed": seed, "show_progress": False}
        if "mle_iters" in self.preset:
            config["max_iters"] = self.preset["mle_iters"]
        return config

    def write_configs(self):
        """Préréglage non exécuté : écrit les configurations de chaque jeu de données."""
        config_dir = self.out_dir / "configs"
        config_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in DATASET_NAMES:
            record = {
                "schema_version": 1,
                "simulate": {"model": model_to_dict(default_model(name)), "n_sequences": self.preset["n_sequences"],
                             "horizon": self.window.horizon_T, "seed": derive_seed(self.base_seed, 0)},
                "train": {"hidden_dim": self.preset["hidden_dim"], "max_iters": self.preset["max_iters"]},
            }
            path = config_dir / f"{name.replace('+', '_')}.json"
            path.write_text(json.dumps(record, indent=2), encoding="utf-8")
            paths.append(path)
        logger.warning(f"⚠ Préréglage '{self.preset_name}' : {self.preset['n_sequences']} séquences, "
                       f"{self.preset['max_iters']} itérations par jeu de données et par graine - "
                       f"plusieurs jours de calcul CPU. Configurations écrites dans {config_dir}")
        return paths

    # --- une graine sur un jeu de données ---

    def run_one(self, index, name, seed_index):
        seed = derive_seed(self.base_seed, index, seed_index)
        tag = f"{name.replace('+', '_')}_seed{seed_index}"
        truth = default_model(name)
        n = self.preset["n_sequences"]
        n_generated = self.preset.get("n_generated", EVAL_CONFIG["n_generated"])
        dt = EVAL_CONFIG["bin_width"]

        data = self._stage("simulate", name, seed_index, make_dataset, truth, None, n, self.window, seed, label=name)
        write_dataset(data, self.datasets_dir / f"{tag}.jsonl")
        truth_curve = empirical_intensity(data, dt)
        samples = {}

        trainer = self._stage("train WGAN", name, seed_index, WganTrainer, data, self.train_config(seed))
        result = self._stage("train WGAN", name, seed_index, trainer.train)
        save_checkpoint(self.checkpoints_dir / f"wgan_{tag}.json", result.checkpoint())
        result.write_log(self.checkpoints_dir / f"wgan_{tag}_log.csv")
        samples["WGAN"] = sample_generator(result.generator, result.noise_rate, n_generated, self.window,
                                           derive_seed(seed, 1))

        for family in MLE_FAMILIES:
            fitted = self._stage(f"fit MLE-{family}", name, seed_index, fit, data, family, self.fit_config(seed))
            save_fitted_model(fitted, self.checkpoints_dir / f"mle_{family}_{tag}.json")
            samples[fitted.label] = self._stage(f"sample MLE-{family}", name, seed_index, sample_fitted,
                                                fitted, n_generated, self.window, derive_seed(seed, 2))

        for estimator, generated in samples.items():
            deviation = intensity_deviation(truth_curve, empirical_intensity(generated, dt))
            self.records.append(EvaluationRecord(name, estimator, "intensity", seed_index, deviation))
            if not isinstance(truth, MixtureModel):
                increments = pooled_increments(generated, truth)
                if increments.size >= 2:
                    qq = qq_from_increments(increments)
                    self.records.append(EvaluationRecord(name, estimator, "qq", seed_index, qq.slope_deviation))
                    if seed_index == 0 and estimator == "WGAN":
                        self.qq_points[name] = increments

        if seed_index == 0:
            curves = {"vérité": truth_curve}
            curves.update({est: empirical_intensity(gen, dt) for est, gen in samples.items()})
            self.curves[name] = curves

    # --- pipeline complet ---

    def generate_text_report(self):
        summary = summarize(self.records)
        lines = [
            "=" * 70,
            "RAPPORT DE REPRODUCTION - ppwgan".center(70),
            "=" * 70,
            f"Date: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}",
            f"Préréglage: {self.preset_name} ({self.preset['n_sequences']} séquences, "
            f"{self.preset['max_iters']} itérations, k={self.preset['hidden_dim']}, {self.preset['n_seeds']} graine(s))",
            f"Durée: {self.stats['duration']:.1f} s - {self.stats['stages']} étapes",
            "",
        ]
        for metric, title in (("intensity", "ÉCART D'INTENSITÉ EMPIRIQUE"), ("qq", "ÉCART DE PENTE QQ")):
            rows = summary[summary["metric"] == metric]
            lines += ["-" * 70, title, "-" * 70]
            if rows.empty:
                lines.append("  aucune mesure")
                continue
            table = rows.pivot(index="dataset", columns="estimator", values="mean")
            lines.append(table.to_string(float_format=lambda v: f"{v:.3f}"))
            lines.append("")
        lines.append("QQ plot non réalisable pour les mélanges (composante inconnue).")
        report = "\n".join(lines) + "\n"
        path = self.reports_dir / "rapport_reproduction.txt"
        path.write_text(report, encoding="utf-8")
        logger.info(f"✓ Rapport texte: {path}")
        return path

    def execute_full_pipeline(self):
        """Exécute toutes les étapes ; retourne la liste des fichiers du rapport."""
        self.stats["start_time"] = time.time()
        for directory in (self.datasets_dir, self.checkpoints_dir, self.reports_dir):
            directory.mkdir(parents=True, exist_ok=True)
        if not self.preset.get("run", True):
            return self.write_configs()

        jobs = [(i, name, s) for i, name in enumerate(DATASET_NAMES) for s in range(self.preset["n_seeds"])]
        logger.info(f"Reproduction '{self.preset_name}': {len(DATASET_NAMES)} jeux de données x "
                    f"{self.preset['n_seeds']} graine(s)")
        for index, name, seed_index in tqdm(jobs, desc="Reproduction", disable=not self.show_progress):
            self.run_one(index, name, seed_index)

        written = emit_report(self.records, self.reports_dir, qq_points=self.qq_points)
        if MATPLOTLIB_AVAILABLE:
            for name, curves in self.curves.items():
                path = self.reports_dir / f"intensity_{name.replace('+', '_')}.svg"
                plot_intensity_curves(curves, path)
                written.append(path)
        self.stats["duration"] = time.time() - self.stats["start_time"]
        written.append(self.generate_text_report())
        logger.info(f"✓ Reproduction terminée en {self.stats['duration']:.1f} s")
        return written
