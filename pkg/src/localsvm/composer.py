"""Per-region training and the weighted composition of local predictors."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .data import Dataset, as_points
from .errors import InputError, LocalSvmError
from .kernels import Kernel
from .losses import SmoothLoss
from .regions import RegionPartition, WeightScheme, restrict
from .solver import LocalModel, TrainConfig, train


@dataclass(frozen=True)
class ModelConfig:
    """Shared loss plus per-region kernel/lambda choices.

    ``kernel`` and ``train`` are the defaults; ``region_kernels`` and
    ``region_lambdas`` override them for individual region ids. Different
    kernels and regularization per region are first-class.
    """

    loss: SmoothLoss
    kernel: Kernel
    train: TrainConfig
    region_kernels: Mapping[int, Kernel] = field(default_factory=dict)
    region_lambdas: Mapping[int, float] = field(default_factory=dict)

    def kernel_for(self, region_id: int) -> Kernel:
        return self.region_kernels.get(region_id, self.kernel)

    def train_for(self, region_id: int) -> TrainConfig:
        lam = self.region_lambdas.get(region_id)
        return self.train if lam is None else self.train.with_lam(lam)

    def lam_for(self, region_id: int) -> float:
        return self.train_for(region_id).lam


class RegionTrainingError(LocalSvmError):
    """A local training failed; carries the offending region id."""

    def __init__(self, region_id, cause):
        super().__init__(f"training failed in region {region_id}: {cause}")
        self.region_id = region_id
        self.cause = cause


class ComposedModel:
    """f_comp(x) = sum_b w_b(x) f_b(x) over the scheme's regions."""

    def __init__(self, locals_by_region: Mapping[int, LocalModel],
                 scheme: WeightScheme, null_region_ids=frozenset()):
        self.locals = dict(sorted(locals_by_region.items()))
        self.scheme = scheme
        self.null_region_ids = frozenset(int(b) for b in null_region_ids)
        B = scheme.partition.B
        if sorted(self.locals) != list(range(1, B + 1)):
            raise InputError(
                f"need one local model per region 1..{B}, got ids {sorted(self.locals)}"
            )

    @property
    def partition(self) -> RegionPartition:
        return self.scheme.partition

    def predict_with_coverage(self, X):
        """Predictions and the covered mask (False rows used nearest fallback)."""
        X = as_points(X)
        W, covered = self.scheme.weights_many(X, on_uncovered="nearest")
        out = np.zeros(X.shape[0])
        for b, model in self.locals.items():
            active = W[:, b - 1] != 0.0
            if active.any():
                out[active] += W[active, b - 1] * model.predict(X[active])
        return out, covered

    def predict(self, X) -> np.ndarray:
        return self.predict_with_coverage(X)[0]

    def predict_one(self, x) -> float:
        return float(self.predict(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def to_dict(self) -> dict:
        return {
            "partition": self.partition.to_dict(),
            "scheme": self.scheme.to_dict(),
            "locals": [self.locals[b].to_dict() for b in sorted(self.locals)],
            "null_region_ids": sorted(self.null_region_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComposedModel":
        partition = RegionPartition.from_dict(d["partition"])
        scheme = WeightScheme.from_dict(d["scheme"], partition)
        locals_by_region = {}
        for entry in d["locals"]:
            model = LocalModel.from_dict(entry)
            locals_by_region[int(model.region_id)] = model
        return cls(locals_by_region, scheme,
                   null_region_ids=frozenset(d.get("null_region_ids", [])))


def _fit_one(data, partition, config, b):
    sample_b = restrict(data, partition, b)
    if sample_b is None:
        return b, LocalModel.zero(config.kernel_for(b), config.loss,
                                  config.lam_for(b), b), True
    try:
        model = train(sample_b, config.kernel_for(b), config.loss,
                      config.train_for(b), region_id=b)
    except LocalSvmError as exc:
        raise RegionTrainingError(b, exc) from exc
    return b, model, False


def fit_composed(data: Dataset, partition: RegionPartition, scheme: WeightScheme,
                 config: ModelConfig, threads: int = 1) -> ComposedModel:
    """Train one local model per region and compose them under the scheme.

    Null-measure regions (no training points inside the ball) receive the
    zero function and are recorded in ``null_region_ids``. Region trainings
    are independent; ``threads > 1`` runs them in a thread pool with a
    deterministic, id-ordered reduction.
    """
    if scheme.partition is not partition and scheme.partition.B != partition.B:
        raise InputError("scheme was built for a different partition")
    ids = list(range(1, partition.B + 1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda b: _fit_one(data, partition, config, b), ids))
    else:
        results = [_fit_one(data, partition, config, b) for b in ids]
    locals_by_region = {b: model for b, model, _ in results}
    null_ids = frozenset(b for b, _, is_null in results if is_null)
    return ComposedModel(locals_by_region, scheme, null_region_ids=null_ids)


def predict_composed(model: ComposedModel, X) -> np.ndarray:
    """Evaluate the composed predictor at the rows of X."""
    return model.predict(X)


def empirical_risk(predictor, data: Dataset, loss: SmoothLoss,
                   shifted: bool = False) -> float:
    """Mean loss (or shifted loss) of a predictor over a dataset.

    ``predictor`` is anything with .predict, or a plain array of
    precomputed predictions aligned with ``data``.
    """
    if data.n == 0:
        raise InputError("empirical risk of an empty dataset")
    if hasattr(predictor, "predict"):
        preds = predictor.predict(data.X)
    else:
        preds = np.asarray(predictor, dtype=float)
        if preds.shape[0] != data.n:
            raise InputError("predictions and dataset lengths differ")
    vals = loss.shifted_value(data.y, preds) if shifted else loss.value(data.y, preds)
    return float(np.mean(vals))
