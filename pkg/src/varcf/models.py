"""The four model architectures and everything that trains them.

DeepMF     embeddings -> dot product
NCF        embeddings -> concatenate -> MLP -> scalar
VDeepMF    embeddings -> mean/log-scale heads -> latent sample -> dot
VNCF       embeddings -> mean/log-scale heads -> latent sample -> concat -> MLP

Training minimizes plain mean squared error by mini-batch Adam, with
gradients flowing through the sampled latents via reparameterization
(the drawn noise is held fixed inside each backward pass).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .data import RatingsDataset, TrainingBatch, batches
from .errors import CheckpointError, ConfigError, DimensionError, NumericError
from .layers import (
    DenseLayer,
    EmbeddingTable,
    VariationalHead,
    concat_backward,
    concat_combine,
    dense_backward,
    dense_forward,
    dot_backward,
    dot_combine,
    embedding_backward,
    embedding_forward,
    variational_backward,
    variational_sample,
)
from .optim import AdamState, GradientSet, adam_update
from .rng import RngState, derive_seed

ARCHITECTURES = ("DeepMF", "NCF", "VDeepMF", "VNCF")
CHECKPOINT_VERSION = "1.0"
_EPS_TAG = 0x45505331
_PREDICT_CHUNK = 8192


@dataclass
class ModelConfig:
    """Architecture choice, dimensions, and training hyperparameters."""

    architecture: str
    num_users: int
    num_items: int
    embedding_dim: int = 5
    latent_dim: int = 5
    mlp_hidden: tuple[int, ...] | None = None
    batch_size: int = 32
    epochs: int = 15
    learning_rate: float = 0.001
    seed: int = 0
    n_prediction_samples: int = 10
    rating_min: float | None = None
    rating_max: float | None = None

    def __post_init__(self):
        canonical = {a.lower(): a for a in ARCHITECTURES}
        key = str(self.architecture).lower()
        if key not in canonical:
            raise ConfigError(
                f"unknown architecture {self.architecture!r}; expected one of {ARCHITECTURES}"
            )
        self.architecture = canonical[key]
        for name in ("num_users", "num_items", "embedding_dim", "latent_dim", "batch_size"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be non-negative, got {self.epochs}")
        if self.n_prediction_samples <= 0:
            raise ConfigError(
                f"n_prediction_samples must be positive, got {self.n_prediction_samples}"
            )
        if self.uses_mlp:
            if self.mlp_hidden is None:
                self.mlp_hidden = (self.latent_dim, max(1, self.latent_dim // 2))
            else:
                self.mlp_hidden = tuple(int(w) for w in self.mlp_hidden)
                if len(self.mlp_hidden) == 0:
                    raise ConfigError(f"{self.architecture} needs a non-empty mlp_hidden")
                if any(w <= 0 for w in self.mlp_hidden):
                    raise ConfigError(f"mlp_hidden widths must be positive, got {self.mlp_hidden}")
        else:
            self.mlp_hidden = None

    @property
    def is_variational(self) -> bool:
        return self.architecture in ("VDeepMF", "VNCF")

    @property
    def uses_mlp(self) -> bool:
        return self.architecture in ("NCF", "VNCF")

    @property
    def rating_range(self) -> tuple[float, float] | None:
        if self.rating_min is None or self.rating_max is None:
            return None
        return (self.rating_min, self.rating_max)

    def to_dict(self) -> dict:
        return {
            "architecture": self.architecture,
            "num_users": self.num_users,
            "num_items": self.num_items,
            "embedding_dim": self.embedding_dim,
            "latent_dim": self.latent_dim,
            "mlp_hidden": list(self.mlp_hidden) if self.mlp_hidden is not None else None,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "n_prediction_samples": self.n_prediction_samples,
            "rating_min": self.rating_min,
            "rating_max": self.rating_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        kwargs = dict(d)
        if kwargs.get("mlp_hidden") is not None:
            kwargs["mlp_hidden"] = tuple(kwargs["mlp_hidden"])
        return cls(**kwargs)


@dataclass
class ModelParams:
    """All learnable state; structure is fully determined by the config."""

    user_embedding: EmbeddingTable
    item_embedding: EmbeddingTable
    user_head: VariationalHead | None = None
    item_head: VariationalHead | None = None
    regression: list[DenseLayer] = field(default_factory=list)

    def flat(self) -> dict[str, np.ndarray]:
        """Name -> live array view, for the optimizer and checkpoints."""
        out = {
            "user_embedding.weights": self.user_embedding.weights,
            "item_embedding.weights": self.item_embedding.weights,
        }
        for side, head in (("user_head", self.user_head), ("item_head", self.item_head)):
            if head is not None:
                out[f"{side}.mean.weights"] = head.mean.weights
                out[f"{side}.mean.bias"] = head.mean.bias
                out[f"{side}.logvar.weights"] = head.logvar.weights
                out[f"{side}.logvar.bias"] = head.logvar.bias
        for i, layer in enumerate(self.regression):
            out[f"regression.{i}.weights"] = layer.weights
            out[f"regression.{i}.bias"] = layer.bias
        return out

    def copy(self) -> "ModelParams":
        import copy as _copy

        return _copy.deepcopy(self)


def build_model(config: ModelConfig, rng: RngState | None = None) -> ModelParams:
    """Allocate and initialize parameters; deterministic given the seed.

    Embedding tables start at N(0, 0.05^2); dense layers Glorot-uniform
    with zero bias.  Draw order is fixed, so identical (config, seed)
    always yields identical parameters.
    """
    if rng is None:
        rng = RngState(config.seed)
    params = ModelParams(
        user_embedding=EmbeddingTable.init(config.num_users, config.embedding_dim, rng),
        item_embedding=EmbeddingTable.init(config.num_items, config.embedding_dim, rng),
    )
    if config.is_variational:
        params.user_head = VariationalHead.init(config.embedding_dim, config.latent_dim, rng)
        params.item_head = VariationalHead.init(config.embedding_dim, config.latent_dim, rng)
    if config.uses_mlp:
        in_dim = 2 * (config.latent_dim if config.is_variational else config.embedding_dim)
        layers: list[DenseLayer] = []
        for width in config.mlp_hidden:
            layers.append(DenseLayer.glorot(in_dim, width, rng, activation="relu"))
            in_dim = width
        layers.append(DenseLayer.glorot(in_dim, 1, rng, activation="linear"))
        params.regression = layers
    return params


def draw_eps(config: ModelConfig, batch_size: int, rng: RngState) -> tuple[np.ndarray, np.ndarray]:
    """Fresh noise for one stochastic pass: user side first, then item side."""
    return rng.normal(batch_size, config.latent_dim), rng.normal(batch_size, config.latent_dim)


def _forward_cached(
    params: ModelParams,
    config: ModelConfig,
    user_ids: np.ndarray,
    item_ids: np.ndarray,
    eps: tuple[np.ndarray, np.ndarray] | None,
) -> tuple[np.ndarray, dict]:
    """Predictions plus every intermediate the backward pass needs.

    ``eps=None`` means the deterministic path: latents collapse to the
    head means (for variational models) or the raw embeddings.
    """
    cache: dict = {}
    v = embedding_forward(params.user_embedding, user_ids)
    w = embedding_forward(params.item_embedding, item_ids)
    cache["v"], cache["w"] = v, w

    if config.is_variational:
        if eps is None:
            eps = (
                np.zeros((v.shape[0], config.latent_dim)),
                np.zeros((w.shape[0], config.latent_dim)),
            )
        eps_u, eps_i = eps
        mu_u = dense_forward(params.user_head.mean, v)
        lv_u = dense_forward(params.user_head.logvar, v)
        mu_i = dense_forward(params.item_head.mean, w)
        lv_i = dense_forward(params.item_head.logvar, w)
        p = variational_sample(mu_u, lv_u, eps_u)
        q = variational_sample(mu_i, lv_i, eps_i)
        cache.update(lv_u=lv_u, lv_i=lv_i, eps_u=eps_u, eps_i=eps_i)
    else:
        p, q = v, w
    cache["p"], cache["q"] = p, q

    if config.uses_mlp:
        x = concat_combine(p, q)
        inputs = []
        for layer in params.regression:
            inputs.append(x)
            x = dense_forward(layer, x)
        cache["mlp_inputs"] = inputs
        predictions = x[:, 0]
    else:
        predictions = dot_combine(p, q)
    return predictions, cache


def forward(
    params: ModelParams,
    config: ModelConfig,
    batch: TrainingBatch,
    rng: RngState | None = None,
    mode: str = "stochastic",
) -> np.ndarray:
    """One unclamped forward pass over a batch of (user, item) pairs."""
    if mode not in ("stochastic", "deterministic"):
        raise ConfigError(f"unknown forward mode {mode!r}")
    eps = None
    if mode == "stochastic" and config.is_variational:
        if rng is None:
            raise ConfigError("stochastic forward on a variational model needs an rng")
        eps = draw_eps(config, len(batch), rng)
    preds, _ = _forward_cached(params, config, batch.user_ids, batch.item_ids, eps)
    return preds


def loss_and_grads(
    params: ModelParams,
    config: ModelConfig,
    batch: TrainingBatch,
    rng: RngState | None = None,
    eps: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[float, GradientSet]:
    """Mean squared error and its exact gradients through the sampled path.

    Noise is drawn from ``rng`` unless ``eps`` is supplied explicitly
    (finite-difference tests pass a frozen eps).
    """
    if len(batch) == 0:
        raise DimensionError("cannot compute a loss on an empty batch")
    if config.is_variational and eps is None:
        if rng is None:
            raise ConfigError("training a variational model needs an rng for the noise")
        eps = draw_eps(config, len(batch), rng)

    preds, cache = _forward_cached(params, config, batch.user_ids, batch.item_ids, eps)
    resid = preds - batch.ratings
    loss = float(np.mean(np.square(resid)))
    gpred = (2.0 / len(batch)) * resid

    grads = GradientSet()
    if config.uses_mlp:
        g = gpred[:, None]
        for i in range(len(params.regression) - 1, -1, -1):
            layer = params.regression[i]
            g, gw, gb = dense_backward(layer, cache["mlp_inputs"][i], g)
            grads.dense[f"regression.{i}.weights"] = gw
            grads.dense[f"regression.{i}.bias"] = gb
        half = cache["p"].shape[1]
        dp, dq = concat_backward(g, half)
    else:
        dp, dq = dot_backward(gpred, cache["p"], cache["q"])

    if config.is_variational:
        dmu_u, dlv_u = variational_backward(dp, cache["lv_u"], cache["eps_u"])
        dmu_i, dlv_i = variational_backward(dq, cache["lv_i"], cache["eps_i"])
        dv_m, gw, gb = dense_backward(params.user_head.mean, cache["v"], dmu_u)
        grads.dense["user_head.mean.weights"] = gw
        grads.dense["user_head.mean.bias"] = gb
        dv_s, gw, gb = dense_backward(params.user_head.logvar, cache["v"], dlv_u)
        grads.dense["user_head.logvar.weights"] = gw
        grads.dense["user_head.logvar.bias"] = gb
        dw_m, gw, gb = dense_backward(params.item_head.mean, cache["w"], dmu_i)
        grads.dense["item_head.mean.weights"] = gw
        grads.dense["item_head.mean.bias"] = gb
        dw_s, gw, gb = dense_backward(params.item_head.logvar, cache["w"], dlv_i)
        grads.dense["item_head.logvar.weights"] = gw
        grads.dense["item_head.logvar.bias"] = gb
        dv = dv_m + dv_s
        dw = dw_m + dw_s
    else:
        dv, dw = dp, dq

    grads.embedding["user_embedding.weights"] = embedding_backward(batch.user_ids, dv)
    grads.embedding["item_embedding.weights"] = embedding_backward(batch.item_ids, dw)
    return loss, grads


def predict(
    params: ModelParams,
    config: ModelConfig,
    user_ids: np.ndarray,
    item_ids: np.ndarray,
    rng: RngState | None = None,
    n_samples: int | None = None,
    clip: bool = True,
) -> np.ndarray:
    """Averaged predictions for (user, item) pairs.

    Variational models average ``n_samples`` stochastic passes (default
    from the config); deterministic architectures need a single pass.
    With ``clip=True`` the result is clamped to the configured rating
    scale, which is a reporting convention and never applies in training.
    """
    user_ids = np.asarray(user_ids, dtype=np.int64)
    item_ids = np.asarray(item_ids, dtype=np.int64)
    if user_ids.shape != item_ids.shape:
        raise DimensionError(
            f"user and item id arrays differ: {user_ids.shape} vs {item_ids.shape}"
        )
    if n_samples is None:
        n_samples = config.n_prediction_samples
    if n_samples <= 0:
        raise ConfigError(f"n_samples must be positive, got {n_samples}")

    total = user_ids.shape[0]
    out = np.empty(total)
    for lo in range(0, total, _PREDICT_CHUNK):
        hi = min(lo + _PREDICT_CHUNK, total)
        u, it = user_ids[lo:hi], item_ids[lo:hi]
        if config.is_variational:
            if rng is None:
                raise ConfigError("predicting with a variational model needs an rng")
            acc = np.zeros(hi - lo)
            for _ in range(n_samples):
                eps = draw_eps(config, hi - lo, rng)
                preds, _ = _forward_cached(params, config, u, it, eps)
                acc += preds
            out[lo:hi] = acc / n_samples
        else:
            preds, _ = _forward_cached(params, config, u, it, None)
            out[lo:hi] = preds

    if clip and config.rating_range is not None:
        lo_r, hi_r = config.rating_range
        out = np.clip(out, lo_r, hi_r)
    return out


@dataclass
class FitResult:
    epochs: int
    epoch_losses: list[float]
    seconds: float


def train_model(
    params: ModelParams,
    config: ModelConfig,
    train: RatingsDataset,
    sample_seed: int,
) -> FitResult:
    """Mini-batch Adam over the training split; mutates ``params`` in place.

    One continuous noise stream (derived from the sampling seed) covers
    all epochs; batch order reshuffles per (seed, epoch).
    """
    flat = params.flat()
    adam = AdamState(flat, learning_rate=config.learning_rate)
    eps_rng = RngState(derive_seed(sample_seed, _EPS_TAG))
    epoch_losses: list[float] = []
    started = time.perf_counter()
    for epoch in range(config.epochs):
        weighted = 0.0
        for batch in batches(train, config.batch_size, sample_seed, epoch):
            loss, grads = loss_and_grads(params, config, batch, eps_rng)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite training loss at epoch {epoch} "
                    f"({config.architecture}, lr={config.learning_rate})"
                )
            adam_update(flat, grads, adam)
            weighted += loss * len(batch)
        epoch_losses.append(weighted / len(train))
    return FitResult(
        epochs=config.epochs,
        epoch_losses=epoch_losses,
        seconds=time.perf_counter() - started,
    )


def save_checkpoint(path, config: ModelConfig, params: ModelParams) -> str:
    """Write a single self-describing .npz with config, version, and arrays."""
    path = str(path)
    if not path.endswith(".npz"):
        path += ".npz"
    arrays = {f"param::{k}": v for k, v in params.flat().items()}
    np.savez(
        path,
        format_version=np.array(CHECKPOINT_VERSION),
        config_json=np.array(json.dumps(config.to_dict(), sort_keys=True)),
        **arrays,
    )
    return path


def load_checkpoint(path) -> tuple[ModelConfig, ModelParams]:
    """Load a checkpoint; the round trip is bit-exact on every array."""
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    with archive:
        names = set(archive.files)
        if "format_version" not in names or "config_json" not in names:
            raise CheckpointError(f"{path} is not a model checkpoint")
        version = str(archive["format_version"])
        if version.split(".")[0] != CHECKPOINT_VERSION.split(".")[0]:
            raise CheckpointError(
                f"checkpoint version {version} not supported (expected major "
                f"{CHECKPOINT_VERSION.split('.')[0]})"
            )
        config = ModelConfig.from_dict(json.loads(str(archive["config_json"])))
        params = build_model(config, RngState(0))
        flat = params.flat()
        stored = {n[len("param::"):] for n in names if n.startswith("param::")}
        if stored != set(flat):
            missing = sorted(set(flat) - stored)
            extra = sorted(stored - set(flat))
            raise CheckpointError(
                f"checkpoint structure mismatch: missing {missing}, unexpected {extra}"
            )
        for name, target in flat.items():
            value = archive[f"param::{name}"]
            if value.shape != target.shape:
                raise CheckpointError(
                    f"parameter {name!r}: stored shape {value.shape} != expected {target.shape}"
                )
            target[...] = value
    return config, params
