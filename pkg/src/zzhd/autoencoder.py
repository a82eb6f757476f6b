"""Two-layer autoencoder with hand-written gradients and optimizers.

Encoder and decoder are single fully-connected layers through a width-2
bottleneck; the output layer is linear. Everything (init, backprop, Adam,
SGD, batching) is seeded and deterministic.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError, InternalError

LATENT_DIM = 2
STD_FLOOR = 1e-8
MODEL_FORMAT_VERSION = 1


@dataclass
class TrainConfig:
    seed: int = 0
    learning_rate: float = 1e-3
    epochs: int = 500
    batch_size: int = 32
    optimizer: str = "adam"

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer: {self.optimizer!r}")
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ConfigError("epochs, batch_size, and learning_rate must be positive")


@dataclass
class AEModel:
    enc_w: np.ndarray
    enc_b: np.ndarray
    dec_w: np.ndarray
    dec_b: np.ndarray
    activation: str = "tanh"

    @property
    def input_dim(self) -> int:
        return self.enc_w.shape[1]

    def copy(self) -> "AEModel":
        return AEModel(
            self.enc_w.copy(), self.enc_b.copy(),
            self.dec_w.copy(), self.dec_b.copy(), self.activation,
        )


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray


def init_model(input_dim: int, seed: int = 0, activation: str = "tanh") -> AEModel:
    """Uniform +-1/sqrt(fan_in) weights, zero biases, seeded."""
    if activation not in ("tanh", "identity"):
        raise ConfigError(f"unknown activation: {activation!r}")
    if input_dim < 1:
        raise ConfigError("input_dim must be positive")
    rng = np.random.default_rng(seed)
    enc_scale = 1.0 / np.sqrt(input_dim)
    dec_scale = 1.0 / np.sqrt(LATENT_DIM)
    enc_w = rng.uniform(-enc_scale, enc_scale, size=(LATENT_DIM, input_dim))
    dec_w = rng.uniform(-dec_scale, dec_scale, size=(input_dim, LATENT_DIM))
    return AEModel(enc_w, np.zeros(LATENT_DIM), dec_w, np.zeros(input_dim), activation)


def _as_batch(x: np.ndarray):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def forward(model: AEModel, x: np.ndarray):
    """Reconstruction and latent code; accepts one vector or a batch."""
    batch, squeeze = _as_batch(x)
    z = batch @ model.enc_w.T + model.enc_b
    hidden = np.tanh(z) if model.activation == "tanh" else z
    recon = hidden @ model.dec_w.T + model.dec_b
    if squeeze:
        return recon[0], hidden[0]
    return recon, hidden


def loss(model: AEModel, x: np.ndarray) -> float:
    """Mean squared reconstruction error over all entries."""
    batch, _ = _as_batch(x)
    recon, _ = forward(model, batch)
    return float(np.mean((recon - batch) ** 2))


def score_vectors(model: AEModel, x: np.ndarray) -> np.ndarray:
    """Per-row mean squared reconstruction error."""
    batch, _ = _as_batch(x)
    recon, _ = forward(model, batch)
    return np.mean((recon - batch) ** 2, axis=1)


def gradients(model: AEModel, x: np.ndarray) -> dict:
    """Analytic gradients of loss() with respect to every parameter."""
    batch, _ = _as_batch(x)
    n_entries = batch.size
    z = batch @ model.enc_w.T + model.enc_b
    hidden = np.tanh(z) if model.activation == "tanh" else z
    recon = hidden @ model.dec_w.T + model.dec_b
    g_out = 2.0 * (recon - batch) / n_entries
    d_hidden = g_out @ model.dec_w
    d_z = d_hidden * (1.0 - hidden ** 2) if model.activation == "tanh" else d_hidden
    return {
        "enc_w": d_z.T @ batch,
        "enc_b": d_z.sum(axis=0),
        "dec_w": g_out.T @ hidden,
        "dec_b": g_out.sum(axis=0),
    }


def train(model: AEModel, data: np.ndarray, cfg: TrainConfig):
    """Mini-batch training; returns (trained copy, per-epoch mean loss).

    Every epoch reshuffles the full dataset with the seeded generator and
    keeps the final partial batch. Non-finite losses abort with a pointer
    at the learning rate rather than continuing silently.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ConfigError("training data must be a non-empty 2-d array")
    if data.shape[1] != model.input_dim:
        raise ConfigError("training data width does not match the model")
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    params = {"enc_w": model.enc_w, "enc_b": model.enc_b,
              "dec_w": model.dec_w, "dec_b": model.dec_b}
    adam_m = {k: np.zeros_like(v) for k, v in params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    history = []
    n = data.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = data[order[start:start + cfg.batch_size]]
            batch_loss = loss(model, batch)
            if not np.isfinite(batch_loss):
                raise InternalError(
                    "training loss is not finite; lower the learning rate"
                )
            total += batch_loss * batch.shape[0]
            grads = gradients(model, batch)
            step += 1
            for key, param in params.items():
                if cfg.optimizer == "sgd":
                    param -= cfg.learning_rate * grads[key]
                else:
                    adam_m[key] = beta1 * adam_m[key] + (1 - beta1) * grads[key]
                    adam_v[key] = beta2 * adam_v[key] + (1 - beta2) * grads[key] ** 2
                    m_hat = adam_m[key] / (1 - beta1 ** step)
                    v_hat = adam_v[key] / (1 - beta2 ** step)
                    param -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        history.append(total / n)
    return model, history


def fit_scaler(data: np.ndarray) -> Scaler:
    """Per-coordinate mean/std with the std floored away from zero."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ConfigError("scaler needs a non-empty 2-d array")
    std = data.std(axis=0)
    return Scaler(data.mean(axis=0), np.maximum(std, STD_FLOOR))


def apply_scaler(scaler: Scaler, x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=float) - scaler.mean) / scaler.std


def invert_scaler(scaler: Scaler, z: np.ndarray) -> np.ndarray:
    return np.asarray(z, dtype=float) * scaler.std + scaler.mean


def config_hash(cfg: TrainConfig) -> str:
    return hashlib.sha256(
        json.dumps(asdict(cfg), sort_keys=True).encode("utf-8")
    ).hexdigest()


def save_model(model: AEModel, scaler: Scaler, cfg: TrainConfig, path: str) -> None:
    """Versioned textual dump of parameters, scaler, and config hash."""
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "activation": model.activation,
        "input_dim": model.input_dim,
        "enc_w": model.enc_w.tolist(),
        "enc_b": model.enc_b.tolist(),
        "dec_w": model.dec_w.tolist(),
        "dec_b": model.dec_b.tolist(),
        "scaler_mean": scaler.mean.tolist(),
        "scaler_std": scaler.std.tolist(),
        "config_hash": config_hash(cfg),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path: str):
    """Returns (model, scaler, payload) from a save_model dump."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load model from {path}: {exc}") from exc
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ConfigError(f"unsupported model format in {path}")
    model = AEModel(
        np.asarray(payload["enc_w"], dtype=float),
        np.asarray(payload["enc_b"], dtype=float),
        np.asarray(payload["dec_w"], dtype=float),
        np.asarray(payload["dec_b"], dtype=float),
        payload["activation"],
    )
    scaler = Scaler(
        np.asarray(payload["scaler_mean"], dtype=float),
        np.asarray(payload["scaler_std"], dtype=float),
    )
    return model, scaler, payload


def write_loss_history(history: list, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("epoch,loss\n")
        for epoch, value in enumerate(history):
            fh.write(f"{epoch},{value!r}\n")
