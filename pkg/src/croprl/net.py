"""Dense feed-forward networks with hand-written reverse-mode gradients.

Small fully-connected nets (relu or tanh hidden layers, linear output) are
all the agents need, so this module implements them directly on numpy arrays
instead of pulling in an autodiff framework. ``backward`` returns the exact
gradient of the forward map for a given upstream gradient, summed over the
batch; callers divide by the batch size when optimizing a mean loss.

Parameters are a list of (W, b) pairs with W of shape (fan_in, fan_out).
``adam_step`` is functional: it returns fresh arrays and never mutates its
inputs. Checkpoints are versioned JSON; float round-tripping through JSON is
exact, so save/load reproduces parameters bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

CHECKPOINT_VERSION = 1

ParamSet = list[tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class MlpSpec:
    sizes: tuple[int, ...]
    hidden_activation: str = "relu"
    output_activation: str = "linear"

    def __post_init__(self):
        if len(self.sizes) < 2 or any(s < 1 for s in self.sizes):
            raise ConfigError("MlpSpec needs >= 2 layers of positive size")
        if self.hidden_activation not in ("relu", "tanh"):
            raise ConfigError(f"unsupported activation {self.hidden_activation!r}")
        if self.output_activation != "linear":
            raise ConfigError("only linear outputs are supported")

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]


def init_params(spec: MlpSpec, rng: np.random.Generator,
                dtype=np.float64) -> ParamSet:
    """Uniform fan-in/fan-out scaling, deterministic for a seeded generator."""
    params: ParamSet = []
    for n_in, n_out in zip(spec.sizes[:-1], spec.sizes[1:]):
        bound = np.sqrt(6.0 / (n_in + n_out))
        w = rng.uniform(-bound, bound, size=(n_in, n_out)).astype(dtype)
        b = np.zeros(n_out, dtype=dtype)
        params.append((w, b))
    return params


def _check_input(spec: MlpSpec, x: np.ndarray, dtype) -> np.ndarray:
    x = np.asarray(x, dtype=dtype)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.n_in:
        raise ShapeError(f"input shape {x.shape} does not match n_in={spec.n_in}")
    return x


def _activate(spec: MlpSpec, z: np.ndarray) -> np.ndarray:
    if spec.hidden_activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def forward(spec: MlpSpec, params: ParamSet, x: np.ndarray) -> np.ndarray:
    """Plain forward pass; 1-D inputs give 1-D outputs."""
    squeeze = np.ndim(x) == 1
    h = _check_input(spec, x, params[0][0].dtype)
    last = len(params) - 1
    for i, (w, b) in enumerate(params):
        z = h @ w + b
        h = z if i == last else _activate(spec, z)
    return h[0] if squeeze else h


def forward_cached(spec: MlpSpec, params: ParamSet, x: np.ndarray
                   ) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass keeping layer inputs and pre-activations for backward."""
    h = _check_input(spec, x, params[0][0].dtype)
    cache = [h]
    last = len(params) - 1
    for i, (w, b) in enumerate(params):
        z = h @ w + b
        cache.append(z)
        h = z if i == last else _activate(spec, z)
        if i != last:
            cache.append(h)
    return h, cache


def backward(spec: MlpSpec, params: ParamSet, cache: list[np.ndarray],
             grad_out: np.ndarray) -> tuple[list[tuple[np.ndarray, np.ndarray]],
                                            np.ndarray]:
    """Exact reverse-mode gradients for a cached forward pass.

    ``grad_out`` is dL/d(output), shape (batch, n_out). Returns per-parameter
    gradients (summed over the batch) and dL/d(input).
    """
    g = np.asarray(grad_out, dtype=params[0][0].dtype)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != (cache[0].shape[0], spec.n_out):
        raise ShapeError(f"upstream gradient shape {g.shape} mismatch")

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(params)  # type: ignore
    delta = g
    for i in range(len(params) - 1, -1, -1):
        w, _ = params[i]
        layer_in = cache[2 * i]
        if i != len(params) - 1:
            z = cache[2 * i + 1]
            if spec.hidden_activation == "relu":
                delta = np.multiply(delta, z > 0.0)
            else:
                h_act = cache[2 * i + 2]
                delta = np.multiply(delta, 1.0 - np.square(h_act))
        grads[i] = (layer_in.T @ delta, delta.sum(axis=0))
        delta = delta @ w.T
    return grads, delta


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 5e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params: ParamSet, lr: float = 5e-5, beta1: float = 0.9,
                   beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps, step=0,
                   m=[(np.zeros_like(w), np.zeros_like(b)) for w, b in params],
                   v=[(np.zeros_like(w), np.zeros_like(b)) for w, b in params])


def _update_array(x, g, m, v, lr, b1, b2, eps, c1, c2):
    m_new = np.empty_like(m)
    np.multiply(m, b1, out=m_new)
    m_new += (1 - b1) * g
    v_new = np.empty_like(v)
    np.multiply(v, b2, out=v_new)
    v_new += (1 - b2) * np.square(g)
    denom = np.sqrt(v_new / c2)
    denom += eps
    x_new = m_new / c1
    x_new /= denom
    x_new *= -lr
    x_new += x
    return x_new, m_new, v_new


def adam_step(params: ParamSet, grads, state: AdamState
              ) -> tuple[ParamSet, AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    for gw, gb in grads:
        # a NaN or paired-infinity anywhere poisons the sum
        if not (np.isfinite(gw.sum()) and np.isfinite(gb.sum())):
            raise FloatingPointError("non-finite gradient in adam_step")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    new_params: ParamSet = []
    new_m, new_v = [], []
    for (w, b), (gw, gb), (mw, mb), (vw, vb) in zip(params, grads, state.m,
                                                    state.v):
        w, mw, vw = _update_array(w, gw, mw, vw, state.lr, b1, b2, state.eps,
                                  c1, c2)
        b, mb, vb = _update_array(b, gb, mb, vb, state.lr, b1, b2, state.eps,
                                  c1, c2)
        new_params.append((w, b))
        new_m.append((mw, mb))
        new_v.append((vw, vb))
    return new_params, AdamState(lr=state.lr, beta1=b1, beta2=b2,
                                 eps=state.eps, step=t, m=new_m, v=new_v)


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------

def net_to_dict(spec: MlpSpec, params: ParamSet,
                adam: AdamState | None = None) -> dict:
    out = {
        "version": CHECKPOINT_VERSION,
        "dtype": params[0][0].dtype.name,
        "spec": {"sizes": list(spec.sizes),
                 "hidden_activation": spec.hidden_activation,
                 "output_activation": spec.output_activation},
        "params": [{"w": w.ravel().tolist(), "b": b.tolist(),
                    "shape": list(w.shape)} for w, b in params],
    }
    if adam is not None:
        out["adam"] = {
            "lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2,
            "eps": adam.eps, "step": adam.step,
            "m": [{"w": mw.ravel().tolist(), "b": mb.tolist()}
                  for mw, mb in adam.m],
            "v": [{"w": vw.ravel().tolist(), "b": vb.tolist()}
                  for vw, vb in adam.v],
        }
    return out


def net_from_dict(data: dict) -> tuple[MlpSpec, ParamSet, AdamState | None]:
    if data.get("version") != CHECKPOINT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {data.get('version')}")
    spec = MlpSpec(sizes=tuple(data["spec"]["sizes"]),
                   hidden_activation=data["spec"]["hidden_activation"],
                   output_activation=data["spec"]["output_activation"])
    dtype = np.dtype(data.get("dtype", "float64"))
    params: ParamSet = []
    for entry in data["params"]:
        shape = tuple(entry["shape"])
        params.append((np.asarray(entry["w"], dtype=dtype).reshape(shape),
                       np.asarray(entry["b"], dtype=dtype)))
    adam = None
    if "adam" in data:
        a = data["adam"]
        adam = AdamState(
            lr=a["lr"], beta1=a["beta1"], beta2=a["beta2"], eps=a["eps"],
            step=a["step"],
            m=[(np.asarray(e["w"], dtype=dtype).reshape(p[0].shape),
                np.asarray(e["b"], dtype=dtype))
               for e, p in zip(a["m"], params)],
            v=[(np.asarray(e["w"], dtype=dtype).reshape(p[0].shape),
                np.asarray(e["b"], dtype=dtype))
               for e, p in zip(a["v"], params)])
    return spec, params, adam


def save_net(path, spec: MlpSpec, params: ParamSet,
             adam: AdamState | None = None, seed: int | None = None) -> None:
    data = net_to_dict(spec, params, adam)
    if seed is not None:
        data["seed"] = seed
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_net(path) -> tuple[MlpSpec, ParamSet, AdamState | None]:
    with open(path) as fh:
        return net_from_dict(json.load(fh))
