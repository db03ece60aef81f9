"""Denoising autoencoder over vectorized adjacency powers.

The encoder maps x = vec(A^r) (scaled to [0,1] by a global max recorded in
the model) to y = s(Wx + b); the decoder reconstructs z = s(W'y + b').
Training minimizes the mean squared reconstruction error of the CLEAN input
from a corrupted one: each epoch every graph is re-corrupted at the edge
level (remove/add an equal number of edges), its A^r recomputed, and plain
mini-batch SGD takes one step per batch with gradients from
backpropagation.  Everything is deterministic given the config seed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from graphemb.errors import DataError, NumericalError
from graphemb.graphs import (Graph, GraphCollection, GraphVector,
                             LAYOUT_UPPER, LAYOUTS, adjacency_power,
                             vector_length, vectorize)

ACTIVATIONS = ("sigmoid", "tanh", "identity")
DTYPES = ("float32", "float64")


def _sigmoid(u: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def activation_fn(name: str):
    """(f, f' expressed through the output y) for an activation name."""
    if name == "sigmoid":
        return _sigmoid, lambda y: y * (1.0 - y)
    if name == "tanh":
        return np.tanh, lambda y: 1.0 - y * y
    if name == "identity":
        return lambda u: u, lambda y: np.ones_like(y)
    raise DataError(f"unknown activation {name!r}")


@dataclass(frozen=True)
class DaeConfig:
    """Hyperparameters of the autoencoder.

    ``hidden_dim`` may not exceed ``input_dim`` (equality is allowed so a
    full-capacity plain autoencoder remains constructible; the CLI enforces
    the strict compression contract).  ``dtype`` selects the training
    precision; float32 is the default, float64 is available where tight
    numeric tolerances matter.
    """

    input_dim: int
    hidden_dim: int = 128
    activation: str = "sigmoid"
    noise_rate: float = 0.05
    learning_rate: float = 0.01
    batch_size: int = 32
    epochs: int = 200
    seed: int = 0
    tie_weights: bool = False
    dtype: str = "float32"

    def __post_init__(self):
        if not isinstance(self.input_dim, int) or self.input_dim < 1:
            raise DataError(f"input_dim must be a positive int, "
                            f"got {self.input_dim!r}")
        if not isinstance(self.hidden_dim, int) or self.hidden_dim < 1:
            raise DataError(f"hidden_dim must be a positive int, "
                            f"got {self.hidden_dim!r}")
        if self.hidden_dim > self.input_dim:
            raise DataError(f"hidden_dim {self.hidden_dim} exceeds "
                            f"input_dim {self.input_dim}")
        if self.activation not in ACTIVATIONS:
            raise DataError(f"unknown activation {self.activation!r}")
        if not (0.0 <= self.noise_rate < 1.0):
            raise DataError(f"noise_rate must be in [0, 1), "
                            f"got {self.noise_rate!r}")
        if not (self.learning_rate > 0):
            raise DataError(f"learning_rate must be > 0, "
                            f"got {self.learning_rate!r}")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise DataError(f"batch_size must be a positive int, "
                            f"got {self.batch_size!r}")
        if not isinstance(self.epochs, int) or self.epochs < 0:
            raise DataError(f"epochs must be a nonnegative int, "
                            f"got {self.epochs!r}")
        if self.dtype not in DTYPES:
            raise DataError(f"dtype must be one of {DTYPES}, "
                            f"got {self.dtype!r}")


@dataclass(frozen=True)
class DaeModel:
    """Trained (or hand-built) autoencoder parameters.

    ``w_enc`` is d x input_dim, ``w_dec`` input_dim x d; ``power_r`` and
    ``layout`` record the preprocessing that produced the training inputs so
    inference can rebuild them.
    """

    w_enc: np.ndarray
    b_enc: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray
    config: DaeConfig
    preprocess_scale: float
    power_r: int = 3
    layout: str = LAYOUT_UPPER

    def __post_init__(self):
        cfg = self.config
        d, D = cfg.hidden_dim, cfg.input_dim
        arrays = {}
        for name, arr, shape in (("w_enc", self.w_enc, (d, D)),
                                 ("b_enc", self.b_enc, (d,)),
                                 ("w_dec", self.w_dec, (D, d)),
                                 ("b_dec", self.b_dec, (D,))):
            a = np.asarray(arr, dtype=np.dtype(cfg.dtype))
            if a.shape != shape:
                raise DataError(f"{name} has shape {a.shape}, "
                                f"expected {shape}")
            if not np.all(np.isfinite(a)):
                raise DataError(f"{name} has non-finite entries")
            a = np.array(a, copy=True)
            a.setflags(write=False)
            arrays[name] = a
        if not (self.preprocess_scale > 0):
            raise DataError(f"preprocess_scale must be > 0, "
                            f"got {self.preprocess_scale!r}")
        if cfg.tie_weights and not np.array_equal(arrays["w_dec"],
                                                  arrays["w_enc"].T):
            raise DataError("tie_weights set but w_dec != w_enc.T")
        if not isinstance(self.power_r, int) or self.power_r < 1:
            raise DataError(f"power_r must be a positive int, "
                            f"got {self.power_r!r}")
        if self.layout not in LAYOUTS:
            raise DataError(f"unknown layout {self.layout!r}")
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    def fingerprint(self) -> str:
        """Stable hash of everything that determines encoder output."""
        h = hashlib.sha256()
        for a in (self.w_enc, self.b_enc, self.w_dec, self.b_dec):
            h.update(np.ascontiguousarray(a, dtype=np.float64).tobytes())
        meta = (f"{self.config.activation}|{self.preprocess_scale!r}|"
                f"{self.power_r}|{self.layout}")
        h.update(meta.encode())
        return h.hexdigest()[:16]


def _upper_edge_split(A: np.ndarray):
    """Flat indices (into the strict-upper pair list) of present and absent
    pairs."""
    n = A.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    w = A[iu, ju]
    present = np.flatnonzero(w != 0)
    absent = np.flatnonzero(w == 0)
    return iu, ju, present, absent


def _corrupt_adjacency(A: np.ndarray, iu, ju, present, absent,
                       noise_rate: float, rng: np.random.Generator
                       ) -> np.ndarray:
    """Shared corruption kernel: remove k random edges, add k random
    absent pairs at weight 1, k = floor(noise_rate * |E|) capped by the
    number of absent pairs."""
    k = int(noise_rate * len(present))
    k = min(k, len(absent))
    out = np.array(A, copy=True)
    if k == 0:
        return out
    rem = rng.choice(len(present), size=k, replace=False)
    add = rng.choice(len(absent), size=k, replace=False)
    ri, rj = iu[present[rem]], ju[present[rem]]
    ai, aj = iu[absent[add]], ju[absent[add]]
    out[ri, rj] = 0.0
    out[rj, ri] = 0.0
    out[ai, aj] = 1.0
    out[aj, ai] = 1.0
    return out


def corrupt(g: Graph, noise_rate: float, rng: np.random.Generator) -> Graph:
    """One draw from the corruption process: remove a floor(noise_rate*|E|)
    uniform subset of edges and add an equally sized uniform subset of
    absent pairs at weight 1.  Edge count is preserved exactly."""
    if not (0.0 <= noise_rate < 1.0):
        raise DataError(f"noise_rate must be in [0, 1), got {noise_rate!r}")
    iu, ju, present, absent = _upper_edge_split(g.adjacency)
    A = _corrupt_adjacency(g.adjacency, iu, ju, present, absent,
                           noise_rate, rng)
    return Graph(A, g.node_ids)


def _as_input_array(x, input_dim: int) -> np.ndarray:
    data = x.data if isinstance(x, GraphVector) else np.asarray(
        x, dtype=np.float64)
    if data.ndim != 1 or len(data) != input_dim:
        raise DataError(f"input has length {data.shape}, "
                        f"expected ({input_dim},)")
    return np.asarray(data, dtype=np.float64)


def encode(model: DaeModel, x) -> np.ndarray:
    """y = s(W (x / preprocess_scale) + b).  ``x`` is a GraphVector or a raw
    1-D array of length input_dim; output is float64."""
    data = _as_input_array(x, model.config.input_dim)
    f, _ = activation_fn(model.config.activation)
    xs = (data / model.preprocess_scale).astype(model.w_enc.dtype)
    y = f(model.w_enc @ xs + model.b_enc)
    return np.asarray(y, dtype=np.float64)


def decode(model: DaeModel, y) -> np.ndarray:
    """z = s(W' y + b'), in the scaled input space; output is float64."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or len(y) != model.config.hidden_dim:
        raise DataError(f"code has length {y.shape}, expected "
                        f"({model.config.hidden_dim},)")
    f, _ = activation_fn(model.config.activation)
    z = f(model.w_dec @ y.astype(model.w_dec.dtype) + model.b_dec)
    return np.asarray(z, dtype=np.float64)


def clean_inputs(collection: GraphCollection, r: int,
                 layout: str = LAYOUT_UPPER) -> np.ndarray:
    """Stacked unscaled vec(A_i^r) rows for a collection (float64)."""
    rows = [vectorize(adjacency_power(g, r), layout, power=r).data
            for g in collection]
    return np.stack(rows)


def _gather_vectorize(P: np.ndarray, layout: str) -> np.ndarray:
    """Vectorize a stack of symmetric matrices (B, n, n) -> (B, D)."""
    n = P.shape[1]
    if layout == LAYOUT_UPPER:
        il, jl = np.tril_indices(n)
        return P[:, jl, il]
    return P.transpose(0, 2, 1).reshape(P.shape[0], n * n)


def train(collection: GraphCollection, r: int = 3,
          layout: str = LAYOUT_UPPER, cfg: DaeConfig | None = None
          ) -> tuple[DaeModel, np.ndarray]:
    """Fit the denoising autoencoder on a collection.

    Returns (model, per-epoch mean loss).  The loss is the mean over
    examples of the squared reconstruction error of the clean scaled input
    from that epoch's corrupted version.  Deterministic given collection
    order and cfg.seed.
    """
    if layout not in LAYOUTS:
        raise DataError(f"unknown layout {layout!r}")
    n = collection.n_nodes
    D = vector_length(n, layout)
    if cfg is None:
        cfg = DaeConfig(input_dim=D, hidden_dim=min(128, max(1, D - 1)))
    if cfg.input_dim != D:
        raise DataError(f"cfg.input_dim={cfg.input_dim} but the collection "
                        f"vectorizes to length {D}")
    dtype = np.dtype(cfg.dtype)
    m = len(collection)

    A_clean = np.stack([g.adjacency for g in collection])
    X_raw = _power_vectorize(A_clean.astype(dtype), r, layout)
    scale = float(np.asarray(X_raw, dtype=np.float64).max())
    if scale <= 0:
        scale = 1.0
    X = (X_raw / dtype.type(scale)).astype(dtype)

    iu, ju = np.triu_indices(n, k=1)
    w_up = A_clean[:, iu, ju]
    presents = [np.flatnonzero(w_up[i] != 0) for i in range(m)]
    absents = [np.flatnonzero(w_up[i] == 0) for i in range(m)]

    rng = np.random.default_rng(cfg.seed)
    d = cfg.hidden_dim
    lim = np.sqrt(6.0 / (D + d))
    w_enc = rng.uniform(-lim, lim, size=(d, D)).astype(dtype)
    if cfg.tie_weights:
        w_dec = w_enc.T
    else:
        w_dec = rng.uniform(-lim, lim, size=(D, d)).astype(dtype)
    b_enc = np.zeros(d, dtype=dtype)
    b_dec = np.zeros(D, dtype=dtype)
    f, dfy = activation_fn(cfg.activation)
    lr = dtype.type(cfg.learning_rate)

    losses = np.zeros(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = rng.permutation(m)
        sq_sum = 0.0
        for start in range(0, m, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            B = len(idx)
            Ab = np.array(A_clean[idx], copy=True)
            if cfg.noise_rate > 0:
                for bi, gi in enumerate(idx):
                    Ab[bi] = _corrupt_adjacency(Ab[bi], iu, ju,
                                                presents[gi], absents[gi],
                                                cfg.noise_rate, rng)
            Xt = _power_vectorize(Ab.astype(dtype), r, layout)
            Xt /= dtype.type(scale)

            y = f(Xt @ w_enc.T + b_enc)
            z = f(y @ w_dec.T + b_dec)
            err = z - X[idx]
            sq_sum += float(np.asarray(err, dtype=np.float64).ravel()
                            @ np.asarray(err, dtype=np.float64).ravel())
            delta2 = (dtype.type(2.0 / B)) * err * dfy(z)
            g_wdec = delta2.T @ y
            g_bdec = delta2.sum(axis=0)
            delta1 = (delta2 @ w_dec) * dfy(y)
            g_wenc = delta1.T @ Xt
            g_benc = delta1.sum(axis=0)
            if cfg.tie_weights:
                w_enc = w_enc - lr * (g_wenc + g_wdec.T)
                w_dec = w_enc.T
            else:
                w_enc = w_enc - lr * g_wenc
                w_dec = w_dec - lr * g_wdec
            b_enc = b_enc - lr * g_benc
            b_dec = b_dec - lr * g_bdec
        losses[epoch] = sq_sum / m
        if not np.isfinite(losses[epoch]):
            raise NumericalError(
                f"training diverged at epoch {epoch}: non-finite loss "
                f"(learning rate {cfg.learning_rate} too high?)")

    model = DaeModel(w_enc, b_enc, w_dec, b_dec, cfg, scale,
                     power_r=r, layout=layout)
    return model, losses


def _power_vectorize(Ab: np.ndarray, r: int, layout: str) -> np.ndarray:
    """vec(A^r) for a stack of adjacency matrices (B, n, n) -> (B, D)."""
    P = Ab
    for _ in range(r - 1):
        P = P @ Ab
    if r > 1:
        P = (P + P.transpose(0, 2, 1)) / 2
    return _gather_vectorize(P, layout)


def _loss_and_grads(model64: dict, activation: str, xs: np.ndarray):
    """Single-example loss and analytic parameter gradients in float64.

    ``xs`` is the scaled input; the reconstruction target is ``xs`` itself.
    Loss = ||z - xs||^2 (no batch averaging).
    """
    f, dfy = activation_fn(activation)
    w_enc, b_enc = model64["w_enc"], model64["b_enc"]
    w_dec, b_dec = model64["w_dec"], model64["b_dec"]
    y = f(w_enc @ xs + b_enc)
    z = f(w_dec @ y + b_dec)
    err = z - xs
    loss = float(err @ err)
    delta2 = 2.0 * err * dfy(z)
    g_wdec = np.outer(delta2, y)
    g_bdec = delta2
    delta1 = (w_dec.T @ delta2) * dfy(y)
    g_wenc = np.outer(delta1, xs)
    g_benc = delta1
    return loss, {"w_enc": g_wenc, "b_enc": g_benc,
                  "w_dec": g_wdec, "b_dec": g_bdec}


def finite_diff_check(model: DaeModel, x, epsilon: float = 1e-5) -> float:
    """Max relative error between backprop gradients and central finite
    differences of the single-example reconstruction loss.

    Runs in float64 regardless of the model dtype so the central
    differences are meaningful.  With tied weights the encoder matrix is
    the free parameter; its gradient combines both layer contributions.
    """
    if not (1e-7 <= epsilon <= 1e-3):
        raise DataError(f"epsilon must be in [1e-7, 1e-3], got {epsilon!r}")
    xs = _as_input_array(x, model.config.input_dim) / model.preprocess_scale
    tied = model.config.tie_weights
    params = {"w_enc": np.asarray(model.w_enc, dtype=np.float64).copy(),
              "b_enc": np.asarray(model.b_enc, dtype=np.float64).copy(),
              "w_dec": np.asarray(model.w_dec, dtype=np.float64).copy(),
              "b_dec": np.asarray(model.b_dec, dtype=np.float64).copy()}

    def loss_at(p):
        q = dict(p)
        if tied:
            q["w_dec"] = q["w_enc"].T.copy()
        return _loss_and_grads(q, model.config.activation, xs)[0]

    _, grads = _loss_and_grads(params, model.config.activation, xs)
    if tied:
        grads = {"w_enc": grads["w_enc"] + grads["w_dec"].T,
                 "b_enc": grads["b_enc"], "b_dec": grads["b_dec"]}

    worst = 0.0
    for name, ga in grads.items():
        gn = np.zeros_like(ga)
        base = params[name]
        it = np.nditer(base, flags=["multi_index"])
        for _ in it:
            k = it.multi_index
            orig = base[k]
            base[k] = orig + epsilon
            lp = loss_at(params)
            base[k] = orig - epsilon
            lm = loss_at(params)
            base[k] = orig
            gn[k] = (lp - lm) / (2.0 * epsilon)
        denom = np.linalg.norm(ga) + np.linalg.norm(gn)
        if denom == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(ga - gn) / denom))
    return worst


def default_config_for(collection: GraphCollection, r: int = 3,
                       layout: str = LAYOUT_UPPER, **overrides) -> DaeConfig:
    """DaeConfig with input_dim filled in from the collection geometry."""
    D = vector_length(collection.n_nodes, layout)
    hidden = overrides.pop("hidden_dim", min(128, max(1, D - 1)))
    return DaeConfig(input_dim=D, hidden_dim=hidden, **overrides)
