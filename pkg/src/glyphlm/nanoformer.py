"""Minimal decoder-only transformer with hand-written forward and backward.

Pre-norm residual blocks (x += Attn(LN(x)); x += MLP(LN(x))), learned
absolute positional embeddings, causal multi-head attention with
1/sqrt(d_head) scaling, exact-erf GELU, a final layer norm, and an untied
output head.  Every parameter tensor carries a trainable flag; in the
frozen embedding modes the token embedding receives no gradient, has no
optimizer state, and stays bitwise constant through training.

Training is plain Adam with linear warmup then constant learning rate,
cross-entropy over non-PAD targets, gradient accumulation, and seeded
counter-based batch sampling (Philox keyed by seed and step), which makes
single-threaded runs bitwise reproducible and lets a resumed run replay
the exact trajectory of an uninterrupted one.

Checkpoint format (little-endian):

    magic       4 bytes b"BVVC"
    version     u32
    d_model, n_layers, n_heads: u32 each
    vocab_size  u64
    block_size  u32
    mode        u8 (0=frozen_visual 1=frozen_random 2=trainable)
    step        u64
    seed        u64
    n_tensors   u32
    per tensor: name_len u16, name utf-8, trainable u8, ndim u8,
                dims u32 * ndim, data f32

Adam moment buffers are appended as ordinary tensors named
``adam.m.<name>`` / ``adam.v.<name>`` so a checkpoint restart is exact.
"""

from __future__ import annotations

import csv
import struct
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erf

from .formats import (
    BadMagicError,
    FileFormatError,
    TruncatedFileError,
    VersionMismatchError,
)

MODE_FROZEN_VISUAL = "frozen_visual"
MODE_FROZEN_RANDOM = "frozen_random"
MODE_TRAINABLE = "trainable"
MODES = (MODE_FROZEN_VISUAL, MODE_FROZEN_RANDOM, MODE_TRAINABLE)

PAD_ID = 0
LN_EPS = 1e-5
INIT_STD = 0.02

CKPT_MAGIC = b"BVVC"
CKPT_VERSION = 1
_CKPT_HEADER = struct.Struct("<4sIIIIQIBQQI")


class GradientError(RuntimeError):
    """A non-finite gradient was encountered; the step was aborted."""


@dataclass(frozen=True)
class ModelConfig:
    d_model: int
    n_layers: int
    n_heads: int
    vocab_size: int
    block_size: int
    embedding_mode: str = MODE_TRAINABLE
    dtype: type = np.float32

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.embedding_mode not in MODES:
            raise ValueError(f"embedding_mode must be one of {MODES}")

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads

    @property
    def frozen_embedding(self) -> bool:
        return self.embedding_mode != MODE_TRAINABLE


class Parameters:
    """Named tensors in declaration order plus per-tensor trainable flags."""

    def __init__(self):
        self.tensors: dict[str, np.ndarray] = {}
        self.trainable: dict[str, bool] = {}

    def add(self, name: str, value: np.ndarray, trainable: bool = True):
        self.tensors[name] = value
        self.trainable[name] = trainable

    def names(self) -> list[str]:
        return list(self.tensors)

    def copy(self) -> "Parameters":
        out = Parameters()
        for name, t in self.tensors.items():
            out.add(name, t.copy(), self.trainable[name])
        return out

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]


def _tensor_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
    )


def init_parameters(config: ModelConfig, seed: int,
                    embedding: np.ndarray | None = None) -> Parameters:
    """Standard init: N(0, 0.02), residual projections scaled 1/sqrt(2L).

    Frozen modes take `embedding` verbatim as the token embedding (required);
    trainable mode initializes it randomly and ignores `embedding`.
    Each tensor draws from its own counter-based stream, so the shared
    tensors are identical across embedding modes at equal seeds.
    """
    d, v, block = config.d_model, config.vocab_size, config.block_size
    dt = config.dtype
    resid_std = INIT_STD / np.sqrt(2.0 * config.n_layers)
    params = Parameters()
    idx = 0

    def draw(shape, std):
        nonlocal idx
        rng = _tensor_rng(seed, idx)
        idx += 1
        return (rng.standard_normal(shape) * std).astype(dt)

    def zeros(shape):
        nonlocal idx
        idx += 1
        return np.zeros(shape, dtype=dt)

    def ones(shape):
        nonlocal idx
        idx += 1
        return np.ones(shape, dtype=dt)

    if config.frozen_embedding:
        if embedding is None:
            raise ValueError(f"mode {config.embedding_mode} requires an embedding matrix")
        if embedding.shape != (v, d):
            raise ValueError(
                f"embedding shape {embedding.shape} does not match (V={v}, d={d})"
            )
        idx += 1
        params.add("tok_emb", embedding.astype(dt), trainable=False)
    else:
        params.add("tok_emb", draw((v, d), INIT_STD), trainable=True)
    params.add("pos_emb", draw((block, d), INIT_STD))

    for layer in range(config.n_layers):
        p = f"layer{layer}."
        params.add(p + "ln1.g", ones(d))
        params.add(p + "ln1.b", zeros(d))
        params.add(p + "attn.w_qkv", draw((d, 3 * d), INIT_STD))
        params.add(p + "attn.b_qkv", zeros(3 * d))
        params.add(p + "attn.w_o", draw((d, d), resid_std))
        params.add(p + "attn.b_o", zeros(d))
        params.add(p + "ln2.g", ones(d))
        params.add(p + "ln2.b", zeros(d))
        params.add(p + "mlp.w_up", draw((d, 4 * d), INIT_STD))
        params.add(p + "mlp.b_up", zeros(4 * d))
        params.add(p + "mlp.w_down", draw((4 * d, d), resid_std))
        params.add(p + "mlp.b_down", zeros(d))
    params.add("ln_f.g", ones(d))
    params.add("ln_f.b", zeros(d))
    params.add("head.w", draw((d, v), INIT_STD))
    return params


# -- primitive layers --------------------------------------------------------


def _layernorm_fwd(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv_std
    return g * xhat + b, (xhat, inv_std)


def _layernorm_bwd(dy, g, cache):
    xhat, inv_std = cache
    n = xhat.shape[-1]
    dg = (dy * xhat).reshape(-1, n).sum(axis=0)
    db = dy.reshape(-1, n).sum(axis=0)
    dxhat = dy * g
    dx = inv_std * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


def _gelu_fwd(x):
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def _gelu_bwd(x, dy):
    cdf = 0.5 * (1.0 + erf(x / np.sqrt(2.0)))
    pdf = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return dy * (cdf + x * pdf)


def _softmax_rows(scores):
    m = scores.max(axis=-1, keepdims=True)
    e = np.exp(scores - m)
    return e / e.sum(axis=-1, keepdims=True)


def _split_heads(t, n_heads):
    b, n, d = t.shape
    return t.reshape(b, n, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(t):
    b, h, n, dh = t.shape
    return t.transpose(0, 2, 1, 3).reshape(b, n, h * dh)


# -- forward / backward ------------------------------------------------------


def forward(params: Parameters, config: ModelConfig, tokens):
    """Run the model on (T,) or (B, T) token ids.

    Returns (logits, cache); logits has shape (..., T, vocab_size). The cache
    holds every intermediate needed by backward().
    """
    tokens = np.asarray(tokens)
    squeeze = tokens.ndim == 1
    if squeeze:
        tokens = tokens[None, :]
    if tokens.ndim != 2:
        raise ValueError("tokens must be a 1-D or 2-D integer array")
    b, t = tokens.shape
    if t > config.block_size:
        raise ValueError(f"sequence length {t} exceeds block_size {config.block_size}")
    if tokens.min() < 0 or tokens.max() >= config.vocab_size:
        raise ValueError("token id out of range")

    ten = params.tensors
    x = ten["tok_emb"][tokens] + ten["pos_emb"][:t]
    causal = np.tril(np.ones((t, t), dtype=bool))
    scale = 1.0 / np.sqrt(config.d_head)

    cache = {"tokens": tokens, "squeeze": squeeze, "layers": [], "x0_shape": x.shape}
    for layer in range(config.n_layers):
        p = f"layer{layer}."
        lc = {"x_in": x}
        a, lc["ln1"] = _layernorm_fwd(x, ten[p + "ln1.g"], ten[p + "ln1.b"])
        lc["a"] = a
        qkv = a @ ten[p + "attn.w_qkv"] + ten[p + "attn.b_qkv"]
        q, k, v = np.split(qkv, 3, axis=-1)
        q = _split_heads(q, config.n_heads)
        k = _split_heads(k, config.n_heads)
        v = _split_heads(v, config.n_heads)
        scores = np.where(causal, (q @ k.transpose(0, 1, 3, 2)) * scale, -np.inf)
        attn = _softmax_rows(scores)
        ctx = attn @ v
        y = _merge_heads(ctx)
        lc.update(q=q, k=k, v=v, attn=attn, y=y)
        x = x + y @ ten[p + "attn.w_o"] + ten[p + "attn.b_o"]

        lc["x_mid"] = x
        m, lc["ln2"] = _layernorm_fwd(x, ten[p + "ln2.g"], ten[p + "ln2.b"])
        lc["m"] = m
        u = m @ ten[p + "mlp.w_up"] + ten[p + "mlp.b_up"]
        g = _gelu_fwd(u)
        lc.update(u=u, g=g)
        x = x + g @ ten[p + "mlp.w_down"] + ten[p + "mlp.b_down"]
        cache["layers"].append(lc)

    cache["x_final"] = x
    f, cache["ln_f"] = _layernorm_fwd(x, ten["ln_f.g"], ten["ln_f.b"])
    cache["f"] = f
    logits = f @ ten["head.w"]
    return (logits[0] if squeeze else logits), cache


def backward(params: Parameters, config: ModelConfig, cache, dlogits) -> dict:
    """Gradients of the scalar loss w.r.t. every trainable tensor."""
    ten = params.tensors
    dlogits = np.asarray(dlogits)
    if cache["squeeze"]:
        dlogits = dlogits[None, :]
    d = config.d_model
    scale = 1.0 / np.sqrt(config.d_head)
    grads: dict[str, np.ndarray] = {}

    def flat(a):
        return a.reshape(-1, a.shape[-1])

    f = cache["f"]
    grads["head.w"] = flat(f).T @ flat(dlogits)
    df = dlogits @ ten["head.w"].T
    dx, dg, db = _layernorm_bwd(df, ten["ln_f.g"], cache["ln_f"])
    grads["ln_f.g"] = dg
    grads["ln_f.b"] = db

    for layer in reversed(range(config.n_layers)):
        p = f"layer{layer}."
        lc = cache["layers"][layer]

        # MLP branch: x_out = x_mid + gelu(ln2(x_mid) @ w_up + b_up) @ w_down + b_down
        dgelu = dx @ ten[p + "mlp.w_down"].T
        grads[p + "mlp.w_down"] = flat(lc["g"]).T @ flat(dx)
        grads[p + "mlp.b_down"] = flat(dx).sum(axis=0)
        du = _gelu_bwd(lc["u"], dgelu)
        grads[p + "mlp.w_up"] = flat(lc["m"]).T @ flat(du)
        grads[p + "mlp.b_up"] = flat(du).sum(axis=0)
        dm = du @ ten[p + "mlp.w_up"].T
        dx_mid, dg2, db2 = _layernorm_bwd(dm, ten[p + "ln2.g"], lc["ln2"])
        grads[p + "ln2.g"] = dg2
        grads[p + "ln2.b"] = db2
        dx = dx + dx_mid

        # attention branch: x_mid = x_in + merge(attn @ v) @ w_o + b_o
        dy = dx @ ten[p + "attn.w_o"].T
        grads[p + "attn.w_o"] = flat(lc["y"]).T @ flat(dx)
        grads[p + "attn.b_o"] = flat(dx).sum(axis=0)
        dctx = _split_heads(dy, config.n_heads)
        attn, v = lc["attn"], lc["v"]
        dattn = dctx @ v.transpose(0, 1, 3, 2)
        dv = attn.transpose(0, 1, 3, 2) @ dctx
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dscores *= scale
        dq = dscores @ lc["k"]
        dk = dscores.transpose(0, 1, 3, 2) @ lc["q"]
        dqkv = np.concatenate(
            [_merge_heads(dq), _merge_heads(dk), _merge_heads(dv)], axis=-1
        )
        grads[p + "attn.w_qkv"] = flat(lc["a"]).T @ flat(dqkv)
        grads[p + "attn.b_qkv"] = flat(dqkv).sum(axis=0)
        da = dqkv @ ten[p + "attn.w_qkv"].T
        dx_in, dg1, db1 = _layernorm_bwd(da, ten[p + "ln1.g"], lc["ln1"])
        grads[p + "ln1.g"] = dg1
        grads[p + "ln1.b"] = db1
        dx = dx + dx_in

    tokens = cache["tokens"]
    t = tokens.shape[1]
    grads["pos_emb"] = np.zeros_like(ten["pos_emb"])
    grads["pos_emb"][:t] = dx.sum(axis=0)
    if params.trainable["tok_emb"]:
        gtok = np.zeros_like(ten["tok_emb"])
        np.add.at(gtok, tokens.reshape(-1), dx.reshape(-1, d))
        grads["tok_emb"] = gtok

    return {n: g for n, g in grads.items() if params.trainable.get(n, False)}


def cross_entropy(logits, targets, pad_id: int = PAD_ID):
    """Mean NLL over non-PAD targets plus d(loss)/d(logits).

    Log-softmax runs in float64 with max subtraction; the gradient is
    (softmax - onehot) / n_included, zero at PAD positions, returned in the
    logits dtype.
    """
    logits = np.asarray(logits)
    targets = np.asarray(targets)
    lead_shape = logits.shape[:-1]
    if targets.shape != lead_shape:
        raise ValueError(f"targets shape {targets.shape} does not match {lead_shape}")
    v = logits.shape[-1]
    flat = logits.reshape(-1, v).astype(np.float64)
    tgt = targets.reshape(-1)
    include = tgt != pad_id
    count = int(include.sum())
    if count == 0:
        raise ValueError("all target positions are PAD")

    m = flat.max(axis=1, keepdims=True)
    z = flat - m
    ez = np.exp(z)
    sum_ez = ez.sum(axis=1, keepdims=True)
    log_probs = z - np.log(sum_ez)
    rows = np.arange(flat.shape[0])
    nll = -log_probs[rows, tgt]
    loss = float(nll[include].mean())

    dflat = ez / sum_ez
    dflat[rows, tgt] -= 1.0
    dflat[~include] = 0.0
    dflat /= count
    return loss, dflat.reshape(logits.shape).astype(logits.dtype)


# -- optimizer ---------------------------------------------------------------


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def init_adam_state(params: Parameters) -> AdamState:
    state = AdamState()
    for name, tensor in params.tensors.items():
        if params.trainable[name]:
            state.m[name] = np.zeros_like(tensor)
            state.v[name] = np.zeros_like(tensor)
    return state


def adam_step(state: AdamState, params: Parameters, grads: dict, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update; frozen tensors are untouched."""
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise GradientError(f"non-finite gradient in {name}; step aborted")
    state.step += 1
    t = state.step
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for name, g in grads.items():
        if not params.trainable.get(name, False):
            continue
        m = state.m[name]
        v = state.v[name]
        m += (1.0 - beta1) * (g - m)
        v += (1.0 - beta2) * (g * g - v)
        update = (m / c1) / (np.sqrt(v / c2) + eps)
        params.tensors[name] -= (lr * update).astype(params.tensors[name].dtype)


# -- training loop -----------------------------------------------------------


@dataclass
class TrainHyper:
    lr: float = 3e-3
    batch_size: int = 8
    steps: int = 1000
    accum: int = 1
    seed: int = 0
    eval_every: int = 250
    warmup: int = 100
    val_fraction: float = 0.1


@dataclass
class TrainResult:
    params: Parameters
    config: ModelConfig
    history: list          # rows: (step, train_loss, val_loss | None, seconds)
    final_val_loss: float
    adam: AdamState
    seed: int


def _split_corpus(tokens: np.ndarray, block_size: int, val_fraction: float):
    n = len(tokens)
    if n < block_size + 1:
        raise ValueError(f"corpus of {n} tokens is shorter than block_size+1")
    n_val = int(n * val_fraction)
    if n_val < block_size + 1 or n - n_val < block_size + 1:
        return tokens, tokens[: block_size + 1]
    return tokens[: n - n_val], tokens[n - n_val :]


def _sample_batch(train_tokens, block_size, batch_size, seed, step, micro):
    gen = np.random.Generator(
        np.random.Philox(key=np.array([seed, step * 1024 + micro], dtype=np.uint64))
    )
    starts = gen.integers(0, len(train_tokens) - block_size, size=batch_size)
    windows = np.stack([train_tokens[s : s + block_size + 1] for s in starts])
    return windows[:, :-1], windows[:, 1:]


def _nll_sum_count(params, config, tokens, batch_size: int = 16):
    span = config.block_size + 1
    n_blocks = len(tokens) // span
    if n_blocks == 0:
        raise ValueError("evaluation set is shorter than one block")
    blocks = tokens[: n_blocks * span].reshape(n_blocks, span)
    total, count = 0.0, 0
    for i in range(0, n_blocks, batch_size):
        chunk = blocks[i : i + batch_size]
        logits, _ = forward(params, config, chunk[:, :-1])
        v = logits.shape[-1]
        flat = logits.reshape(-1, v).astype(np.float64)
        tgt = chunk[:, 1:].reshape(-1)
        include = tgt != PAD_ID
        m = flat.max(axis=1, keepdims=True)
        lse = (m + np.log(np.exp(flat - m).sum(axis=1, keepdims=True)))[:, 0]
        nll = lse - flat[np.arange(flat.shape[0]), tgt]
        total += float(nll[include].sum())
        count += int(include.sum())
    if count == 0:
        raise ValueError("evaluation set contains only PAD targets")
    return total, count


def mean_nll(params, config, tokens, batch_size: int = 16) -> float:
    total, count = _nll_sum_count(params, config, tokens, batch_size)
    return total / count


def perplexity(params, config, tokens, batch_size: int = 16) -> float:
    """exp(mean token NLL) over non-overlapping blocks."""
    return float(np.exp(mean_nll(params, config, tokens, batch_size)))


def train(config: ModelConfig, tokens, hyper: TrainHyper,
          embedding: np.ndarray | None = None, out_dir=None,
          resume_from=None, deterministic: bool = True,
          log_every: int = 0) -> TrainResult:
    """Train on a token array; returns history and final parameters.

    `tokens` is a 1-D integer array.  The last `val_fraction` of it is held
    out; validation loss is computed every `eval_every` steps.  With
    `out_dir` set, writes loss_history.csv, checkpoint.bvvc, and rolling
    eval checkpoints.  Deterministic mode pins BLAS to one thread, making
    the whole run bitwise reproducible for a given seed.
    """
    tokens = np.asarray(tokens, dtype=np.int64)
    train_tokens, val_tokens = _split_corpus(tokens, config.block_size, hyper.val_fraction)

    if resume_from is not None:
        params, config, start_step, seed, adam = load_checkpoint(resume_from)
        if seed != hyper.seed:
            raise ValueError("resume seed does not match checkpoint seed")
        if adam is None:
            adam = init_adam_state(params)
    else:
        params = init_parameters(config, hyper.seed, embedding)
        adam = init_adam_state(params)
        start_step = 0

    if deterministic:
        from threadpoolctl import threadpool_limits
        limiter = threadpool_limits(limits=1)
    else:
        limiter = None

    history: list[tuple] = []
    t0 = time.perf_counter()
    try:
        for step in range(start_step, hyper.steps):
            lr = hyper.lr * min(1.0, (step + 1) / max(1, hyper.warmup))
            acc_grads: dict[str, np.ndarray] = {}
            acc_loss = 0.0
            for micro in range(hyper.accum):
                inputs, targets = _sample_batch(
                    train_tokens, config.block_size, hyper.batch_size,
                    hyper.seed, step, micro,
                )
                logits, cache = forward(params, config, inputs)
                loss, dlogits = cross_entropy(logits, targets)
                grads = backward(params, config, cache, dlogits)
                acc_loss += loss
                for name, g in grads.items():
                    if name in acc_grads:
                        acc_grads[name] += g
                    else:
                        acc_grads[name] = g
            if hyper.accum > 1:
                for g in acc_grads.values():
                    g /= hyper.accum
            adam_step(adam, params, acc_grads, lr)

            done = step + 1
            train_loss = acc_loss / hyper.accum
            val_loss = None
            if done % hyper.eval_every == 0 or done == hyper.steps:
                val_loss = mean_nll(params, config, val_tokens)
                if out_dir is not None:
                    save_checkpoint(
                        _ckpt_path(out_dir), params, config, done, hyper.seed, adam
                    )
            history.append((done, train_loss, val_loss, time.perf_counter() - t0))
            if log_every and done % log_every == 0:
                vtxt = f" val {val_loss:.4f}" if val_loss is not None else ""
                print(f"step {done}/{hyper.steps} loss {train_loss:.4f}{vtxt}")
    finally:
        if limiter is not None:
            limiter.unregister()

    final_val = history[-1][2] if history and history[-1][2] is not None \
        else mean_nll(params, config, val_tokens)
    if out_dir is not None:
        save_checkpoint(_ckpt_path(out_dir), params, config, hyper.steps, hyper.seed, adam)
        write_history_csv(_history_path(out_dir), history, deterministic=deterministic)
    return TrainResult(params=params, config=config, history=history,
                       final_val_loss=final_val, adam=adam, seed=hyper.seed)


def _ckpt_path(out_dir):
    from pathlib import Path
    return Path(out_dir) / "checkpoint.bvvc"


def _history_path(out_dir):
    from pathlib import Path
    return Path(out_dir) / "loss_history.csv"


def write_history_csv(path, history, deterministic: bool = False):
    """CSV columns (step, train_loss, val_loss, seconds).

    Deterministic mode zeroes the wall-clock column so identical runs
    produce identical bytes.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "train_loss", "val_loss", "seconds"])
        for step, tl, vl, sec in history:
            w.writerow([
                step,
                f"{tl:.17g}",
                "" if vl is None else f"{vl:.17g}",
                "0.000" if deterministic else f"{sec:.3f}",
            ])


def read_history_csv(path) -> list[tuple]:
    out = []
    with open(path, newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            out.append((
                int(row[0]),
                float(row[1]),
                float(row[2]) if row[2] else None,
                float(row[3]),
            ))
    return out


def steps_to_threshold(history, threshold: float) -> int | None:
    """First step whose training loss falls below `threshold`."""
    for step, train_loss, _, _ in history:
        if train_loss < threshold:
            return step
    return None


# -- generation --------------------------------------------------------------


def generate(params: Parameters, config: ModelConfig, prompt, n_tokens: int,
             temperature: float = 1.0, seed: int = 0) -> np.ndarray:
    """Autoregressive sampling; temperature 0 means greedy argmax."""
    prompt = np.asarray(prompt, dtype=np.int64)
    if prompt.ndim != 1 or prompt.size == 0:
        raise ValueError("prompt must be a non-empty 1-D id array")
    if prompt.min() < 0 or prompt.max() >= config.vocab_size:
        raise ValueError("prompt id out of range")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    gen = np.random.Generator(
        np.random.Philox(key=np.array([seed, 0], dtype=np.uint64))
    )
    ids = list(prompt)
    for _ in range(n_tokens):
        window = np.array(ids[-config.block_size :], dtype=np.int64)
        logits, _ = forward(params, config, window)
        last = logits[-1].astype(np.float64)
        if temperature == 0.0:
            nxt = int(np.argmax(last))
        else:
            z = last / temperature
            z -= z.max()
            p = np.exp(z)
            p /= p.sum()
            nxt = int(gen.choice(config.vocab_size, p=p))
        ids.append(nxt)
    return np.array(ids[len(prompt) :], dtype=np.int64)


# -- checkpoints -------------------------------------------------------------

_MODE_CODES = {MODE_FROZEN_VISUAL: 0, MODE_FROZEN_RANDOM: 1, MODE_TRAINABLE: 2}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}


def save_checkpoint(path, params: Parameters, config: ModelConfig, step: int,
                    seed: int, adam: AdamState | None = None):
    items: list[tuple[str, np.ndarray, bool]] = [
        (name, params.tensors[name], params.trainable[name])
        for name in params.names()
    ]
    if adam is not None:
        for name in adam.m:
            items.append((f"adam.m.{name}", adam.m[name], False))
            items.append((f"adam.v.{name}", adam.v[name], False))

    with open(path, "wb") as fh:
        fh.write(_CKPT_HEADER.pack(
            CKPT_MAGIC, CKPT_VERSION,
            config.d_model, config.n_layers, config.n_heads,
            config.vocab_size, config.block_size,
            _MODE_CODES[config.embedding_mode],
            step, seed, len(items),
        ))
        for name, tensor, trainable in items:
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<BB", 1 if trainable else 0, tensor.ndim))
            fh.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            fh.write(np.ascontiguousarray(tensor, dtype="<f4").tobytes())


def load_checkpoint(path):
    """Returns (params, config, step, seed, adam_state_or_None)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _CKPT_HEADER.size:
        raise TruncatedFileError("checkpoint shorter than its header")
    (magic, version, d_model, n_layers, n_heads, v_size, block, mode_code,
     step, seed, n_tensors) = _CKPT_HEADER.unpack_from(blob, 0)
    if magic != CKPT_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {CKPT_MAGIC!r}")
    if version != CKPT_VERSION:
        raise VersionMismatchError(f"unsupported checkpoint version {version}")
    if mode_code not in _MODE_NAMES:
        raise FileFormatError(f"unknown embedding mode code {mode_code}")
    config = ModelConfig(
        d_model=d_model, n_layers=n_layers, n_heads=n_heads,
        vocab_size=v_size, block_size=block,
        embedding_mode=_MODE_NAMES[mode_code],
    )

    off = _CKPT_HEADER.size
    params = Parameters()
    adam = AdamState(step=step)
    n = len(blob)
    for _ in range(n_tensors):
        if off + 2 > n:
            raise TruncatedFileError("checkpoint ends inside a tensor header")
        (name_len,) = struct.unpack_from("<H", blob, off)
        off += 2
        if off + name_len + 2 > n:
            raise TruncatedFileError("checkpoint ends inside a tensor header")
        name = blob[off : off + name_len].decode("utf-8")
        off += name_len
        trainable, ndim = struct.unpack_from("<BB", blob, off)
        off += 2
        if off + 4 * ndim > n:
            raise TruncatedFileError("checkpoint ends inside a tensor shape")
        shape = struct.unpack_from(f"<{ndim}I", blob, off)
        off += 4 * ndim
        size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        if off + 4 * size > n:
            raise TruncatedFileError(f"checkpoint ends inside tensor {name!r}")
        data = np.frombuffer(blob, dtype="<f4", count=size, offset=off)
        off += 4 * size
        tensor = data.reshape(shape).copy()
        if name.startswith("adam.m."):
            adam.m[name[len("adam.m."):]] = tensor
        elif name.startswith("adam.v."):
            adam.v[name[len("adam.v."):]] = tensor
        else:
            params.add(name, tensor, bool(trainable))
    if off != n:
        raise FileFormatError(f"trailing data: {n - off} extra bytes")
    has_adam = bool(adam.m)
    return params, config, step, seed, (adam if has_adam else None)
