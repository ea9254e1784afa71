"""The two networks.

Relation classifier (RC): embedding -> 2-layer BiLSTM -> additive
attention -> softmax over relation classes (NONE included).

Soft rule matcher (SRM): word-level attention pooling over raw word
embeddings on both sides, then cosine similarity of the pooled vectors
after rescaling by a trainable diagonal importance matrix.

Both share one embedding table. Sequences are processed as padded
batches in (T, B, ...) layout with carry masking, so padded positions
never influence hidden states or attention.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import Vocabulary, RelationSchema

NEG_INF = -1e9


def init_params(
    vocab: Vocabulary,
    schema: RelationSchema,
    d_h: int = 100,
    d_a: int = 200,
    seed: int = 0,
) -> dict[str, Tensor]:
    """Seeded parameter initialization; d_h is the BiLSTM output width."""
    if d_h % 2:
        raise ValueError("d_h must be even (split across the two directions)")
    rng = np.random.default_rng(seed)
    d_w = vocab.dim
    H = d_h // 2
    n_classes = len(schema)

    def uniform(*shape, scale):
        return Tensor(rng.uniform(-scale, scale, size=shape), requires_grad=True)

    params = {"embeddings": Tensor(vocab.vectors.copy(), requires_grad=True)}
    for layer, in_dim in ((0, d_w), (1, d_h)):
        for direction in ("fw", "bw"):
            prefix = f"lstm{layer}_{direction}"
            s = 1.0 / np.sqrt(H)
            params[f"{prefix}_Wx"] = uniform(in_dim, 4 * H, scale=s)
            params[f"{prefix}_Wh"] = uniform(H, 4 * H, scale=s)
            bias = np.zeros((1, 4 * H))
            bias[:, H : 2 * H] = 1.0  # forget gate starts open
            params[f"{prefix}_b"] = Tensor(bias, requires_grad=True)
    params["rc_A"] = uniform(d_h, d_a, scale=0.1)
    params["rc_v"] = uniform(d_a, 1, scale=0.1)
    params["rc_W"] = uniform(d_h, n_classes, scale=0.1)
    params["srm_B"] = uniform(d_w, d_a, scale=0.1)
    params["srm_u"] = uniform(d_a, 1, scale=0.1)
    params["srm_D"] = Tensor(np.ones((1, d_w)), requires_grad=True)
    return params


def _pad_batch(token_ids: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad id sequences; returns ids (T, B) and mask (T, B) floats."""
    if not token_ids or any(len(t) == 0 for t in token_ids):
        raise ValueError("every sequence in a batch must be nonempty")
    B = len(token_ids)
    T = max(len(t) for t in token_ids)
    ids = np.zeros((T, B), dtype=np.int64)
    mask = np.zeros((T, B), dtype=np.float64)
    for b, seq in enumerate(token_ids):
        ids[: len(seq), b] = seq
        mask[: len(seq), b] = 1.0
    return ids, mask


def _lstm_direction(xs, mask, Wx, Wh, b, reverse: bool):
    """One LSTM direction over a list of (B, in_dim) tensors; returns per-step h."""
    T = len(xs)
    B = xs[0].shape[0]
    H = Wh.shape[0]
    h = Tensor(np.zeros((B, H)))
    c = Tensor(np.zeros((B, H)))
    order = range(T - 1, -1, -1) if reverse else range(T)
    hs: list = [None] * T
    for t in order:
        gates = xs[t] @ Wx + h @ Wh + b
        i = ad.sigmoid(gates[:, 0 * H : 1 * H])
        f = ad.sigmoid(gates[:, 1 * H : 2 * H])
        g = ad.tanh(gates[:, 2 * H : 3 * H])
        o = ad.sigmoid(gates[:, 3 * H : 4 * H])
        c_new = f * c + i * g
        h_new = o * ad.tanh(c_new)
        m = Tensor(mask[t][:, None])
        c = m * c_new + (1.0 - m.values) * c
        h = m * h_new + (1.0 - m.values) * h
        hs[t] = h
    return hs


def _masked_attention(scores_tb: Tensor, mask: np.ndarray) -> Tensor:
    """Softmax over timesteps (axis 0) with padded positions excluded."""
    logits = scores_tb + (mask - 1.0) * -NEG_INF  # adds NEG_INF at padded steps
    return ad.softmax(logits, axis=0)


def _attention_pool(steps: list, mask: np.ndarray, W: Tensor, v: Tensor):
    """Additive attention over per-step (B, d) tensors; returns (weights, pooled)."""
    T = len(steps)
    B, d = steps[0].shape
    stacked = ad.concat(steps, axis=0)  # (T*B, d)
    scores = ad.tanh(stacked @ W) @ v  # (T*B, 1)
    scores_tb = ad.reshape(scores, (T, B))
    alpha = _masked_attention(scores_tb, mask)
    weighted = ad.mul(ad.reshape(stacked, (T, B, d)), ad.reshape(alpha, (T, B, 1)))
    pooled = ad.sum_(weighted, axis=0)  # (B, d)
    return alpha, pooled


def encode_batch(
    params: dict[str, Tensor],
    token_ids: list[np.ndarray],
    train: bool = False,
    dropout_rate: float = 0.5,
    rng: np.random.Generator | None = None,
):
    """Embed and run the 2-layer BiLSTM; returns (per-step h tensors, mask)."""
    ids, mask = _pad_batch(token_ids)
    T = ids.shape[0]
    xs = [ad.gather_rows(params["embeddings"], ids[t]) for t in range(T)]
    for layer in (0, 1):
        fw = _lstm_direction(
            xs, mask,
            params[f"lstm{layer}_fw_Wx"], params[f"lstm{layer}_fw_Wh"],
            params[f"lstm{layer}_fw_b"], reverse=False,
        )
        bw = _lstm_direction(
            xs, mask,
            params[f"lstm{layer}_bw_Wx"], params[f"lstm{layer}_bw_Wh"],
            params[f"lstm{layer}_bw_b"], reverse=True,
        )
        xs = [ad.concat([fw[t], bw[t]], axis=1) for t in range(T)]
    if train and dropout_rate > 0.0:
        xs = [ad.dropout(h, dropout_rate, rng=rng, train=True) for h in xs]
    return xs, mask


def rc_forward_batch(
    params: dict[str, Tensor],
    token_ids: list[np.ndarray],
    train: bool = False,
    dropout_rate: float = 0.5,
    rng: np.random.Generator | None = None,
):
    """Class probabilities for a batch; returns (alpha, sentence vecs, probs)."""
    hs, mask = encode_batch(params, token_ids, train, dropout_rate, rng)
    alpha, c = _attention_pool(hs, mask, params["rc_A"], params["rc_v"])
    probs = ad.softmax(c @ params["rc_W"], axis=1)
    return alpha, c, probs


def rc_forward(params, token_ids: np.ndarray, train: bool = False,
               dropout_rate: float = 0.5, rng=None):
    """Single-sentence convenience wrapper around the batched forward."""
    alpha, c, probs = rc_forward_batch(params, [token_ids], train, dropout_rate, rng)
    return alpha.values[: len(token_ids), 0], c, probs


def srm_embed_batch(params: dict[str, Tensor], token_ids: list[np.ndarray]):
    """Word-level attention pooling over raw embeddings; returns (alpha, z)."""
    ids, mask = _pad_batch(token_ids)
    xs = [ad.gather_rows(params["embeddings"], ids[t]) for t in range(ids.shape[0])]
    return _attention_pool(xs, mask, params["srm_B"], params["srm_u"])


def srm_embed(params, token_ids: np.ndarray):
    alpha, z = srm_embed_batch(params, [token_ids])
    return alpha.values[: len(token_ids), 0], z


def srm_score(params, s_ids: np.ndarray, p_ids: np.ndarray):
    """Soft match score in [-1, 1] between a sentence context and a rule body."""
    _, zs = srm_embed(params, s_ids)
    _, zp = srm_embed(params, p_ids)
    return srm_score_from_embeds(params, zs, zp)


def srm_score_from_embeds(params, zs: Tensor, zp: Tensor):
    D = params["srm_D"]
    a = ad.reshape(ad.mul(zs, D), (-1,))
    b = ad.reshape(ad.mul(zp, D), (-1,))
    if np.linalg.norm(a.values) == 0.0 or np.linalg.norm(b.values) == 0.0:
        raise ValueError("srm_score: zero-norm vector after diagonal transform")
    return ad.cosine_similarity(a, b)


# Plain-numpy SRM evaluation, used on the hot pseudo-labeling path where no
# gradients are needed. Tested for equality with the graph version.

def srm_embed_values(params, token_ids: list[np.ndarray]) -> np.ndarray:
    emb = params["embeddings"].values
    B_mat = params["srm_B"].values
    u = params["srm_u"].values
    out = np.empty((len(token_ids), emb.shape[1]))
    for i, seq in enumerate(token_ids):
        x = emb[seq]  # (n, d_w)
        s = np.tanh(x @ B_mat) @ u  # (n, 1)
        s = s - s.max()
        a = np.exp(s)
        a /= a.sum()
        out[i] = (a * x).sum(axis=0)
    return out


def srm_score_matrix(params, z_sent: np.ndarray, z_rule: np.ndarray) -> np.ndarray:
    """Cosine scores between all sentence and rule pooled vectors."""
    D = params["srm_D"].values[0]
    a = z_sent * D
    b = z_rule * D
    a = a / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-12)
    b = b / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-12)
    return a @ b.T


def checkpoint_save(path, params: dict[str, Tensor], vocab: Vocabulary,
                    schema: RelationSchema, extra: dict | None = None) -> None:
    """Checkpoint directory: params.npz + vocab.npz + manifest.json."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    ad.save_params(params, path / "params.npz")
    np.savez(path / "vocab.npz", tokens=np.array(vocab.tokens), vectors=vocab.vectors)
    manifest = {
        "version": 1,
        "d_w": vocab.dim,
        "d_h": params["rc_A"].shape[0],
        "d_a": params["rc_A"].shape[1],
        "relations": list(schema.relations),
        "vocab_hash": hashlib.sha256(vocab.vectors.tobytes()).hexdigest(),
        "schema_hash": hashlib.sha256(",".join(schema.relations).encode()).hexdigest(),
    }
    manifest.update(extra or {})
    with open(path / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)


def checkpoint_load(path):
    path = Path(path)
    params = ad.load_params(path / "params.npz")
    with np.load(path / "vocab.npz") as v:
        vocab = Vocabulary(list(v["tokens"]), v["vectors"])
    with open(path / "manifest.json") as f:
        manifest = json.load(f)
    schema = RelationSchema(tuple(manifest["relations"]))
    return params, vocab, schema, manifest
