"""Differentiable layers over the autodiff tape.

Each layer documents its shape contract. The recurrent and attention layers
are single fused tape nodes with hand-derived backward passes; gradient
checking in the test suite holds them to a 1e-4 relative tolerance.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolation
from .tensor import Tensor, concat, gather_rows, log, make_node, matmul, mul, softmax, tsum

MASK_NEG = -1e9


def init_uniform(rng: np.random.Generator, shape, scale: float = 0.08) -> Tensor:
    """Parameter initialization: uniform(-scale, scale) from an explicit rng."""
    t = Tensor(rng.uniform(-scale, scale, size=shape))
    t.requires_grad = True
    return t


def zeros_param(shape) -> Tensor:
    t = Tensor(np.zeros(shape))
    t.requires_grad = True
    return t


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    """(V, D) table, integer ids of any shape -> (*ids.shape, D)."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.min(initial=0) < 0 or (ids.size and ids.max() >= table.data.shape[0]):
        raise ContractViolation("embedding_lookup: id outside table")
    flat = gather_rows(table, ids.reshape(-1))
    from .tensor import reshape

    return reshape(flat, ids.shape + (table.data.shape[1],))


def dense(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """(N, D) @ (D, M) + (M,) -> (N, M)."""
    if x.data.ndim != 2:
        raise ContractViolation(f"dense expects a 2-D input, got shape {x.data.shape}")
    out = matmul(x, weight)
    if bias is not None:
        out = out + bias
    return out


def conv1d(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """1-D convolution over time.

    x: (B, T, D); weight: (w, D, M); bias: (M,). Sequences shorter than the
    filter width are zero-padded on the right so the output always has at
    least one position: out (B, max(T - w + 1, 1), M).
    """
    B, T, D = x.data.shape
    w, Dw, M = weight.data.shape
    if Dw != D:
        raise ContractViolation(f"conv1d channel mismatch: input {D}, weight {Dw}")
    T_pad = max(T, w)
    xd = x.data
    if T_pad != T:
        xd = np.concatenate([xd, np.zeros((B, T_pad - T, D))], axis=1)
    To = T_pad - w + 1
    # im2col: (B, To, w*D)
    cols = np.empty((B, To, w * D))
    for k in range(w):
        cols[:, :, k * D : (k + 1) * D] = xd[:, k : k + To, :]
    W2 = weight.data.reshape(w * D, M)
    out = cols.reshape(B * To, w * D) @ W2 + bias.data
    out = out.reshape(B, To, M)

    def backward(grad):
        g2 = grad.reshape(B * To, M)
        cols2 = cols.reshape(B * To, w * D)
        weight._accumulate((cols2.T @ g2).reshape(w, D, M))
        bias._accumulate(g2.sum(axis=0))
        dcols = (g2 @ W2.T).reshape(B, To, w * D)
        dx = np.zeros((B, T_pad, D))
        for k in range(w):
            dx[:, k : k + To, :] += dcols[:, :, k * D : (k + 1) * D]
        x._accumulate(dx[:, :T, :])

    return make_node(out, (x, weight, bias), backward)


def conv1d_bank(x: Tensor, filters: list[tuple[Tensor, Tensor]]) -> list[Tensor]:
    """Apply several conv1d filters (typically widths 3, 4, 5) to one input."""
    return [conv1d(x, w, b) for w, b in filters]


def max_pool_over_time(x: Tensor) -> Tensor:
    """(B, T, M) -> (B, M), max over the time axis."""
    B, T, M = x.data.shape
    arg = x.data.argmax(axis=1)
    out = np.take_along_axis(x.data, arg[:, None, :], axis=1)[:, 0, :]

    def backward(grad):
        dx = np.zeros_like(x.data)
        b_idx = np.repeat(np.arange(B), M)
        m_idx = np.tile(np.arange(M), B)
        np.add.at(dx, (b_idx, arg.ravel(), m_idx), grad.ravel())
        x._accumulate(dx)

    return make_node(out, (x,), backward)


def cross_entropy(probs: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer labels under given probabilities.

    Composing softmax and cross_entropy yields the usual
    (probabilities - one_hot) / N gradient at the logits.
    """
    labels = np.asarray(labels, dtype=np.int64)
    N = probs.data.shape[0]
    picked = gather_pick(probs, labels)
    return mul(tsum(log(picked)), Tensor(np.asarray(-1.0 / N)))


def gather_pick(x: Tensor, labels: np.ndarray) -> Tensor:
    """Pick x[i, labels[i]] for each row i."""
    labels = np.asarray(labels, dtype=np.int64)
    rows = np.arange(x.data.shape[0])
    data = x.data[rows, labels]

    def backward(grad):
        full = np.zeros_like(x.data)
        full[rows, labels] = grad
        x._accumulate(full)

    return make_node(data, (x,), backward)


def cross_entropy_logits(logits: Tensor, labels: np.ndarray, weights: np.ndarray | None = None) -> Tensor:
    """Fused stable softmax + cross-entropy.

    logits (N, V), integer labels (N,), optional per-row weights (counts
    toward the weighted mean; rows with weight 0 contribute nothing).
    """
    labels = np.asarray(labels, dtype=np.int64)
    N, V = logits.data.shape
    if weights is None:
        weights = np.ones(N)
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if total <= 0:
        raise ContractViolation("cross_entropy_logits: no weighted rows")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    probs = np.exp(shifted)
    denom = probs.sum(axis=1, keepdims=True)
    lse = np.log(denom[:, 0])
    nll = lse - shifted[np.arange(N), labels]
    loss = float((nll * w).sum() / total)
    probs /= denom

    def backward(grad):
        # probs is not needed after this single backward pass; mutate it.
        probs[np.arange(N), labels] -= 1.0
        np.multiply(probs, (grad * w / total)[:, None], out=probs)
        logits._accumulate(probs)

    return make_node(np.asarray(loss), (logits,), backward)


def dropout(x: Tensor, p: float, rng: np.random.Generator, train: bool = True) -> Tensor:
    """Inverted dropout: scale surviving units by 1/(1-p) at train time."""
    if not (0.0 <= p < 1.0):
        raise ContractViolation(f"dropout rate {p} outside [0, 1)")
    if not train or p == 0.0:
        return x
    mask = (rng.random(x.data.shape) >= p) / (1.0 - p)
    return mul(x, Tensor(mask))


def gru_cell(x: Tensor, h: Tensor, wx: Tensor, wh: Tensor, b: Tensor) -> Tensor:
    """One GRU step as a fused node.

    x (B, E), h (B, H); wx (E, 3H), wh (H, 3H), b (3H,), gate layout
    [update | reset | candidate]. Returns the next hidden state (B, H).
    """
    B, E = x.data.shape
    H = h.data.shape[1]
    if wx.data.shape != (E, 3 * H) or wh.data.shape != (H, 3 * H):
        raise ContractViolation(
            f"gru_cell weight shapes {wx.data.shape}/{wh.data.shape} do not match x={x.data.shape}, h={h.data.shape}"
        )
    gx = x.data @ wx.data + b.data
    gh = h.data @ wh.data
    z = 1.0 / (1.0 + np.exp(-(gx[:, :H] + gh[:, :H])))
    r = 1.0 / (1.0 + np.exp(-(gx[:, H : 2 * H] + gh[:, H : 2 * H])))
    ghn = gh[:, 2 * H :]
    n = np.tanh(gx[:, 2 * H :] + r * ghn)
    out = (1.0 - z) * n + z * h.data

    def backward(grad):
        dz = grad * (h.data - n) * z * (1.0 - z)
        dn_pre = grad * (1.0 - z) * (1.0 - n * n)
        dr = dn_pre * ghn * r * (1.0 - r)
        dgx = np.concatenate([dz, dr, dn_pre], axis=1)
        dgh = np.concatenate([dz, dr, dn_pre * r], axis=1)
        x._accumulate(dgx @ wx.data.T)
        wx._accumulate(x.data.T @ dgx)
        b._accumulate(dgx.sum(axis=0))
        wh._accumulate(h.data.T @ dgh)
        h._accumulate(dgh @ wh.data.T + grad * z)

    return make_node(out, (x, h, wx, wh, b), backward)


def additive_attention(
    query: Tensor,
    keys_proj: Tensor,
    values: Tensor,
    wq: Tensor,
    v: Tensor,
    mask: np.ndarray,
) -> tuple[Tensor, np.ndarray]:
    """Bahdanau-style attention as a fused node.

    query (B, H), keys_proj (B, T, A) = keys @ wk precomputed once per
    sequence, values (B, T, Hv), wq (H, A), v (A,), mask (B, T) with 1 for
    real positions. Returns the context (B, Hv) and the attention weights
    (constant, for inspection).
    """
    B, T, A = keys_proj.data.shape
    q_proj = query.data @ wq.data  # (B, A)
    s = np.tanh(q_proj[:, None, :] + keys_proj.data)  # (B, T, A)
    e = s @ v.data  # (B, T)
    e = np.where(mask > 0, e, MASK_NEG)
    e_shift = e - e.max(axis=1, keepdims=True)
    ex = np.exp(e_shift)
    alpha = ex / ex.sum(axis=1, keepdims=True)  # (B, T)
    context = np.einsum("bt,bth->bh", alpha, values.data)

    def backward(grad):
        dalpha = np.einsum("bh,bth->bt", grad, values.data)
        values._accumulate(alpha[:, :, None] * grad[:, None, :])
        de = alpha * (dalpha - (dalpha * alpha).sum(axis=1, keepdims=True))
        de = np.where(mask > 0, de, 0.0)
        v._accumulate(np.einsum("bt,bta->a", de, s))
        ds = de[:, :, None] * v.data[None, None, :]
        da = ds * (1.0 - s * s)  # (B, T, A)
        keys_proj._accumulate(da)
        dq_proj = da.sum(axis=1)  # (B, A)
        query._accumulate(dq_proj @ wq.data.T)
        wq._accumulate(query.data.T @ dq_proj)

    node = make_node(context, (query, keys_proj, values, wq, v), backward)
    return node, alpha


def _sigmoid_inplace(x: np.ndarray) -> np.ndarray:
    np.negative(x, out=x)
    np.exp(x, out=x)
    x += 1.0
    np.reciprocal(x, out=x)
    return x


def _gru_forward_step(gx, gh, h, zs_t, rs_t, ns_t, ghn_t, H):
    """Shared GRU cell math writing into the step's saved buffers."""
    zr = gx[:, : 2 * H] + gh[:, : 2 * H]
    _sigmoid_inplace(zr)
    zs_t[...] = zr[:, :H]
    rs_t[...] = zr[:, H:]
    ghn_t[...] = gh[:, 2 * H :]
    np.tanh(gx[:, 2 * H :] + rs_t * ghn_t, out=ns_t)
    # h' = z*(h - n) + n
    out = h - ns_t
    out *= zs_t
    out += ns_t
    return out


def _gru_backward_step(dht, h_prev, z, r, n, ghn_t, dgx_t, dgh_t, H):
    """Fill dgx_t/dgh_t for one step; returns the GRU part of dh_prev."""
    dz = dht * (h_prev - n)
    dz *= z
    dz *= 1.0 - z
    dn_pre = dht * (1.0 - z)
    dn_pre *= 1.0 - n * n
    dr = dn_pre * ghn_t
    dr *= r
    dr *= 1.0 - r
    dgx_t[:, :H] = dz
    dgx_t[:, H : 2 * H] = dr
    dgx_t[:, 2 * H :] = dn_pre
    dgh_t[:, : 2 * H] = dgx_t[:, : 2 * H]
    np.multiply(dn_pre, r, out=dgh_t[:, 2 * H :])
    return dht * z


def gru_sequence(emb: Tensor, h0: Tensor, wx: Tensor, wh: Tensor, b: Tensor) -> Tensor:
    """Run a GRU over a whole sequence as one fused node.

    emb (B, T, E), h0 (B, H) -> hidden states (B, T, H). The input-side gate
    projections for every step are computed in one GEMM; backward is a
    single BPTT sweep. Matches composing gru_cell per step.
    """
    B, T, E = emb.data.shape
    H = h0.data.shape[1]
    gx_all = (emb.data.reshape(B * T, E) @ wx.data + b.data).reshape(B, T, 3 * H)
    hs = np.empty((B, T, H))
    zs = np.empty((B, T, H))
    rs = np.empty((B, T, H))
    ns = np.empty((B, T, H))
    ghn = np.empty((B, T, H))
    h = h0.data
    for t in range(T):
        gh = h @ wh.data
        h = _gru_forward_step(gx_all[:, t], gh, h, zs[:, t], rs[:, t], ns[:, t], ghn[:, t], H)
        hs[:, t] = h

    def backward(grad):
        dgx_all = np.empty((B, T, 3 * H))
        dgh_all = np.empty((B, T, 3 * H))
        wh_T = wh.data.T
        dh = None
        for t in range(T - 1, -1, -1):
            h_prev = hs[:, t - 1] if t > 0 else h0.data
            dht = grad[:, t, :] if dh is None else grad[:, t, :] + dh
            dh = _gru_backward_step(
                dht, h_prev, zs[:, t], rs[:, t], ns[:, t], ghn[:, t],
                dgx_all[:, t], dgh_all[:, t], H,
            )
            dh += dgh_all[:, t] @ wh_T
        dgx_flat = dgx_all.reshape(B * T, 3 * H)
        emb._accumulate((dgx_flat @ wx.data.T).reshape(B, T, E))
        wx._accumulate(emb.data.reshape(B * T, E).T @ dgx_flat)
        b._accumulate(dgx_flat.sum(axis=0))
        h_prev_all = np.concatenate([h0.data[:, None, :], hs[:, :-1, :]], axis=1)
        wh._accumulate(h_prev_all.reshape(B * T, H).T @ dgh_all.reshape(B * T, 3 * H))
        h0._accumulate(dh)

    return make_node(hs, (emb, h0, wx, wh, b), backward)


def attn_gru_decoder(
    emb: Tensor,
    h0: Tensor,
    enc_out: Tensor,
    keys: Tensor,
    mask: np.ndarray,
    wx: Tensor,
    wh: Tensor,
    b: Tensor,
    wq: Tensor,
    v: Tensor,
) -> Tensor:
    """Attentive GRU decoder over a whole target sequence, fused.

    emb (B, T, E) are the embedded decoder inputs, h0 the initial state,
    enc_out (B, Ts, H) the encoder states with keys (B, Ts, A) = enc @ wk
    precomputed, mask (B, Ts). Per step: context from additive attention on
    the previous state, GRU input [emb_t, context], output feature
    [h_t, context]. Returns (B, T, 2H).
    """
    B, T, E = emb.data.shape
    H = h0.data.shape[1]
    Ts = enc_out.data.shape[1]
    A = keys.data.shape[2]
    wx_e = wx.data[:E]
    wx_c = wx.data[E:]
    gx_emb = (emb.data.reshape(B * T, E) @ wx_e + b.data).reshape(B, T, 3 * H)
    neg = (mask <= 0)

    hs = np.empty((B, T, H))
    zs = np.empty((B, T, H))
    rs = np.empty((B, T, H))
    ns = np.empty((B, T, H))
    ghn = np.empty((B, T, H))
    ctxs = np.empty((B, T, H))
    alphas = np.empty((B, T, Ts))
    ss = np.empty((B, T, Ts, A))
    out = np.empty((B, T, 2 * H))
    h = h0.data
    for t in range(T):
        s = ss[:, t]
        np.tanh((h @ wq.data)[:, None, :] + keys.data, out=s)
        e = s @ v.data
        e[neg] = MASK_NEG
        e -= e.max(axis=1, keepdims=True)
        np.exp(e, out=e)
        e /= e.sum(axis=1, keepdims=True)
        ctx = (e[:, None, :] @ enc_out.data)[:, 0, :]
        alphas[:, t] = e
        ctxs[:, t] = ctx
        gx = gx_emb[:, t] + ctx @ wx_c
        gh = h @ wh.data
        h = _gru_forward_step(gx, gh, h, zs[:, t], rs[:, t], ns[:, t], ghn[:, t], H)
        hs[:, t] = h
        out[:, t, :H] = h
        out[:, t, H:] = ctx

    def backward(grad):
        dgx_all = np.empty((B, T, 3 * H))
        dgh_all = np.empty((B, T, 3 * H))
        denc = np.zeros_like(enc_out.data)
        dkeys = np.zeros_like(keys.data)
        dwq = np.zeros_like(wq.data)
        dv = np.zeros_like(v.data)
        dh = np.zeros((B, H))
        wh_T = wh.data.T
        wxc_T = wx_c.T
        wq_T = wq.data.T
        for t in range(T - 1, -1, -1):
            h_prev = hs[:, t - 1] if t > 0 else h0.data
            dht = grad[:, t, :H] + dh
            dh_prev = _gru_backward_step(
                dht, h_prev, zs[:, t], rs[:, t], ns[:, t], ghn[:, t],
                dgx_all[:, t], dgh_all[:, t], H,
            )
            dh_prev += dgh_all[:, t] @ wh_T
            dctx = grad[:, t, H:] + dgx_all[:, t] @ wxc_T
            # attention backward, query = h_prev
            alpha = alphas[:, t]
            dalpha = (enc_out.data @ dctx[:, :, None])[:, :, 0]
            denc += alpha[:, :, None] * dctx[:, None, :]
            de = alpha * (dalpha - (dalpha * alpha).sum(axis=1, keepdims=True))
            de[neg] = 0.0
            s = ss[:, t]
            dv += (de[:, :, None] * s).sum(axis=(0, 1))
            da = de[:, :, None] * v.data
            da *= 1.0 - s * s
            dkeys += da
            dqp = da.sum(axis=1)
            dwq += h_prev.T @ dqp
            dh = dh_prev
            dh += dqp @ wq_T
        dgx_flat = dgx_all.reshape(B * T, 3 * H)
        emb._accumulate((dgx_flat @ wx_e.T).reshape(B, T, E))
        dwx = np.empty_like(wx.data)
        dwx[:E] = emb.data.reshape(B * T, E).T @ dgx_flat
        dwx[E:] = ctxs.reshape(B * T, H).T @ dgx_flat
        wx._accumulate(dwx)
        b._accumulate(dgx_flat.sum(axis=0))
        h_prev_all = np.concatenate([h0.data[:, None, :], hs[:, :-1, :]], axis=1)
        wh._accumulate(h_prev_all.reshape(B * T, H).T @ dgh_all.reshape(B * T, 3 * H))
        enc_out._accumulate(denc)
        keys._accumulate(dkeys)
        wq._accumulate(dwq)
        v._accumulate(dv)
        h0._accumulate(dh)

    return make_node(out, (emb, h0, enc_out, keys, wx, wh, b, wq, v), backward)


def softmax_rows(x: Tensor) -> Tensor:
    return softmax(x, axis=-1)


def concat_features(tensors: list[Tensor]) -> Tensor:
    return concat(tensors, axis=-1)
