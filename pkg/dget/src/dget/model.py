"""The learned scheduler model: a transductive graph-attention encoder, an
inductive neighborhood-aggregation refiner, and a Transformer edge classifier.

All graph stages use weight sharing across nodes/edges only, so they are
permutation equivariant under device relabeling.  Device identity enters the
pipeline solely through the classifier's learnable positional table, and time
through a sinusoidal encoding of the step index.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

from .config import ModelConfig
from .data import N_CLASSES, Normalizer, Snapshot, edge_order

EDGE_DIM = 5
NEG_SLOPE = 0.01  # LeakyReLU slope used everywhere


def dense_edges(edge_feats: torch.Tensor, n: int) -> torch.Tensor:
    """Scatter (E, F) lexicographic directed-edge features into (N, N, F)."""
    out = edge_feats.new_zeros((n, n, edge_feats.shape[1]))
    for e, (i, j) in enumerate(edge_order(n)):
        out[i, j] = edge_feats[e]
    return out


def minmax_edge_weight(avail: torch.Tensor) -> torch.Tensor:
    """Min-max normalize raw edge weights (availability codes) over the
    directed edges; constant weights map to 0.5; self-loops get weight 1."""
    n = avail.shape[0]
    off = ~torch.eye(n, dtype=torch.bool, device=avail.device)
    vals = avail[off]
    lo, hi = vals.min(), vals.max()
    if hi > lo:
        beta = (avail - lo) / (hi - lo)
    else:
        beta = torch.full_like(avail, 0.5)
    beta = beta.clone()
    beta.fill_diagonal_(1.0)
    return beta


def neighbor_mask(avail: torch.Tensor, self_loops: bool) -> torch.Tensor:
    """j is a neighbor of i when the directed link i->j is available; with
    ``self_loops`` every node additionally attends to itself, which is also
    the only neighbor an isolated node has."""
    mask = avail > 0
    mask = mask & ~torch.eye(avail.shape[0], dtype=torch.bool, device=avail.device)
    if self_loops:
        mask = mask | torch.eye(avail.shape[0], dtype=torch.bool, device=avail.device)
    return mask


def sinusoidal_encoding(step: int, dim: int, dtype=torch.float32) -> torch.Tensor:
    """Standard sine/cosine encoding of a (1-based) time step index."""
    pe = torch.zeros(dim, dtype=dtype)
    position = float(step)
    div = torch.exp(torch.arange(0, dim, 2, dtype=dtype) * (-math.log(10000.0) / dim))
    pe[0::2] = torch.sin(position * div)
    pe[1::2] = torch.cos(position * div[: dim - dim // 2])
    return pe


class TransductiveGATLayer(nn.Module):
    """One multi-head attention layer.  Scores are
    LeakyReLU(beta_ij * a^T [W v_i ; W v_j]) softmaxed over each node's
    neighborhood (self-loop included); the update applies a separate weight
    matrix W' to the neighbors."""

    def __init__(self, d_in: int, d_out: int, heads: int):
        super().__init__()
        if d_out % heads:
            raise ValueError("output dim must be divisible by head count")
        self.heads = heads
        self.d_head = d_out // heads
        self.w_score = nn.Linear(d_in, d_out, bias=False)
        self.w_update = nn.Linear(d_in, d_out, bias=False)
        self.a_src = nn.Parameter(torch.empty(heads, self.d_head))
        self.a_dst = nn.Parameter(torch.empty(heads, self.d_head))
        nn.init.xavier_uniform_(self.w_score.weight)
        nn.init.xavier_uniform_(self.w_update.weight)
        nn.init.xavier_uniform_(self.a_src)
        nn.init.xavier_uniform_(self.a_dst)

    def attention(self, x: torch.Tensor, beta: torch.Tensor,
                  mask: torch.Tensor) -> torch.Tensor:
        n = x.shape[0]
        h = self.w_score(x).view(n, self.heads, self.d_head)
        src = (h * self.a_src).sum(-1)  # (N, H)
        dst = (h * self.a_dst).sum(-1)
        scores = beta.unsqueeze(-1) * (src.unsqueeze(1) + dst.unsqueeze(0))
        scores = nn.functional.leaky_relu(scores, NEG_SLOPE)
        scores = scores.masked_fill(~mask.unsqueeze(-1), float("-inf"))
        return torch.softmax(scores, dim=1)  # (N, N, H), rows over neighbors

    def forward(self, x: torch.Tensor, beta: torch.Tensor,
                mask: torch.Tensor) -> torch.Tensor:
        n = x.shape[0]
        alpha = self.attention(x, beta, mask)
        u = self.w_update(x).view(n, self.heads, self.d_head)
        out = torch.einsum("ijh,jhd->ihd", alpha, u).reshape(n, -1)
        return nn.functional.leaky_relu(out, NEG_SLOPE)


class TransductiveGAT(nn.Module):
    def __init__(self, node_dim: int, cfg: ModelConfig):
        super().__init__()
        dims = [node_dim] + [cfg.embed_dim] * cfg.gat_layers
        self.layers = nn.ModuleList(
            TransductiveGATLayer(dims[i], dims[i + 1], cfg.gat_heads)
            for i in range(cfg.gat_layers)
        )
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, nodes: torch.Tensor, avail: torch.Tensor) -> torch.Tensor:
        beta = minmax_edge_weight(avail)
        mask = neighbor_mask(avail, self_loops=True)
        x = nodes
        for layer in self.layers:
            x = self.dropout(layer(x, beta, mask))
        return x


class InductiveLayer(nn.Module):
    """One refinement layer.  Inner stage: each node j mean-aggregates
    [neighbor embedding ; outgoing edge features] over its neighborhood and
    transforms it (a node with no neighbors falls back to itself with zero
    edge features).  Outer stage: attention-weighted sum of the transformed
    neighbor messages, self-loop included.  Each layer's output rows are
    L2-normalized to unit length (zero rows stay zero), which keeps the
    embedding scale fixed so the consistency target cannot drift."""

    def __init__(self, embed_dim: int, edge_dim: int):
        super().__init__()
        self.w_inner = nn.Linear(embed_dim + edge_dim, embed_dim, bias=False)
        self.w_outer = nn.Linear(embed_dim, embed_dim, bias=False)
        self.att = nn.Parameter(torch.empty(2, embed_dim))
        nn.init.xavier_uniform_(self.w_inner.weight)
        nn.init.xavier_uniform_(self.w_outer.weight)
        nn.init.xavier_uniform_(self.att)

    def inner(self, o: torch.Tensor, edges: torch.Tensor,
              avail: torch.Tensor) -> torch.Tensor:
        n = o.shape[0]
        neigh = neighbor_mask(avail, self_loops=False)  # (N, N): [j, i] -> i neighbor of j
        deg = neigh.sum(dim=1)
        # message from neighbor i to node j: [o_i ; e_{j->i}]
        msg = torch.cat(
            (o.unsqueeze(0).expand(n, n, -1), edges), dim=-1
        )  # (j, i, Z+F)
        agg = (msg * neigh.unsqueeze(-1)).sum(dim=1) / deg.clamp(min=1).unsqueeze(-1)
        fallback = torch.cat((o, o.new_zeros(n, edges.shape[-1])), dim=-1)
        agg = torch.where((deg > 0).unsqueeze(-1), agg, fallback)
        return nn.functional.leaky_relu(self.w_inner(agg), NEG_SLOPE)

    def forward(self, o: torch.Tensor, edges: torch.Tensor, avail: torch.Tensor,
                beta: torch.Tensor) -> torch.Tensor:
        o_prime = self.inner(o, edges, avail)
        mask = neighbor_mask(avail, self_loops=True)
        scores = (o @ self.att[0]).unsqueeze(1) + (o_prime @ self.att[1]).unsqueeze(0)
        scores = nn.functional.leaky_relu(beta * scores, NEG_SLOPE)
        scores = scores.masked_fill(~mask, float("-inf"))
        alpha = torch.softmax(scores, dim=1)
        out = alpha @ self.w_outer(o_prime)
        out = nn.functional.leaky_relu(out, NEG_SLOPE)
        return nn.functional.normalize(out, dim=-1)


class InductiveRefiner(nn.Module):
    def __init__(self, cfg: ModelConfig, edge_dim: int = EDGE_DIM):
        super().__init__()
        self.layers = nn.ModuleList(
            InductiveLayer(cfg.embed_dim, edge_dim)
            for _ in range(cfg.inductive_layers)
        )
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, o0: torch.Tensor, edges: torch.Tensor,
                avail: torch.Tensor) -> torch.Tensor:
        beta = minmax_edge_weight(avail)
        o = o0
        for layer in self.layers:
            o = self.dropout(layer(o, edges, avail, beta))
        return o


class EdgeClassifier(nn.Module):
    """Transformer over per-edge tokens.  A token concatenates the refined
    embeddings of both endpoints with the edge features, plus a learnable
    positional vector per endpoint device and a sinusoidal encoding of the
    time step."""

    def __init__(self, cfg: ModelConfig, edge_dim: int = EDGE_DIM):
        super().__init__()
        z = cfg.embed_dim
        self.proj = nn.Linear(2 * z + edge_dim, z)
        self.pos = nn.Embedding(cfg.max_devices, z)
        encoder_layer = nn.TransformerEncoderLayer(
            d_model=z, nhead=cfg.transformer_heads, dim_feedforward=2 * z,
            dropout=cfg.dropout, activation="gelu", batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(encoder_layer,
                                             num_layers=cfg.transformer_layers)
        self.head = nn.Sequential(
            nn.Linear(z, z),
            nn.LeakyReLU(NEG_SLOPE),
            nn.Dropout(cfg.dropout),
            nn.Linear(z, N_CLASSES),
        )
        nn.init.xavier_uniform_(self.proj.weight)
        nn.init.zeros_(self.proj.bias)
        nn.init.normal_(self.pos.weight, std=0.02)

    def forward(self, o: torch.Tensor, edge_feats: torch.Tensor, n: int,
                step: int) -> torch.Tensor:
        pairs = edge_order(n)
        src = torch.tensor([i for i, _ in pairs], device=o.device)
        dst = torch.tensor([j for _, j in pairs], device=o.device)
        tokens = self.proj(torch.cat((o[src], o[dst], edge_feats), dim=-1))
        tokens = tokens + self.pos(src) + self.pos(dst)
        tokens = tokens + sinusoidal_encoding(step, tokens.shape[-1],
                                              dtype=tokens.dtype).to(o.device)
        encoded = self.encoder(tokens.unsqueeze(0)).squeeze(0)
        return self.head(encoded)  # (E, C) logits


class DGET(nn.Module):
    """End-to-end model.  ``embed`` runs the transductive + inductive stages
    on one snapshot's features; ``forward`` additionally classifies every
    directed edge of an input snapshot."""

    def __init__(self, cfg: ModelConfig, node_dim: int, edge_dim: int = EDGE_DIM):
        super().__init__()
        self.cfg = cfg
        self.node_dim = node_dim
        self.edge_dim = edge_dim
        self.transductive = TransductiveGAT(node_dim, cfg)
        self.inductive = InductiveRefiner(cfg, edge_dim)
        self.classifier = EdgeClassifier(cfg, edge_dim)

    def embed(self, nodes: torch.Tensor, edges_dense: torch.Tensor,
              avail: torch.Tensor) -> torch.Tensor:
        h = self.transductive(nodes, avail)
        return self.inductive(h, edges_dense, avail)

    def forward(self, nodes, edges_dense, edge_feats, avail, step: int):
        o = self.embed(nodes, edges_dense, avail)
        logits = self.classifier(o, edge_feats, nodes.shape[0], step)
        return o, logits


def snapshot_tensors(snap: Snapshot, norm: Normalizer,
                     dtype=torch.float32) -> dict:
    """Normalized tensors for one snapshot: node features, flat and dense
    edge features, the raw availability matrix, and the step index."""
    n = snap.n_devices
    nodes = torch.as_tensor(norm.nodes(snap.node_features), dtype=dtype)
    edge_feats = torch.as_tensor(norm.edges(snap.edge_features), dtype=dtype)
    avail = torch.zeros((n, n), dtype=dtype)
    for e, (i, j) in enumerate(edge_order(n)):
        avail[i, j] = float(snap.edge_features[e, 0])
    return {
        "nodes": nodes,
        "edge_feats": edge_feats,
        "edges_dense": dense_edges(edge_feats, n),
        "avail": avail,
        "step": snap.step,
    }


def predict_probabilities(model: DGET, snap: Snapshot,
                          norm: Normalizer) -> np.ndarray:
    """Inference on one input snapshot: softmax class distributions, (E, 8)."""
    model.eval()
    with torch.no_grad():
        t = snapshot_tensors(snap, norm)
        _, logits = model(t["nodes"], t["edges_dense"], t["edge_feats"],
                          t["avail"], t["step"])
        return torch.softmax(logits, dim=1).double().numpy()
