"""Graph-level structural embeddings with contrastive pretraining.

``GraphEncoderNet`` stacks edge-aware convolutions, mean-pools node states
and projects to the embedding width. ``ContrastiveGraphEncoder`` wraps it
in an sklearn-style estimator: ``fit`` runs the two-view contrastive loop,
``transform`` maps graphs to a row-per-graph embedding matrix.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .. import checkpoint as ckpt
from ..errors import ConfigError, EmptyGraphError
from ..netlist.graph import DataPathGraph
from ..validation import check_graph_list
from .augment import AugmentationPolicy, GraphView, augment, graph_arrays
from .featurizer import NodeFeaturizer
from .gine import GINELayer
from .losses import info_nce


class GraphEncoderNet(torch.nn.Module):
    """Convolution stack, mean-pool readout, linear projection.

    Each convolution is followed by a per-node LayerNorm; without it the
    embedding cone stays too narrow for contrastive training to separate
    graphs within a desk-scale epoch budget.
    """

    def __init__(self, feature_dim: int, hidden_dim: int, embedding_dim: int,
                 num_layers: int):
        super().__init__()
        dims = [feature_dim] + [hidden_dim] * num_layers
        self.layers = torch.nn.ModuleList(
            GINELayer(dims[i], dims[i + 1]) for i in range(num_layers))
        self.norms = torch.nn.ModuleList(
            torch.nn.LayerNorm(dims[i + 1]) for i in range(num_layers))
        self.projection = torch.nn.Linear(hidden_dim, embedding_dim)

    def forward(self, x, edge_index, edge_attr, graph_index, num_graphs):
        for layer, norm in zip(self.layers, self.norms):
            x = norm(layer(x, edge_index, edge_attr))
        pooled = torch.zeros(num_graphs, x.shape[1], dtype=x.dtype)
        pooled = pooled.index_add(0, graph_index, x)
        counts = torch.bincount(graph_index, minlength=num_graphs)
        pooled = pooled / counts.clamp(min=1).unsqueeze(1).to(x.dtype)
        return self.projection(pooled)


def batch_views(views: list[GraphView]) -> tuple[torch.Tensor, torch.Tensor,
                                                 torch.Tensor, torch.Tensor]:
    """Concatenate views into one disjoint-union graph with per-node ids."""
    xs, eis, eas, gidx = [], [], [], []
    offset = 0
    for i, v in enumerate(views):
        xs.append(torch.from_numpy(np.ascontiguousarray(v.x)))
        eis.append(torch.from_numpy(v.edge_index + offset))
        eas.append(torch.from_numpy(v.edge_attr))
        gidx.append(torch.full((v.num_nodes,), i, dtype=torch.long))
        offset += v.num_nodes
    return (torch.cat(xs), torch.cat(eis, dim=1), torch.cat(eas),
            torch.cat(gidx))


def cosine_warmup_lambda(total_steps: int, warmup_ratio: float):
    warmup = max(1, int(round(total_steps * warmup_ratio)))

    def schedule(step: int) -> float:
        if step < warmup:
            return (step + 1) / warmup
        span = max(1, total_steps - warmup)
        progress = min(1.0, (step - warmup) / span)
        return 0.5 * (1.0 + math.cos(math.pi * progress))

    return schedule


class ContrastiveGraphEncoder(BaseEstimator, TransformerMixin):
    """Unsupervised graph encoder trained on two augmented views per graph.

    Parameters mirror the desk-scale defaults; ``transform`` returns a
    float32 matrix with one embedding row per input graph.
    """

    def __init__(self, feature_dim=64, hidden_dim=128, embedding_dim=128,
                 num_layers=3, temperature=0.2, edge_drop_prob=0.15,
                 feature_noise_sigma=0.05, epochs=50, batch_size=8,
                 learning_rate=1e-3, weight_decay=0.0, warmup_ratio=0.03,
                 featurizer_seed=0, seed=0):
        self.feature_dim = feature_dim
        self.hidden_dim = hidden_dim
        self.embedding_dim = embedding_dim
        self.num_layers = num_layers
        self.temperature = temperature
        self.edge_drop_prob = edge_drop_prob
        self.feature_noise_sigma = feature_noise_sigma
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.warmup_ratio = warmup_ratio
        self.featurizer_seed = featurizer_seed
        self.seed = seed

    # -- wiring --
    def _check_config(self, n_graphs: int) -> None:
        if self.batch_size < 2:
            raise ConfigError("batch_size must be at least 2 for contrastive "
                              "training")
        if n_graphs < self.batch_size:
            raise ConfigError(f"corpus of {n_graphs} graphs cannot fill a "
                              f"batch of {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if not 0.0 <= self.edge_drop_prob < 1.0:
            raise ConfigError("edge_drop_prob must be in [0, 1)")
        if self.feature_noise_sigma < 0.0:
            raise ConfigError("feature_noise_sigma must be non-negative")

    def _build(self) -> None:
        torch.manual_seed(self.seed)
        self.featurizer_ = NodeFeaturizer(seed=self.featurizer_seed,
                                          output_dim=self.feature_dim)
        self.net_ = GraphEncoderNet(self.feature_dim, self.hidden_dim,
                                    self.embedding_dim, self.num_layers)
        self.policy_ = AugmentationPolicy(self.edge_drop_prob,
                                          self.feature_noise_sigma, self.seed)

    def fit(self, X: list[DataPathGraph], y=None):
        check_graph_list(X)
        self._check_config(len(X))
        self._build()
        rng = np.random.default_rng(self.seed)
        optimizer = torch.optim.AdamW(self.net_.parameters(),
                                      lr=self.learning_rate,
                                      betas=(0.9, 0.999),
                                      weight_decay=self.weight_decay)
        steps_per_epoch = len(X) // self.batch_size
        scheduler = torch.optim.lr_scheduler.LambdaLR(
            optimizer, cosine_warmup_lambda(self.epochs * steps_per_epoch,
                                            self.warmup_ratio))
        self.loss_trace_ = []
        draw = 0
        for _ in range(self.epochs):
            order = rng.permutation(len(X))
            epoch_losses = []
            for step in range(steps_per_epoch):
                batch = [X[i] for i in
                         order[step * self.batch_size:(step + 1) * self.batch_size]]
                v1 = [augment(g, self.policy_, draw + 2 * i, self.featurizer_)
                      for i, g in enumerate(batch)]
                v2 = [augment(g, self.policy_, draw + 2 * i + 1, self.featurizer_)
                      for i, g in enumerate(batch)]
                draw += 2 * len(batch)
                z1 = self.net_(*batch_views(v1), len(batch))
                z2 = self.net_(*batch_views(v2), len(batch))
                loss = info_nce(z1, z2, self.temperature)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                scheduler.step()
                epoch_losses.append(float(loss.detach()))
            self.loss_trace_.append(float(np.mean(epoch_losses)))
        self.net_.eval()
        return self

    # -- inference --
    def _require_fitted(self) -> None:
        if not hasattr(self, "net_"):
            raise NotFittedError("encoder is not fitted; call fit or load")

    def encode_view(self, view: GraphView) -> np.ndarray:
        self._require_fitted()
        with torch.no_grad():
            z = self.net_(*batch_views([view]), 1)
        return z[0].numpy()

    def encode_graph(self, graph: DataPathGraph) -> np.ndarray:
        """Embedding of one graph; raises EmptyGraphError on empty input."""
        self._require_fitted()
        if not graph.nodes:
            raise EmptyGraphError(f"graph {graph.module_name!r} has no nodes")
        return self.encode_view(graph_arrays(graph, self.featurizer_))

    def transform(self, X: list[DataPathGraph]) -> np.ndarray:
        self._require_fitted()
        check_graph_list(X)
        views = [graph_arrays(g, self.featurizer_) for g in X]
        with torch.no_grad():
            z = self.net_(*batch_views(views), len(views))
        return z.numpy()

    # -- persistence --
    def save(self, path) -> None:
        self._require_fitted()
        ckpt.save_checkpoint(path, kind="gnn", config=self.get_params(deep=False),
                             parameters=dict(self.net_.state_dict()),
                             loss_trace=self.loss_trace_)

    @classmethod
    def load(cls, path) -> "ContrastiveGraphEncoder":
        chk = ckpt.load_checkpoint(path, expected_kind="gnn")
        est = cls(**chk.config)
        est._build()
        est.net_.load_state_dict(chk.parameters)
        est.net_.eval()
        est.loss_trace_ = chk.loss_trace
        return est


def train_encoder(corpus: list[DataPathGraph],
                  **config) -> ContrastiveGraphEncoder:
    """Functional entry point: fit an encoder on a graph corpus."""
    return ContrastiveGraphEncoder(**config).fit(corpus)


def view_retrieval_recall(encoder: ContrastiveGraphEncoder,
                          graphs: list[DataPathGraph], k: int = 1,
                          draw_base: int = 1_000_000) -> float:
    """Probe: does view 1 of each graph retrieve its own view 2?

    Both views use held-out draw indices so the probe never replays
    training augmentations.
    """
    v1 = [augment(g, encoder.policy_, draw_base + 2 * i, encoder.featurizer_)
          for i, g in enumerate(graphs)]
    v2 = [augment(g, encoder.policy_, draw_base + 2 * i + 1, encoder.featurizer_)
          for i, g in enumerate(graphs)]
    with torch.no_grad():
        z1 = encoder.net_(*batch_views(v1), len(graphs))
        z2 = encoder.net_(*batch_views(v2), len(graphs))
        z1 = torch.nn.functional.normalize(z1, dim=1)
        z2 = torch.nn.functional.normalize(z2, dim=1)
        sims = z1 @ z2.T
        ranks = sims.argsort(dim=1, descending=True)[:, :k]
    hits = sum(int(i in ranks[i]) for i in range(len(graphs)))
    return hits / len(graphs)
