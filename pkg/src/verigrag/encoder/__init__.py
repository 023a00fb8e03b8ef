"""Structural graph encoder: features, augmentation, convolution, training."""

from .augment import AugmentationPolicy, GraphView, augment, graph_arrays
from .featurizer import NodeFeaturizer
from .gine import GINELayer, gine_conv
from .losses import cosine_matrix, info_nce
from .model import (ContrastiveGraphEncoder, GraphEncoderNet, batch_views,
                    train_encoder, view_retrieval_recall)

__all__ = [
    "AugmentationPolicy", "GraphView", "augment", "graph_arrays",
    "NodeFeaturizer", "GINELayer", "gine_conv", "info_nce", "cosine_matrix",
    "ContrastiveGraphEncoder", "GraphEncoderNet", "batch_views",
    "train_encoder", "view_retrieval_recall",
]
