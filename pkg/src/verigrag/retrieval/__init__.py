"""Cross-modal retrieval: teacher/student training and the cosine index."""

from .index import ApproximateBackend, RetrievalIndex, build_index, retrieve
from .towers import (CrossAttentionEncoder, DualEncoder, GraphEmbTower,
                     TextEncoderTower)
from .train import (CrossAttentionTeacher, DistilledDualEncoder,
                    distill_student, recall_at_k, teacher_encode,
                    train_teacher)

__all__ = [
    "ApproximateBackend", "RetrievalIndex", "build_index", "retrieve",
    "CrossAttentionEncoder", "DualEncoder", "GraphEmbTower",
    "TextEncoderTower", "CrossAttentionTeacher", "DistilledDualEncoder",
    "distill_student", "recall_at_k", "teacher_encode", "train_teacher",
]
