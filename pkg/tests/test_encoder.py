import numpy as np
import pytest
import torch
from sklearn.exceptions import NotFittedError

from verigrag.encoder import ContrastiveGraphEncoder, view_retrieval_recall
from verigrag.errors import ConfigError, EmptyGraphError
from verigrag.netlist import DataPathGraph, GraphEdge, GraphNode


def permute_graph(graph, perm):
    """Relabel node ids by perm (new_id = perm[old_id]), reordering lists."""
    order = np.argsort(perm)
    nodes = []
    for new_id, old_id in enumerate(order):
        n = graph.nodes[old_id]
        nodes.append(GraphNode(id=new_id, kind=n.kind, op_type=n.op_type,
                               io_type=n.io_type, port_names=n.port_names,
                               params=n.params))
    edges = [GraphEdge(src=int(perm[e.src]), dst=int(perm[e.dst]),
                       width=e.width, width_norm=e.width_norm)
             for e in graph.edges]
    return DataPathGraph(module_name=graph.module_name,
                         source_sha256=graph.source_sha256,
                         nodes=nodes, edges=edges)


def test_permutation_invariance(trained_encoder, toy_graphs):
    rng = np.random.default_rng(0)
    for g in toy_graphs[:10]:
        perm = rng.permutation(len(g.nodes))
        z1 = trained_encoder.encode_graph(g)
        z2 = trained_encoder.encode_graph(permute_graph(g, perm))
        assert np.abs(z1 - z2).max() <= 1e-6


def test_embedding_shape_and_finiteness(trained_encoder, toy_graphs):
    z = trained_encoder.transform(toy_graphs)
    assert z.shape == (len(toy_graphs), trained_encoder.embedding_dim)
    assert np.isfinite(z).all()


def test_single_graph_matches_batch(trained_encoder, toy_graphs):
    z_batch = trained_encoder.transform(toy_graphs[:3])
    for i in range(3):
        z_one = trained_encoder.encode_graph(toy_graphs[i])
        assert np.abs(z_batch[i] - z_one).max() <= 1e-5


def test_empty_graph_rejected(trained_encoder):
    empty = DataPathGraph(module_name="e", source_sha256="00", nodes=[],
                          edges=[])
    with pytest.raises(EmptyGraphError):
        trained_encoder.encode_graph(empty)


def test_batch_infeasible_corpus(toy_graphs):
    with pytest.raises(ConfigError):
        ContrastiveGraphEncoder(batch_size=2).fit(toy_graphs[:1])
    with pytest.raises(ConfigError):
        ContrastiveGraphEncoder(batch_size=1).fit(toy_graphs)


def test_unfitted_rejected(toy_graphs):
    with pytest.raises(NotFittedError):
        ContrastiveGraphEncoder().transform(toy_graphs)


def test_training_is_deterministic(toy_graphs):
    a = ContrastiveGraphEncoder(epochs=3, seed=9).fit(toy_graphs)
    b = ContrastiveGraphEncoder(epochs=3, seed=9).fit(toy_graphs)
    assert a.loss_trace_ == b.loss_trace_
    assert np.array_equal(a.transform(toy_graphs), b.transform(toy_graphs))


def test_loss_decreases(trained_encoder):
    trace = trained_encoder.loss_trace_
    assert trace[-1] < trace[0] * 0.7


def test_view_retrieval_recall_range(trained_encoder, toy_graphs):
    recall = view_retrieval_recall(trained_encoder, toy_graphs)
    assert 0.0 <= recall <= 1.0


def test_save_load_round_trip(tmp_path, trained_encoder, toy_graphs):
    path = tmp_path / "gnn.ckpt"
    trained_encoder.save(path)
    loaded = ContrastiveGraphEncoder.load(path)
    assert np.array_equal(loaded.transform(toy_graphs),
                          trained_encoder.transform(toy_graphs))
    assert loaded.get_params(deep=False) == trained_encoder.get_params(
        deep=False)


def test_sklearn_param_interface():
    enc = ContrastiveGraphEncoder(epochs=5)
    params = enc.get_params()
    assert params["epochs"] == 5
    enc.set_params(temperature=0.5)
    assert enc.temperature == 0.5


def test_gradients_flow_through_edge_features(toy_graphs):
    enc = ContrastiveGraphEncoder(epochs=1, batch_size=4, seed=0)
    enc.fit(toy_graphs[:8])
    weights = [layer.edge_proj.weight for layer in enc.net_.layers]
    assert all(torch.isfinite(w).all() for w in weights)
