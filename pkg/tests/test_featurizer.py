import numpy as np

from verigrag.encoder import NodeFeaturizer
from verigrag.netlist import GraphNode


def _node(**overrides):
    base = dict(id=0, kind="cell", op_type="add", io_type=None,
                port_names=("a", "b", "y"), params=())
    base.update(overrides)
    return GraphNode(**base)


def test_identical_nodes_identical_vectors():
    f = NodeFeaturizer()
    v1 = f.featurize_node(_node())
    v2 = f.featurize_node(_node(id=5))  # id is not a feature
    assert np.array_equal(v1, v2)


def test_unit_norm():
    f = NodeFeaturizer()
    for node in (_node(), _node(kind="port_in", io_type="input"),
                 _node(op_type="const", params=(("value", "3"),))):
        assert abs(np.linalg.norm(f.featurize_node(node)) - 1.0) <= 1e-6


def test_op_type_changes_vector():
    f = NodeFeaturizer()
    v_add = f.featurize_node(_node(op_type="add"))
    v_dff = f.featurize_node(_node(op_type="dff"))
    assert np.linalg.norm(v_add - v_dff) > 1e-3


def test_seed_changes_hashing():
    node = _node()
    v0 = NodeFeaturizer(seed=0).featurize_node(node)
    v1 = NodeFeaturizer(seed=1).featurize_node(node)
    assert not np.array_equal(v0, v1)


def test_featurize_graph_shape(flip_flop_graph):
    f = NodeFeaturizer(output_dim=32)
    x = f.featurize_graph(flip_flop_graph)
    assert x.shape == (4, 32)
    assert np.isfinite(x).all()
