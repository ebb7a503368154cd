"""
Tests for the GCN, GAT and GIN encoders.
"""
import numpy as np
import pytest

from app.chem.smiles import parse_smiles
from app.core.errors import ShapeMismatch
from app.core.gradcheck import gradcheck
from app.core.tensor import Tensor, matmul, relu
from app.models.gnn import encode, gat_attention, gat_layer, gcn_layer, input_projection
from app.models.params import init_params
from app.schemas.model import Backbone
from tests.conftest import draw_smooth_params, make_model_config


def _params(backbone, seed=3, dim=4, layers=2):
    config = make_model_config(backbone=backbone, dim=dim, layers=layers)
    return config, init_params(config, np.random.default_rng(seed))


@pytest.mark.parametrize("backbone", list(Backbone))
def test_output_shape(backbone, phenol):
    """Test every backbone maps N atoms to an N×d matrix."""
    # Arrange
    config, params = _params(backbone)

    # Act
    h = encode(phenol, config.gnn, params)

    # Assert
    assert h.shape == (phenol.num_atoms, 4)
    assert np.all(np.isfinite(h.data))


def test_gcn_isolated_atom_uses_only_itself():
    """Test an atom without neighbours reduces GCN to ReLU(h W)."""
    # Arrange
    graph = parse_smiles("C")
    h = Tensor([[0.5, -1.0, 2.0]])
    weight = Tensor(np.arange(6, dtype=float).reshape(3, 2) - 2.0)

    # Act
    out = gcn_layer(h, graph, weight)

    # Assert
    assert np.allclose(out.data, relu(matmul(h, weight)).data)


def test_layer_rejects_wrong_row_count(ethanol):
    """Test node matrices must have one row per atom."""
    # Act / Assert
    with pytest.raises(ShapeMismatch):
        gcn_layer(Tensor(np.zeros((2, 3))), ethanol, Tensor(np.zeros((3, 3))))


@pytest.mark.parametrize("backbone", list(Backbone))
@pytest.mark.parametrize("smiles", ["CC(=O)Oc1ccccc1C(=O)O", "CCN(CC)CC", "c1ccncc1"])
def test_permutation_equivariance(backbone, smiles):
    """Test reindexing the atoms permutes the output rows the same way."""
    # Arrange
    config, params = _params(backbone)
    graph = parse_smiles(smiles)
    order = list(np.random.default_rng(11).permutation(graph.num_atoms))

    # Act
    original = encode(graph, config.gnn, params).data
    permuted = encode(graph.permute(order), config.gnn, params).data

    # Assert
    assert np.allclose(permuted, original[order], atol=1e-10)


def test_gat_attention_is_local(phenol):
    """Test GAT coefficients sum to 1 and vanish outside each neighbourhood."""
    # Arrange
    config, params = _params(Backbone.GAT)
    h = input_projection(phenol.node_features, params)
    head = (params["gnn.0.head0.W"], params["gnn.0.head0.a_src"], params["gnn.0.head0.a_dst"])

    # Act
    alpha = gat_attention(h, phenol, head)

    # Assert
    assert np.allclose(alpha.sum(axis=1), 1.0)
    assert np.all(alpha[~phenol.neighbor_mask] == 0.0)


def test_single_head_layer_mixes_with_its_attention(phenol):
    """Test a one-head GAT layer without activation is alpha @ (H W)."""
    # Arrange
    _, params = _params(Backbone.GAT)
    h = input_projection(phenol.node_features, params)
    head = (params["gnn.0.head0.W"], params["gnn.0.head0.a_src"], params["gnn.0.head0.a_dst"])

    # Act
    out = gat_layer(h, phenol, [head], activate=False).data

    # Assert
    expected = gat_attention(h, phenol, head) @ (h.data @ head[0].data)
    assert np.allclose(out, expected, atol=1e-12)


def test_features_override(ethanol):
    """Test passing explicit features replaces the graph's own matrix."""
    # Arrange
    config, params = _params(Backbone.GIN)

    # Act
    default = encode(ethanol, config.gnn, params).data
    same = encode(ethanol, config.gnn, params, features=ethanol.node_features).data
    zeroed = encode(ethanol, config.gnn, params, features=np.zeros_like(ethanol.node_features)).data

    # Assert
    assert np.array_equal(default, same)
    assert not np.array_equal(default, zeroed)


@pytest.mark.parametrize("backbone", list(Backbone))
@pytest.mark.parametrize("seed", range(10))
def test_encoder_gradients(backbone, seed, phenol, kink_monitor):
    """Test encoder gradients of every parameter against central differences."""
    # Arrange
    config = make_model_config(backbone=backbone)
    params = draw_smooth_params(config, seed, lambda p: encode(phenol, config.gnn, p), kink_monitor)
    tensors = [tensor for name, tensor in params.items() if name.startswith(("input.", "gnn."))]

    def fn():
        return encode(phenol, config.gnn, params)

    # Act
    error = gradcheck(fn, tensors, eps=1e-4, rng=np.random.default_rng(seed), max_entries=12)

    # Assert
    assert error < 1e-4
