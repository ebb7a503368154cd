"""
Shared test fixtures and configuration.
"""
import numpy as np
import pytest

from app.chem.smiles import parse_smiles
from app.chem.vocab import FEATURE_DIM
from app.core import tensor as tensor_ops
from app.data.synthetic import generate_synthetic
from app.models import gnn as gnn_module
from app.models import msan as msan_module
from app.models.params import ModelParams, init_params
from app.schemas.model import Backbone, GnnConfig, ModelConfig, ModelVariant

# Finite differences at step 1e-4 (five-point stencil, reach 2e-4) stay on one
# side of every activation kink when inputs keep at least this distance.
KINK_MARGIN = 2e-3
MIN_ROW_NORM = 0.05


TOY_DRUGS = {
    "D1": "CCO",
    "D2": "c1ccccc1O",
    "D3": "CC(=O)O",
    "D4": "CN",
    "D5": "ClCCl",
    "D6": "C#N",
}

TOY_PAIRS = [
    ("D1", "D2", "1"),
    ("D1", "D3", "2"),
    ("D2", "D4", "1"),
    ("D3", "D5", "10"),
    ("D4", "D6", "2"),
]


@pytest.fixture
def rng():
    """Seeded generator, fresh for every test."""
    return np.random.default_rng(1234)


@pytest.fixture
def ethanol():
    return parse_smiles("CCO")


@pytest.fixture
def phenol():
    return parse_smiles("c1ccccc1O")


def make_model_config(
    backbone: Backbone = Backbone.GIN,
    dim: int = 4,
    layers: int = 2,
    patterns: int = 2,
    num_types: int = 3,
    variant: ModelVariant = ModelVariant.FULL,
    heads: int = 2,
) -> ModelConfig:
    return ModelConfig(
        feature_dim=FEATURE_DIM,
        num_types=num_types,
        patterns=patterns,
        gnn=GnnConfig(backbone=backbone, dim=dim, layers=layers, heads=heads),
        variant=variant,
    )


@pytest.fixture
def small_config():
    """A tiny GIN model: d=4, L=2, M=2, T=3."""
    return make_model_config()


@pytest.fixture
def small_params(small_config):
    return init_params(small_config, np.random.default_rng(7))


@pytest.fixture
def toy_files(tmp_path):
    """drugs.csv and pairs.csv with six small molecules and five typed pairs."""
    drugs = tmp_path / "drugs.csv"
    pairs = tmp_path / "pairs.csv"
    drugs.write_text(
        "drug_id,smiles\n" + "".join(f"{k},{v}\n" for k, v in TOY_DRUGS.items()), encoding="utf-8"
    )
    pairs.write_text(
        "drug1_id,drug2_id,ddi_type\n" + "".join(f"{a},{b},{t}\n" for a, b, t in TOY_PAIRS), encoding="utf-8"
    )
    return drugs, pairs


@pytest.fixture
def synthetic_dir(tmp_path):
    """A small procedurally generated dataset written to disk."""
    dataset = generate_synthetic(n_drugs=12, n_pairs=60, n_types=3, seed=0)
    dataset.write(tmp_path / "data")
    return tmp_path / "data"


@pytest.fixture
def cli_config(tmp_path, synthetic_dir):
    """Config file for fast end-to-end CLI runs."""
    path = tmp_path / "run.env"
    path.write_text(
        "\n".join([
            f"drugs_path={synthetic_dir / 'drugs.csv'}",
            f"pairs_path={synthetic_dir / 'pairs.csv'}",
            f"output_dir={tmp_path / 'runs'}",
            f"checkpoint_path={tmp_path / 'runs' / 'model.ckpt'}",
            "patterns=3",
            "gnn.backbone=gin",
            "gnn.dim=8",
            "gnn.layers=2",
            "train.epochs=2",
            "train.batch_size=32",
            "log_level=WARNING",
        ]) + "\n",
        encoding="utf-8",
    )
    return path


class KinkMonitor:
    """Closest approach of any activation input to a non-smooth point."""

    def __init__(self):
        self.reset()

    def reset(self):
        self.margin = np.inf
        self.min_norm = np.inf

    def note(self, distances):
        if distances.size:
            self.margin = min(self.margin, float(np.min(distances)))

    def note_norms(self, norms):
        nonzero = norms[norms > 0]
        if nonzero.size:
            self.min_norm = min(self.min_norm, float(np.min(nonzero)))

    @property
    def clear(self) -> bool:
        return self.margin >= KINK_MARGIN and self.min_norm >= MIN_ROW_NORM


@pytest.fixture
def kink_monitor(monkeypatch):
    """Records activation inputs of the encoder and the pair model while a test runs."""
    monitor = KinkMonitor()

    def at_zero(op):
        def watched(x, *args, **kwargs):
            monitor.note(np.abs(x.data))
            return op(x, *args, **kwargs)
        return watched

    def watched_clamp(x, low, high):
        monitor.note(np.minimum(np.abs(x.data - low), np.abs(x.data - high)))
        return tensor_ops.clamp(x, low, high)

    def watched_normalize(x):
        monitor.note_norms(np.sqrt((x.data * x.data).sum(axis=1)))
        return tensor_ops.l2_normalize_rows(x)

    for name in ("relu", "leaky_relu", "elu"):
        monkeypatch.setattr(gnn_module, name, at_zero(getattr(tensor_ops, name)))
    monkeypatch.setattr(msan_module, "relu", at_zero(tensor_ops.relu))
    monkeypatch.setattr(msan_module, "clamp", watched_clamp)
    monkeypatch.setattr(msan_module, "l2_normalize_rows", watched_normalize)
    return monitor


def draw_smooth_params(config: ModelConfig, seed: int, forward, monitor: KinkMonitor, attempts: int = 500) -> ModelParams:
    """Parameters with random biases whose forward pass keeps clear of every kink.

    ``forward(params)`` runs the computation under test once; draws are
    repeated from the same seeded generator until the monitor reports a clear
    pass.
    """
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        params = init_params(config, rng)
        for name, tensor in params.items():
            if name.rsplit(".", 1)[-1] in ("b", "b1", "b2"):
                tensor.data[...] = rng.normal(scale=0.5, size=tensor.shape)
        monitor.reset()
        with tensor_ops.no_grad():
            forward(params)
        if monitor.clear:
            return params
    raise AssertionError(f"no kink-free parameters for seed {seed} in {attempts} draws")
