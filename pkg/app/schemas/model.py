from pydantic import BaseModel, ConfigDict, Field, model_validator
import enum


class Backbone(str, enum.Enum):
    """GNN encoder families."""
    GCN = "gcn"
    GAT = "gat"
    GIN = "gin"


class ModelVariant(str, enum.Enum):
    """Full model and its ablations."""
    FULL = "full"
    NO_SE_SI = "no_se_si"   # plain concatenated readouts
    NO_SD = "no_sd"         # SE + SI without substructure dropping


class GnnConfig(BaseModel):
    """Encoder hyperparameters."""
    model_config = ConfigDict(frozen=True, use_enum_values=False)

    backbone: Backbone = Field(default=Backbone.GIN, description="Message-passing family")
    layers: int = Field(default=3, ge=1, description="Number of GNN layers L")
    dim: int = Field(default=64, gt=0, description="Node embedding width d")
    heads: int = Field(default=2, ge=1, description="GAT attention heads")
    gin_eps_learnable: bool = Field(default=True, description="Learn GIN's epsilon (initialized at 0)")

    @model_validator(mode="after")
    def _heads_divide_dim(self):
        if self.backbone == Backbone.GAT and self.dim % self.heads != 0:
            raise ValueError(f"gnn.dim ({self.dim}) must be divisible by gnn.heads ({self.heads})")
        return self


class ModelConfig(BaseModel):
    """Everything needed to rebuild the parameter layout of a model."""
    model_config = ConfigDict(frozen=True)

    feature_dim: int = Field(..., gt=0, description="Width F of the one-hot atom features")
    num_types: int = Field(..., gt=0, description="Number of DDI types T")
    patterns: int = Field(default=60, gt=0, description="Number of learnable patterns M")
    gnn: GnnConfig = Field(default_factory=GnnConfig)
    variant: ModelVariant = Field(default=ModelVariant.FULL)

    @property
    def uses_substructures(self) -> bool:
        return self.variant != ModelVariant.NO_SE_SI

    @property
    def predictor_input_dim(self) -> int:
        d = self.gnn.dim
        if self.uses_substructures:
            return 2 * d + self.patterns ** 2 + self.num_types
        return 2 * d + self.num_types
