from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import ConfigError
from app.schemas.model import GnnConfig, ModelConfig, ModelVariant
from app.schemas.sample import SplitMode, SplitSpec


class LrStage(BaseModel):
    """Learning rate `lr` applies from `start_epoch` (0-based) until the next stage."""
    start_epoch: int = Field(..., ge=0)
    lr: float = Field(..., gt=0)


class TrainConfig(BaseModel):
    epochs: int = Field(default=300, gt=0)
    batch_size: int = Field(default=256, gt=0)
    lr_schedule: List[LrStage] = Field(
        default_factory=lambda: [LrStage(start_epoch=0, lr=1e-3), LrStage(start_epoch=200, lr=1e-4)]
    )
    augment: bool = Field(default=True, description="Substructure dropping during training")
    augment_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    both_orderings: bool = Field(default=False, description="Also train on (drug2, drug1, t)")

    @field_validator("lr_schedule", mode="before")
    @classmethod
    def _parse_schedule(cls, value: Any) -> Any:
        # "0:0.001,200:0.0001" in config files and environment variables
        if isinstance(value, str):
            stages = []
            for chunk in value.split(","):
                chunk = chunk.strip()
                if not chunk:
                    continue
                start, _, lr = chunk.partition(":")
                if not lr:
                    raise ValueError(f"lr stage {chunk!r} must look like <start_epoch>:<lr>")
                stages.append({"start_epoch": int(start), "lr": float(lr)})
            return stages
        return value

    @model_validator(mode="after")
    def _schedule_is_ordered(self):
        starts = [stage.start_epoch for stage in self.lr_schedule]
        if not starts or starts[0] != 0:
            raise ValueError("lr_schedule must start at epoch 0")
        if starts != sorted(set(starts)):
            raise ValueError("lr_schedule start epochs must be strictly increasing")
        return self

    def lr_at(self, epoch: int) -> float:
        lr = self.lr_schedule[0].lr
        for stage in self.lr_schedule:
            if epoch >= stage.start_epoch:
                lr = stage.lr
        return lr


class FingerprintConfig(BaseModel):
    radius: int = Field(default=2, ge=0)
    width: int = Field(default=2048, gt=0)

    @field_validator("width")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"fingerprint width must be a power of two, got {value}")
        return value


class RunConfig(BaseSettings):
    model_config = SettingsConfigDict(
        # Environment variables (MSAN_GNN__DIM=128) win over the optional .env file;
        # explicit keyword arguments (config file + CLI flags) win over both.
        env_prefix="MSAN_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    drugs_path: Path = Path("data/drugs.csv")
    pairs_path: Path = Path("data/pairs.csv")
    checkpoint_path: Path = Path("runs/model.ckpt")
    output_dir: Path = Path("runs")

    mode: SplitMode = SplitMode.TRANSDUCTIVE
    seed: int = Field(default=0, ge=0)
    fold: int = Field(default=0, ge=0)

    patterns: int = Field(default=60, gt=0, description="Number of representative vectors M")
    variant: ModelVariant = ModelVariant.FULL
    gnn: GnnConfig = Field(default_factory=GnnConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    fingerprint: FingerprintConfig = Field(default_factory=FingerprintConfig)

    top_k: int = Field(default=10, gt=0)
    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value!r}")
        return value

    @property
    def resolved_checkpoint(self) -> Path:
        """Checkpoint path with any ``{fold}`` placeholder filled in."""
        return Path(str(self.checkpoint_path).replace("{fold}", str(self.fold)))

    @property
    def augment_enabled(self) -> bool:
        return self.train.augment and self.variant == ModelVariant.FULL

    @property
    def split_spec(self) -> SplitSpec:
        return SplitSpec(mode=self.mode, seed=self.seed, fold=self.fold)

    def build_model_config(self, feature_dim: int, num_types: int) -> ModelConfig:
        return ModelConfig(
            feature_dim=feature_dim,
            num_types=num_types,
            patterns=self.patterns,
            gnn=self.gnn,
            variant=self.variant,
        )


def _assign(target: Dict[str, Any], dotted: List[str], value: Any) -> None:
    node = target
    for part in dotted[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"key {'.'.join(dotted)!r} conflicts with a scalar value")
    node[dotted[-1]] = value


def _key_lines(path: Path) -> Dict[str, int]:
    lines: Dict[str, int] = {}
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#") or "=" not in text:
            continue
        key = text.split("=", 1)[0].strip()
        if key.startswith("export "):
            key = key[len("export "):].strip()
        lines[key.lower()] = number
    return lines


def _line_for(loc: str, lines: Mapping[str, int]) -> Optional[int]:
    for key, number in lines.items():
        if loc == key or loc.startswith(key + ".") or key.startswith(loc + "."):
            return number
    return None


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Build a RunConfig from defaults, environment, a key=value file and flag overrides.

    Keys use dots for nested sections (``gnn.backbone=gat``). Overrides whose
    value is None are ignored so argparse namespaces can be passed through.
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}

    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError("config file not found", path)
        lines = _key_lines(path)
        for key, value in dotenv_values(path).items():
            if value is None:
                raise ConfigError(f"key {key!r} has no value", path, lines.get(key.lower()))
            _assign(values, key.strip().lower().split("."), value)

    for key, value in (overrides or {}).items():
        if value is not None:
            _assign(values, key.split("."), value)

    try:
        return RunConfig(**values)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = ".".join(str(part) for part in error["loc"])
        message = f"{loc or 'config'}: {error['msg']}"
        if path is not None:
            raise ConfigError(message, path, _line_for(loc, lines)) from exc
        raise ConfigError(message) from exc
