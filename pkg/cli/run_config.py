"""Run configuration: one YAML document with model, data, trainer, gradcheck and bench sections

    seed: 0
    output_dir: runs/example
    model:                    # ModelConfig fields; `preset` fills regions/pool_sizes
      num_nodes: 32
      preset: null
      dim: 16
      ...
      ablation: {adaptive_mixing: true, ...}
    data:
      path: data/synth.hstd1
      aggregate: 1
      ratios: [0.6, 0.2, 0.2]
      per_node: false
      seasonal: false
      static_embedding: null
      adjacency: null
    trainer: {epochs: 30, patience: 5, lr: 0.001, batch_size: 64, clip_norm: 5.0, max_steps: null}
    gradcheck: {samples: 8, batch: 2, tolerance: 1.0e-05}
    bench: {node_list: [256, 512, 1024, 2048], batch: 1, repeats: 5}

Unknown keys are rejected at every level.
"""
import logging
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from model import ModelConfig, DATASET_PRESETS
from utils.config import Config
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class DataSettings:
    path: Optional[str] = None
    aggregate: int = 1
    ratios: List[float] = field(default_factory=lambda: [0.6, 0.2, 0.2])
    per_node: bool = False
    seasonal: bool = False
    static_embedding: Optional[str] = None
    adjacency: Optional[str] = None


@dataclass
class TrainerSettings:
    epochs: Optional[int] = None
    patience: Optional[int] = None
    lr: float = Config.LEARNING_RATE
    batch_size: int = Config.BATCH_SIZE
    clip_norm: float = Config.CLIP_NORM
    max_steps: Optional[int] = None


@dataclass
class GradcheckSettings:
    samples: Optional[int] = 8
    batch: int = 2
    tolerance: float = Config.GRADCHECK_TOLERANCE


@dataclass
class BenchSettings:
    node_list: List[int] = field(default_factory=lambda: [256, 512, 1024, 2048])
    batch: int = 1
    repeats: int = 5


def _section(cls, name: str, values: Optional[Dict[str, Any]]):
    if values is None:
        return cls()
    if not isinstance(values, dict):
        raise ConfigError(f"section '{name}' must be a mapping, got {type(values).__name__}")
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {unknown}")
    return cls(**values)


@dataclass
class RunConfig:
    model: ModelConfig
    data: DataSettings = field(default_factory=DataSettings)
    trainer: TrainerSettings = field(default_factory=TrainerSettings)
    gradcheck: GradcheckSettings = field(default_factory=GradcheckSettings)
    bench: BenchSettings = field(default_factory=BenchSettings)
    seed: int = 0
    output_dir: str = "runs/default"

    SECTIONS = ("model", "data", "trainer", "gradcheck", "bench", "seed", "output_dir")

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RunConfig":
        """
        Build and validate a run configuration

        Raises:
            ConfigError: unknown keys, wrong types or invalid values
        """
        if not isinstance(values, dict):
            raise ConfigError("run configuration must be a mapping at the top level")
        unknown = sorted(set(values) - set(cls.SECTIONS))
        if unknown:
            raise ConfigError(f"unknown top-level keys: {unknown}")
        if "model" not in values or not isinstance(values["model"], dict):
            raise ConfigError("run configuration needs a 'model' mapping")
        model_values = dict(values["model"])
        preset = model_values.pop("preset", None)
        try:
            if preset is not None:
                if preset not in DATASET_PRESETS:
                    raise ConfigError(f"unknown preset {preset!r}; expected one of {sorted(DATASET_PRESETS)}")
                regions, pools = DATASET_PRESETS[preset]
                model_values.setdefault("regions", list(regions))
                model_values.setdefault("pool_sizes", list(pools))
            model = ModelConfig.from_dict(model_values).validate()
            config = cls(
                model=model,
                data=_section(DataSettings, "data", values.get("data")),
                trainer=_section(TrainerSettings, "trainer", values.get("trainer")),
                gradcheck=_section(GradcheckSettings, "gradcheck", values.get("gradcheck")),
                bench=_section(BenchSettings, "bench", values.get("bench")),
                seed=int(values.get("seed", 0)),
                output_dir=str(values.get("output_dir", "runs/default")),
            )
        except TypeError as e:
            raise ConfigError(f"invalid run configuration: {e}") from e
        return config.validate()

    def validate(self) -> "RunConfig":
        if self.data.aggregate < 1:
            raise ConfigError(f"data.aggregate must be >= 1, got {self.data.aggregate}")
        if len(self.data.ratios) != 3:
            raise ConfigError(f"data.ratios needs three values, got {self.data.ratios}")
        t = self.trainer
        for name in ("epochs", "patience", "max_steps"):
            value = getattr(t, name)
            if value is not None and value < 0:
                raise ConfigError(f"trainer.{name} must be non-negative, got {value}")
        if t.batch_size < 1 or t.lr < 0:
            raise ConfigError("trainer.batch_size must be positive and trainer.lr non-negative")
        if self.gradcheck.batch < 1 or (self.gradcheck.samples is not None and self.gradcheck.samples < 1):
            raise ConfigError("gradcheck.batch and gradcheck.samples must be positive")
        if self.bench.repeats < 1 or self.bench.batch < 1:
            raise ConfigError("bench.repeats and bench.batch must be positive")
        return self

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                values = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: not valid YAML: {e}") from e
        config = cls.from_dict(values or {})
        logger.info(f"Run configuration loaded from {path}")
        return config

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "output_dir": self.output_dir,
            "model": self.model.to_dict(),
            "data": asdict(self.data),
            "trainer": asdict(self.trainer),
            "gradcheck": asdict(self.gradcheck),
            "bench": asdict(self.bench),
        }

    def dump(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False)
        return path
