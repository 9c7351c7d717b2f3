"""Model hyperparameters, ablation switches and named presets"""
import math
from dataclasses import dataclass, field, fields, replace, asdict
from typing import Dict, List, Tuple

from utils.errors import ConfigError

# Values explored by the published grid search; documentation only.
SEARCH_GRID: Dict[str, Tuple] = {
    "lr": (5e-4, 1e-3, 5e-3),
    "d": (32, 64, 128),
    "h": (64, 128, 256),
    "p": (2, 3, 4),
    "L": (2, 3, 4),
    "K": (1, 2, 3),
    "S_k": (16, 32, 64, 128, 256),
    "M_k": (2, 4, 8, 16, 32),
}

# Dataset-specific spatial settings (regions per scale, pool size per scale).
DATASET_PRESETS: Dict[str, Tuple[List[int], List[int]]] = {
    "sd": ([128], [32]),
    "gba": ([256, 32], [32, 4]),
    "gla": ([128, 16], [32, 2]),
    "ca": ([256, 32], [32, 4]),
}


@dataclass
class Ablation:
    """Component switches; turning one off gives the matching w/o variant"""
    adaptive_mixing: bool = True       # w/o AM
    temporal_hierarchy: bool = True    # w/o TH
    spatial_hierarchy: bool = True     # w/o SH
    temporal_propagation: bool = True  # w/o TP
    spatial_propagation: bool = True   # w/o SP

    VARIANTS = {
        "am": "adaptive_mixing",
        "th": "temporal_hierarchy",
        "sh": "spatial_hierarchy",
        "tp": "temporal_propagation",
        "sp": "spatial_propagation",
    }

    def without(self, short_name: str) -> "Ablation":
        if short_name not in self.VARIANTS:
            raise ConfigError(f"unknown ablation {short_name!r}; expected one of {sorted(self.VARIANTS)}")
        return replace(self, **{self.VARIANTS[short_name]: False})


@dataclass
class ModelConfig:
    """Full hyperparameter record"""
    num_nodes: int
    input_len: int = 12
    output_len: int = 12
    dim: int = 64
    hidden: int = 128
    window: int = 2
    num_blocks: int = 4
    regions: List[int] = field(default_factory=list)
    pool_sizes: List[int] = field(default_factory=list)
    alpha: float = 1.0
    beta: float = 0.1
    interval_minutes: int = 15
    ablation: Ablation = field(default_factory=Ablation)

    @property
    def num_scales(self) -> int:
        """K as built: 0 when the spatial hierarchy is switched off"""
        return len(self.regions) if self.ablation.spatial_hierarchy else 0

    @property
    def effective_regions(self) -> List[int]:
        return list(self.regions) if self.ablation.spatial_hierarchy else []

    @property
    def effective_pool_sizes(self) -> List[int]:
        return list(self.pool_sizes) if self.ablation.spatial_hierarchy else []

    @property
    def effective_window(self) -> int:
        return self.window if self.ablation.temporal_hierarchy else 1

    def pyramid_lengths(self) -> List[int]:
        """[T_0, T_1, ..., T_L] with T_l = ceil(T_{l-1} / p)"""
        lengths = [self.input_len]
        for _ in range(self.num_blocks):
            lengths.append(math.ceil(lengths[-1] / self.effective_window))
        return lengths

    def validate(self) -> "ModelConfig":
        """
        Check the record for inconsistent settings

        Returns:
            self, for chaining

        Raises:
            ConfigError: naming the first violated constraint
        """
        positive = ("num_nodes", "input_len", "output_len", "dim", "hidden", "window", "num_blocks",
                    "interval_minutes")
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if 1440 % self.interval_minutes:
            raise ConfigError(f"interval_minutes={self.interval_minutes} does not divide a day")
        if len(self.regions) != len(self.pool_sizes):
            raise ConfigError(f"regions {self.regions} and pool_sizes {self.pool_sizes} differ in length")
        if any(s < 1 for s in self.regions) or any(m < 1 for m in self.pool_sizes):
            raise ConfigError("region counts and pool sizes must be positive")
        bounds = [self.num_nodes] + list(self.regions)
        if any(bounds[i + 1] >= bounds[i] for i in range(len(self.regions))):
            raise ConfigError(f"regions must strictly decrease below num_nodes={self.num_nodes}, got {self.regions}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be non-negative")
        return self

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict) -> "ModelConfig":
        values = dict(values)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown model keys: {unknown}")
        ablation = values.pop("ablation", None) or {}
        if not isinstance(ablation, Ablation):
            allowed = {f.name for f in fields(Ablation)}
            bad = sorted(set(ablation) - allowed)
            if bad:
                raise ConfigError(f"unknown ablation keys: {bad}")
            ablation = Ablation(**ablation)
        if "num_nodes" not in values:
            raise ConfigError("model.num_nodes is required")
        return cls(ablation=ablation, **values)

    @classmethod
    def preset(cls, name: str, num_nodes: int, **overrides) -> "ModelConfig":
        """Published dataset settings (sd, gba, gla, ca) with d=64, h=128, p=2, L=4"""
        key = name.lower()
        if key not in DATASET_PRESETS:
            raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(DATASET_PRESETS)}")
        regions, pools = DATASET_PRESETS[key]
        return cls(num_nodes=num_nodes, regions=list(regions), pool_sizes=list(pools), **overrides)

    @classmethod
    def tiny(cls, **overrides) -> "ModelConfig":
        """Gradient-check scale: N=8, T=12, d=4, h=8, p=2, L=4, S=[4, 2], M=[2, 2]"""
        values = dict(num_nodes=8, input_len=12, output_len=12, dim=4, hidden=8, window=2, num_blocks=4,
                      regions=[4, 2], pool_sizes=[2, 2])
        values.update(overrides)
        return cls(**values)


