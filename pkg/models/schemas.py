from enum import Enum
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class LayerKind(str, Enum):
    DENSE = "dense"
    CONV2D = "conv2d"
    MAXPOOL = "maxpool"
    AVGPOOL = "avgpool"
    FLATTEN = "flatten"
    ACTIVATION = "activation"


class ActivationKind(str, Enum):
    RELU = "relu"
    TRIANGLE = "triangle"
    IDENTITY = "identity"


WEIGHTED_KINDS = (LayerKind.DENSE, LayerKind.CONV2D)
POOL_KINDS = (LayerKind.MAXPOOL, LayerKind.AVGPOOL)


class LayerSpec(BaseModel):
    """Declarative description of one layer; input extents are inferred."""

    model_config = ConfigDict(extra="forbid")

    kind: LayerKind
    out_features: Optional[int] = Field(default=None, ge=1)
    out_channels: Optional[int] = Field(default=None, ge=1)
    kernel_size: Optional[int] = Field(default=None, ge=1)
    # None means 1 for conv2d and kernel_size for pooling
    stride: Optional[int] = Field(default=None, ge=1)
    padding: int = Field(default=0, ge=0)
    activation: Optional[ActivationKind] = None
    p: float = Field(default=1.0, gt=0)
    plastic: bool = False

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "LayerSpec":
        if self.plastic and self.kind not in WEIGHTED_KINDS:
            raise ValueError(f"only dense and conv2d layers may be plastic, got {self.kind.value}")
        if self.kind == LayerKind.DENSE and self.out_features is None:
            raise ValueError("dense layer needs out_features")
        if self.kind == LayerKind.CONV2D and (self.out_channels is None or self.kernel_size is None):
            raise ValueError("conv2d layer needs out_channels and kernel_size")
        if self.kind in POOL_KINDS and self.kernel_size is None:
            raise ValueError(f"{self.kind.value} layer needs kernel_size")
        if self.kind in POOL_KINDS and self.padding:
            raise ValueError("pooling layers do not support padding")
        if self.kind == LayerKind.ACTIVATION and self.activation is None:
            raise ValueError("activation layer needs an activation kind")
        return self


class NetworkSpec(BaseModel):
    """Sequential layer stack applied to inputs of `input_shape` (batch axis excluded)."""

    model_config = ConfigDict(extra="forbid")

    name: str = "custom"
    input_shape: List[int] = Field(min_length=1)
    layers: List[LayerSpec] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_input_shape(self) -> "NetworkSpec":
        if any(extent < 1 for extent in self.input_shape):
            raise ValueError(f"input extents must be positive, got {self.input_shape}")
        return self


class RuleKind(str, Enum):
    GHL = "ghl"
    HEBB_SWTA = "hebb_swta"
    HEBB_OJA = "hebb_oja"
    SIGN_ONLY = "sign_only"
    BACKPROP_SGD = "backprop_sgd"

    @property
    def uses_traces(self) -> bool:
        return self in (RuleKind.GHL, RuleKind.HEBB_SWTA, RuleKind.HEBB_OJA)

    @property
    def uses_global_signal(self) -> bool:
        return self in (RuleKind.GHL, RuleKind.SIGN_ONLY, RuleKind.BACKPROP_SGD)


class UpdateRule(BaseModel):
    """How plastic layers form their weight delta each step."""

    model_config = ConfigDict(extra="forbid")

    kind: RuleKind = RuleKind.GHL
    tau: float = Field(default=1.0, gt=0)
    fixed_step: float = Field(default=1.0, gt=0)
    # M = sign(+G) exactly as the three-factor formula is written (ascends the loss)
    literal_sign: bool = False
    # modulate each (sample, position) delta before averaging
    per_sample_modulation: bool = False


class LRScheduleKind(str, Enum):
    CONSTANT = "constant"
    STEP = "step"
    COSINE = "cosine"


class LRSchedule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: LRScheduleKind = LRScheduleKind.CONSTANT
    gamma: float = Field(default=0.1, gt=0, le=1)
    every_n_epochs: int = Field(default=10, ge=1)


class DatasetName(str, Enum):
    BLOBS = "blobs"
    MNIST = "mnist"
    CIFAR10 = "cifar10"
    CIFAR100 = "cifar100"


class DatasetConfig(BaseModel):
    """Dataset selection plus preprocessing switches."""

    model_config = ConfigDict(extra="forbid")

    name: DatasetName = DatasetName.BLOBS
    seed: int = Field(default=0, ge=0)
    # synthetic blobs
    n_train: int = Field(default=300, ge=1)
    n_test: int = Field(default=150, ge=0)
    dim: int = Field(default=16, ge=1)
    classes: int = Field(default=3, ge=2)
    spread: float = Field(default=0.1, ge=0)
    image_shape: Optional[List[int]] = None
    # file datasets
    max_train: Optional[int] = Field(default=None, ge=1)
    max_test: Optional[int] = Field(default=None, ge=1)
    standardize: bool = False
    augment_flip: bool = False
    augment_crop: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_image_shape(self) -> "DatasetConfig":
        if self.image_shape is not None:
            size = 1
            for extent in self.image_shape:
                size *= extent
            if len(self.image_shape) != 3 or size != self.dim:
                raise ValueError(f"image_shape {self.image_shape} must be C,H,W with product dim={self.dim}")
        return self


class TrainConfig(BaseModel):
    """Hyperparameters of one training run."""

    model_config = ConfigDict(extra="forbid")

    name: str = "run"
    rule: UpdateRule = Field(default_factory=UpdateRule)
    eta: float = Field(default=0.1, gt=0)
    epochs: int = Field(default=1, ge=1)
    batch_size: int = Field(default=32, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    lr_schedule: LRSchedule = Field(default_factory=LRSchedule)
    arch: Union[str, NetworkSpec] = "blobs_mlp"
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    eval_every: int = Field(default=1, ge=1)
    checkpoint_path: Optional[str] = None
    loss_scale: float = Field(default=1.0, gt=0)
    eval_batch_size: int = Field(default=256, ge=1)

    @property
    def tau(self) -> float:
        return self.rule.tau


class LayerStats(BaseModel):
    """Per-unit weight-norm summary and mean applied update magnitude of one layer"""

    wnorm_min: float
    wnorm_mean: float
    wnorm_max: float
    update_mean: float


class MetricsRecord(BaseModel):
    """Results of one evaluation interval"""

    epoch: int = Field(ge=1)
    train_loss: float
    train_acc: float = Field(ge=0, le=1)
    test_acc: Optional[float] = Field(default=None, ge=0, le=1)
    wall_seconds: float = Field(ge=0)
    eta: float
    layers: Dict[int, LayerStats] = Field(default_factory=dict)


class RunManifest(BaseModel):
    """Resolved configuration and bookkeeping of one run directory"""

    command: str
    config: TrainConfig
    config_hash: str
    out_dir: str
    created_at: str
    finished_at: Optional[str] = None
    threads: int = 1


class AblationRow(BaseModel):
    """One rule × seed cell of an ablation"""

    rule: RuleKind
    seed: int
    eta: float
    train_acc: float
    test_acc: Optional[float] = None


class SweepRow(BaseModel):
    """One architecture × rule × seed cell of a sweep"""

    depth: int
    multiplier: int
    activation: ActivationKind
    rule: RuleKind
    seed: int
    train_acc: float
    test_acc: Optional[float] = None


class GradcheckReport(BaseModel):
    """Per-layer max relative error between backprop and finite differences"""

    arch: str
    seed: int
    tolerance: float
    errors: Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(err < self.tolerance for err in self.errors.values())
