from models.schemas import (
    AblationRow,
    ActivationKind,
    DatasetConfig,
    DatasetName,
    GradcheckReport,
    LayerKind,
    LayerSpec,
    LayerStats,
    LRSchedule,
    LRScheduleKind,
    MetricsRecord,
    NetworkSpec,
    RuleKind,
    RunManifest,
    SweepRow,
    TrainConfig,
    UpdateRule,
)

__all__ = [
    "LayerKind",
    "ActivationKind",
    "LayerSpec",
    "NetworkSpec",
    "RuleKind",
    "UpdateRule",
    "LRScheduleKind",
    "LRSchedule",
    "DatasetName",
    "DatasetConfig",
    "TrainConfig",
    "LayerStats",
    "MetricsRecord",
    "RunManifest",
    "AblationRow",
    "SweepRow",
    "GradcheckReport",
]
