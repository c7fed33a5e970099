import numpy as np
import pytest

from config import resolve_train_config
from models.schemas import RuleKind
from services.experiment_service import ExperimentService

pytestmark = pytest.mark.slow

ETA_GRID = [0.005, 0.01, 0.02, 0.05, 0.1]
SEEDS = [0, 1, 2, 3, 4]


def test_global_and_local_signals_ordering(tmp_path):
    """Test GHL >= SignOnly and GHL >= HebbSWTA on blobs, with the SGD control above 95%"""
    base = resolve_train_config("blobs_ghl")
    rules = [RuleKind.GHL, RuleKind.SIGN_ONLY, RuleKind.HEBB_SWTA, RuleKind.BACKPROP_SGD]
    rows = ExperimentService(tmp_path / "data", threads=1).ablate(base, rules, SEEDS, tmp_path / "ablate", ETA_GRID)

    mean = {rule: float(np.mean([r.test_acc for r in rows if r.rule == rule])) for rule in rules}
    assert mean[RuleKind.GHL] >= mean[RuleKind.SIGN_ONLY], mean
    assert mean[RuleKind.GHL] >= mean[RuleKind.HEBB_SWTA], mean
    assert mean[RuleKind.BACKPROP_SGD] >= 0.95, mean
    assert (tmp_path / "ablate" / "summary.md").is_file()
