import os

import pytest

from config import resolve_train_config
from config.settings import settings
from trainer import train

pytestmark = [
    pytest.mark.extended,
    pytest.mark.skipif(os.environ.get("GHL_RUN_EXTENDED") != "1", reason="set GHL_RUN_EXTENDED=1 for the multi-hour run"),
]


def test_deephebb_replica_on_cifar10():
    """Test the 96/384/1536 Triangle network trained with GHL on full CIFAR-10"""
    config = resolve_train_config("cifar10_deephebb_ghl")
    result = train(config, settings.data_dir)
    assert result.metrics[-1].test_acc >= 0.80
