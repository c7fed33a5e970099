import os
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

REPO_ROOT = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    """Application settings"""

    model_config = SettingsConfigDict(env_prefix="GHL_", env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Dataset root (GHL_DATA_DIR)
    data_dir: str = "./data"

    # Run directories are created under here unless --out-dir is given
    out_dir: str = "./runs"

    # Named run configs (`--config blobs_ghl`)
    config_dir: str = str(REPO_ROOT / "configs")

    # Worker processes for ablate/sweep; 1 = deterministic mode, 0 = one per CPU
    threads: int = 1

    log_level: str = "INFO"

    # Finite-difference oracle
    gradcheck_max_weights: int = 10_000
    gradcheck_tolerance: float = 1e-5
    gradcheck_eps: float = 1e-5

    # Run directory contents
    registry_filename: str = "runs.db"
    checkpoint_filename: str = "checkpoint.ghlckpt"

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

        if self.threads <= 0:
            self.threads = os.cpu_count() or 1


# Global settings instance
settings = Settings()
