"""
Environment-driven defaults for the command line and the figure pipeline.

Values come from the process environment or a local .env file.
Library modules never read these; they take explicit arguments.
"""
import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

# Load environment variables from .env
load_dotenv()


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 0
    workers: int = Field(default=1, ge=1)
    samples: int = Field(default=100_000, ge=1)
    full_samples: int = Field(default=1_000_000, ge=1)
    output_dir: Path = Path("data/figures")


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from exc


def get_settings() -> Settings:
    """
    Build Settings from KURAMOTO_* environment variables.

    Returns:
        Settings with every unset variable at its default
    """
    workers = _int_from_env("KURAMOTO_WORKERS", os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"KURAMOTO_WORKERS must be >= 1, got {workers}")

    return Settings(
        seed=_int_from_env("KURAMOTO_SEED", 0),
        workers=workers,
        samples=_int_from_env("KURAMOTO_SAMPLES", 100_000),
        full_samples=_int_from_env("KURAMOTO_FULL_SAMPLES", 1_000_000),
        output_dir=Path(os.getenv("KURAMOTO_OUTPUT_DIR", "data/figures")),
    )
