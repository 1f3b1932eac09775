"""
LIPSCHITZ BOUNDARY TOOLKIT - CONFIGURATION
==========================================
Centralized configuration management using Pydantic Settings
"""

from pathlib import Path
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load .env file
load_dotenv()

PROJECT_ROOT = Path(__file__).parent


class Settings(BaseSettings):
    """Toolkit Settings"""

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",  # Ignore extra variables in .env
    )

    # ============================================
    # APPLICATION
    # ============================================
    APP_NAME: str = "Lipschitz Boundary Toolkit"
    APP_VERSION: str = "1.0"
    ENVIRONMENT: str = Field(default="development")
    DEBUG: bool = Field(default=False)

    # ============================================
    # NUMERICS
    # ============================================
    TOLERANCE: float = Field(default=1e-9, gt=0)  # absolute tolerance for exact identities
    DISTANCE_CACHE_LIMIT: int = 2000  # above this, coordinate distances are computed on demand
    TRIANGLE_EXHAUSTIVE_LIMIT: int = 500  # exhaustive triangle check up to this many points
    TRIANGLE_SAMPLES: int = 20000  # random triples checked above the limit
    BLOCK_SIZE: int = 512  # rows per distance block
    PARALLEL_WIDTH: int = Field(default=1, ge=1)

    # Schedule / local step
    BISECTION_XTOL: float = 1e-12
    MU_INFLATION_RTOL: float = 1e-12
    MU_INFLATION_ATOL: float = 1e-12
    SCHEDULE_NUDGE: float = 1e-12  # added to each bisection root for strict feasibility
    SCHEDULE_MIN_GAP: float = 1e-9  # smallest increment lambda_n - lambda_{n-1}
    SCHEDULE_SLACK: float = 1e-10  # allowed violation of the stage budget inequality
    SCHEDULE_HEADROOM_FLOOR: float = 1e-4  # below this 1 - lambda_n, the remaining points form one final stage

    # Grid smoothing
    STENCIL_RADIUS: int = 3  # lattice offsets used by discrete Lipschitz constants
    BALL_SAMPLES: int = 50  # sampled balls per local Lipschitz audit
    MESH_CONSTANT_CAP: float = 5.0
    RADIUS_LEVELS: int = 64  # distinct kernel radii before quantization kicks in

    # Eikonal
    RESIDUAL_TOL: float = 0.05
    RHO_MAX: float = 0.05
    SAWTOOTH_MARGIN: float = 1e-3
    MIN_CELL_INTERVALS: int = 2
    GLOBAL_APPROX_MAX_NODES: int = 4000

    # Reproducibility
    SEED: int = 0

    # ============================================
    # FILES
    # ============================================
    RUN_CONFIG_FILE: str = str(PROJECT_ROOT / "lipschitz_config.json")

    # ============================================
    # LOGGING
    # ============================================
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FILE: str = Field(default="logs/lipschitz.log")

    # ============================================
    # COMPUTED PROPERTIES
    # ============================================

    def is_production(self) -> bool:
        """Check if running in production mode"""
        return self.ENVIRONMENT == "production"

    def worker_count(self, requested: int | None = None) -> int:
        """Effective parallelism width (requested value wins over the setting)"""
        width = requested if requested is not None else self.PARALLEL_WIDTH
        return max(1, int(width))


# Global settings instance
settings = Settings()

LOG_DIR = PROJECT_ROOT / "logs"
