"""
config/settings.py

Central configuration for the exact Kepler integrator.
Numerical tolerances, root-finder limits and output formatting live here.
"""

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Library and CLI settings.

    Only init arguments are honoured: the command-line contract reads no
    environment variables, so every value is either the default below or
    passed explicitly, e.g. ``Settings(ROOT_REL_TOL=1e-10)``.
    """

    # ==================== FREQUENCY CLASSIFICATION ====================
    ZERO_TOL: float = Field(
        default=0.0,
        ge=0.0,
        description="|E| at or below this value is treated as parabolic (0 = exact sign test)"
    )

    # ==================== STUMPFF KERNELS ====================
    STUMPFF_SERIES_THRESHOLD: float = Field(
        default=1.0,
        gt=0.0,
        description="Series evaluation for |z| below this value, closed forms above"
    )
    STUMPFF_SERIES_TERMS: int = Field(default=20, ge=8)

    # ==================== ROOT FINDING ====================
    ROOT_REL_TOL: float = Field(default=1e-12, gt=0.0)
    ROOT_MAX_ITER: int = Field(default=64, ge=1)

    # ==================== STEPPING ====================
    INVARIANT_REL_TOL: float = Field(
        default=1e-8,
        gt=0.0,
        description="Allowed mismatch between 1/8|P|^2 - E|Q|^2 and k in the energy-form time update"
    )
    MIDPOINT_SINGULAR_TOL: float = Field(default=1e-14, gt=0.0)
    COLLISION_RADIUS: float = Field(
        default=1e-9,
        gt=0.0,
        description="Baseline integrators abort when |q| drops below this radius"
    )
    PHYSICAL_SPLIT_FRACTION: float = Field(
        default=0.5,
        gt=0.0,
        lt=1.0,
        description="Max fraction of an orbital period covered by one fictitious sub-step"
    )

    # ==================== ANALYTIC REFERENCE ====================
    ORACLE_TOL: float = Field(default=1e-15, gt=0.0)
    ORACLE_MAX_ITER: int = Field(default=100, ge=1)

    # ==================== DIAGNOSTICS ====================
    DRIFT_ABS_FLOOR: float = Field(
        default=1e-10,
        gt=0.0,
        description="Drifts are relative above this reference magnitude, absolute below"
    )

    # ==================== OUTPUT ====================
    CSV_SIGNIFICANT_DIGITS: int = Field(default=17, ge=1, le=17)
    LOG_LEVEL: str = "WARNING"

    # ==================== SELF CHECK ====================
    SELFCHECK_SEED: int = 2024
    SELFCHECK_SAMPLES: int = Field(default=200, ge=1)

    model_config = SettingsConfigDict(
        validate_default=True,
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        """Restrict sources to explicit init arguments (no env, no .env)."""
        return (init_settings,)

    @model_validator(mode="after")
    def _check_log_level(self) -> "Settings":
        """Reject unknown log level names."""
        level = self.LOG_LEVEL.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(
                f"❌ Unknown LOG_LEVEL '{self.LOG_LEVEL}'. "
                "Use one of DEBUG, INFO, WARNING, ERROR, CRITICAL."
            )
        self.LOG_LEVEL = level
        return self


# ==================== SINGLETON INSTANCE ====================
settings = Settings()


# ==================== HELPER FUNCTIONS ====================
def csv_float_format() -> str:
    """Format string for CSV floats: fixed significant digits, scientific."""
    return f".{settings.CSV_SIGNIFICANT_DIGITS - 1}e"


def drift_reference_is_relative(magnitude: float) -> bool:
    """Check whether a drift against this reference magnitude is reported relative."""
    return magnitude > settings.DRIFT_ABS_FLOOR
