import os
from dataclasses import dataclass

APP_VERSION = "0.1.0"


@dataclass
class Config:
    """
    Configuration class for application settings.
    """

    # Report archive settings
    QLAB_REPORT_DB_URL: str = os.getenv("QLAB_REPORT_DB_URL", "")

    # Default tolerances, overridable per run with --tol-* flags
    QLAB_TOL_STATIONARITY: float = float(os.getenv("QLAB_TOL_STATIONARITY", "1e-10"))
    QLAB_TOL_RESIDUAL: float = float(os.getenv("QLAB_TOL_RESIDUAL", "1e-3"))
    QLAB_TOL_COMMUTATOR: float = float(os.getenv("QLAB_TOL_COMMUTATOR", "1e-10"))
    QLAB_TOL_BROKEN: float = float(os.getenv("QLAB_TOL_BROKEN", "1e-6"))
    QLAB_TOL_ROOT: float = float(os.getenv("QLAB_TOL_ROOT", "1e-12"))
    QLAB_TOL_PRICE: float = float(os.getenv("QLAB_TOL_PRICE", "1e-2"))
    QLAB_TOL_DEVIATION: float = float(os.getenv("QLAB_TOL_DEVIATION", "5e-3"))
    QLAB_TOL_MANIFOLD: float = float(os.getenv("QLAB_TOL_MANIFOLD", "1e-12"))

    # Application settings
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    APP_VERSION: str = APP_VERSION


config = Config()
