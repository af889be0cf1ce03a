import os
from pydantic import BaseModel
from dotenv import load_dotenv

load_dotenv()


class Settings(BaseModel):
    """Process-wide defaults, overridable from the environment or a .env file."""

    OUTPUT_DIRECTORY: str = os.getenv("OUTPUT_DIRECTORY", "output")
    LOG_DIRECTORY: str = os.getenv("LOG_DIRECTORY", "logs")
    LOG_CONFIG_FILE: str = os.getenv("LOG_CONFIG_FILE", "logging.dev.ini")

    # Detuning sweeps
    SWEEP_POINTS: int = int(os.getenv("SWEEP_POINTS", "2001"))
    SWEEP_HALF_WIDTH: float = float(os.getenv("SWEEP_HALF_WIDTH", "0.1"))
    MARGINAL_MARGIN: float = float(os.getenv("MARGINAL_MARGIN", "1e-9"))
    BISECTION_RTOL: float = float(os.getenv("BISECTION_RTOL", "1e-3"))

    # Spectrum grids
    DENSE_GRID_POINTS: int = int(os.getenv("DENSE_GRID_POINTS", "501"))
    DENSE_GRID_HALF_WIDTH: float = float(os.getenv("DENSE_GRID_HALF_WIDTH", "50"))
    BACKGROUND_GRID_POINTS: int = int(os.getenv("BACKGROUND_GRID_POINTS", "201"))

    CSV_SIGNIFICANT_DIGITS: int = int(os.getenv("CSV_SIGNIFICANT_DIGITS", "12"))


settings = Settings()
