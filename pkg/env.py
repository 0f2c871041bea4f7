try:
    import dotenv

    dotenv.load_dotenv()
except ImportError:
    pass

import os

DEBUG: bool = os.getenv("DEBUG", "False").lower() == "true"
"""Debug mode"""

LOG_LEVEL: str = "DEBUG" if DEBUG else os.getenv("LOG_LEVEL", "INFO").upper()
"""Log level"""

OUTPUT_PATH: str = os.getenv("OUTPUT_PATH", "output")
"""Default directory for CSV and SVG output"""

SWEEP_THREAD: int = int(os.getenv("SWEEP_THREAD", "4"))
"""Sweep worker threads"""

DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "20240601"))
"""Simulation seed used when the scenario sets none"""

DEFAULT_GRID: int = int(os.getenv("DEFAULT_GRID", "1001"))
"""Subsidy-factor grid size for the continuous game"""
