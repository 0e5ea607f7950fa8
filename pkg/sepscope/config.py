import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# --- Numerical tolerances ---
TOL_HERM = float(os.getenv("SEPSCOPE_TOL_HERM", "1e-9"))
TOL_TRACE = float(os.getenv("SEPSCOPE_TOL_TRACE", "1e-9"))
TOL_NORM = float(os.getenv("SEPSCOPE_TOL_NORM", "1e-9"))
TOL_PSD_PER_DIM = float(os.getenv("SEPSCOPE_TOL_PSD_PER_DIM", "1e-10"))
TOL_EIG = float(os.getenv("SEPSCOPE_TOL_EIG", "1e-10"))
TOL_GAP = float(os.getenv("SEPSCOPE_TOL_GAP", "1e-6"))

# Geometric-mean factors below this count as exact zeros.
ZERO = float(os.getenv("SEPSCOPE_ZERO", "1e-14"))

# --- Execution ---
THREADS = int(os.getenv("SEPSCOPE_THREADS", str(os.cpu_count() or 1)))
SEED = int(os.getenv("SEPSCOPE_SEED", "7"))
FAST_PATH = os.getenv("SEPSCOPE_FAST_PATH", "true").lower() == "true"
REPRODUCIBLE = os.getenv("SEPSCOPE_REPRODUCIBLE", "true").lower() == "true"

# --- Observability ---
ENABLE_TRACING = os.getenv("ENABLE_TRACING", "false").lower() == "true"
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()


def tol_psd(dim: int) -> float:
    """PSD tolerance scales with the matrix side."""
    return TOL_PSD_PER_DIM * dim
