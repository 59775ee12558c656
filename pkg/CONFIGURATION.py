# CONFIGURATION.py
import os
from dotenv import load_dotenv

# Load environment variables from .env file (process env wins)
load_dotenv(override=False)

# --- Quadrature Configuration ---
GAUSS_ORDER = 8  # Tensor Gauss-Legendre order per cell
ESTIMATE_ORDER = 4  # Lower-order companion rule used for the error estimate
DEFAULT_TOL = 1e-10
TOL_ABS_FLOOR = 1e-13  # Stops refinement when the true value is 0
MAX_DEPTH = 24
MAX_CELLS = 400_000

# --- Kernel Configuration ---
TAIL_EPSILON = 1e-10  # Tail mass allowed outside an effective support
MAX_EFFECTIVE_RADIUS = 1e3
RING_LATTICE = 16  # Cells per side seeding each ring of the tail-radius search
RING_TOL = 1e-3  # Ring masses are only compared against the tail epsilon

# --- Class A Validation ---
TOL_COND = 1e-6
TOL_REL_MASS = 1e-6
DIVERGENCE_RATIO = 1e3
TREND_WINDOW = 4
GRID_POINTS = 12
MONOTONE_SLACK = 1e-12
GROWTH_SLOPE_TOL = 0.05
NEGLIGIBLE_FRACTION = 1e-3  # Values below tol_cond * this count as exact zeros in trend tests
DEFAULT_GAMMAS = (0.25, 0.5)

# --- Lebesgue Points ---
TOL_LEB = 1e-3
DEFAULT_DELTA0 = 0.5
MU_PROBES = 32
H_GRID_POINTS = 18
H_GRID_RATIO = 0.5
LEBESGUE_QUAD_TOL = 1e-8  # Relative quadrature tol for Lebesgue quotients

# --- Rate / Convergence ---
RATIO_TOL = 0.1
TOL_DELTA = 1e-3
TOL_CONVERGE = 1e-3
NOISE_FLOOR = 1e-13
MIN_LITTLE_O_POINTS = 6
MIN_FIT_POINTS = 4

# --- Operator ---
NORM_GRID = 64
NORM_INNER_TOL = 1e-8
OPERATOR_TOL = 1e-10

# --- Reports ---
CSV_DIGITS = 17

# --- Runtime (Loaded from Environment Variables) ---
_threads_raw = os.getenv('SINGCONV_THREADS', '0').strip() or '0'
SINGCONV_LOG_FILE = os.getenv('SINGCONV_LOG_FILE', 'singconv.log')

# --- Input Validation ---
try:
    SINGCONV_THREADS = int(_threads_raw)
except ValueError:
    raise ValueError(
        f"SINGCONV_THREADS must be an integer (0 = auto), got '{_threads_raw}'. "
        "Fix it in your .env file or environment."
    )
if SINGCONV_THREADS < 0:
    raise ValueError(
        f"SINGCONV_THREADS must be >= 0 (0 = auto), got {SINGCONV_THREADS}."
    )
if not SINGCONV_LOG_FILE:
    raise ValueError("SINGCONV_LOG_FILE must not be empty.")


def worker_count(override: int | None = None) -> int:
    """Resolved worker cap: explicit override, then SINGCONV_THREADS, then CPU count."""
    threads = SINGCONV_THREADS if override is None else override
    if threads < 0:
        raise ValueError(f"Thread count must be >= 0, got {threads}.")
    return threads or (os.cpu_count() or 1)
