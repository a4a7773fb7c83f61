"""
config.py - Load settings from environment variables

WHAT THIS FILE DOES:
Every size cap and default used by the toolkit lives here, loaded from a
.env file (if present) and the process environment. Nothing here is secret;
the caps exist so that a typo like `--n 12` fails fast with a clear message
instead of exhausting memory.

HOW IT WORKS:
1. python-dotenv reads the .env file and puts values into environment variables
2. os.getenv() reads those environment variables
3. get_int_env() converts them, with a helpful error for malformed values

LEARNING MOMENT: Caps Instead of Crashes
Brute-force oracles (exact channel splitting, exhaustive partial distances)
grow exponentially. A configurable cap turns "the machine froze" into a
CapacityError that the CLI reports with exit code 3.
"""

import os
from dotenv import load_dotenv

# Load .env file into environment variables
load_dotenv()


def get_int_env(key: str, default: int) -> int:
    """
    Get an integer environment variable, falling back to a default.
    Raises an error with a helpful message if the value is not an integer.
    """
    value = os.getenv(key)
    if value is None or value.strip() == "":
        return default
    try:
        return int(float(value))
    except ValueError:
        raise ValueError(
            f"Environment variable {key} must be an integer, got {value!r}\n"
            f"Please fix it in your .env file (see .env.example)."
        )


# Logging verbosity for the command-line entry point
LOG_LEVEL = os.getenv("POLAR_LOG_LEVEL", "INFO").upper()

# Largest block length build_layout will materialize (bits)
MAX_BLOCK_BITS = get_int_env("POLAR_MAX_BLOCK_BITS", 2 ** 16)

# Largest N for which the N x N equivalent generator matrix is built
MAX_GENERATOR_BITS = get_int_env("POLAR_MAX_GENERATOR_BITS", 2 ** 12)

# Exact channel splitting enumerates |Y|^ell * 2^L joint outcomes
SPLIT_ENUMERATION_CAP = get_int_env("POLAR_SPLIT_ENUMERATION_CAP", 10 ** 8)

# Exhaustive partial distances: kernel size and codeword-pair budget
PARTIAL_DISTANCE_MAX_BITS = get_int_env("POLAR_PARTIAL_DISTANCE_MAX_BITS", 16)
PARTIAL_DISTANCE_WORK_CAP = get_int_env("POLAR_PARTIAL_DISTANCE_WORK_CAP", 2 ** 26)

# Randomness and parallelism defaults
DEFAULT_SEED = get_int_env("POLAR_DEFAULT_SEED", 2024)
DEFAULT_THREADS = get_int_env("POLAR_THREADS", 1)

# Monte-Carlo trials per RNG stream (chunk b always uses stream index b)
SIMULATION_CHUNK = get_int_env("POLAR_SIM_CHUNK", 256)

# Row sums of a channel table must be 1 within this tolerance
PROBABILITY_TOLERANCE = 1e-11
