"""
Toolkit configuration: .env locally, plain environment variables otherwise.

Every setting has a default; python-dotenv only overrides when a .env file
sits at the project root.
"""

import os
from pathlib import Path


def _load_dotenv_local() -> None:
    """Load .env from the project root when present."""
    try:
        from dotenv import load_dotenv
        root = Path(__file__).resolve().parent.parent
        env_file = root / ".env"
        if env_file.exists():
            load_dotenv(env_file, override=True)
    except ImportError:
        pass


def _get_int(key: str, default: int) -> int:
    raw = os.getenv(key)
    if raw is None or not raw.strip():
        return default
    return int(raw)


_load_dotenv_local()

# ── Working precision ───────────────────────────────────────────────────────
DEFAULT_PREC: int = _get_int("LAURENT_DEFAULT_PREC", 16)

# ── Search and enumeration caps ─────────────────────────────────────────────
SEARCH_DEPTH: int = _get_int("LAURENT_SEARCH_DEPTH", 6)
BRUTE_FORCE_CAP: int = _get_int("LAURENT_BRUTE_FORCE_CAP", 2**16)
ENUMERATION_CAP: int = _get_int("LAURENT_ENUMERATION_CAP", 2**16)

# ── Sampling ────────────────────────────────────────────────────────────────
SAMPLE_RANGE: int = _get_int("LAURENT_SAMPLE_RANGE", 3)  # rational mode only

# ── Logging ─────────────────────────────────────────────────────────────────
LOG_LEVEL: str = os.getenv("LAURENT_LOG_LEVEL", "WARNING").upper()
