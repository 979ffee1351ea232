"""Shared runtime limits."""

import os

DEFAULT_MEM_LIMIT_MIB = int(os.environ.get("CAYLEYFLOWS_MEM_LIMIT", "2048"))
DEFAULT_STEINER_BOUND = 10
CACHE_VERSION = 1


def cache_dir(override: str | None = None) -> str | None:
    return override or os.environ.get("CAYLEYFLOWS_CACHE")


class BudgetExceeded(RuntimeError):
    """A memory guard or search budget was tripped."""
