"""Shared resource caps.

The dense-volume site cap bounds every code path that materializes state on
a whole volume (the product-formula evaluator and the brute-force oracle).
The default of 15 sites keeps diagonal representations at 2**15 entries and
caps the oracle's volumes; the environment variable COMB_QMC_MAX_SITES
overrides it for machines that can afford more (or less).
"""

from __future__ import annotations

import os

DEFAULT_MAX_SITES = 15
ENV_MAX_SITES = "COMB_QMC_MAX_SITES"


def site_cap() -> int:
    """Current dense-volume site cap, honoring COMB_QMC_MAX_SITES."""
    raw = os.environ.get(ENV_MAX_SITES)
    if raw is None:
        return DEFAULT_MAX_SITES
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_MAX_SITES} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{ENV_MAX_SITES} must be positive")
    return value
