"""Effort and determinism knobs shared across the package.

Every potentially long-running routine takes an ``EffortConfig`` so that
callers (library users, the CLI, the test battery) can trade certainty for
time explicitly.  Operations never degrade silently: past a cap they raise
``EffortExceeded`` / ``StabilizationFailed``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class EffortConfig:
    # number field construction
    degree_cap: int = 16
    maximality_rounds: int = 64

    # class group / unit relation search
    factor_base_style: str = "grh"  # "grh" (12*log(|disc|)^2) or "minkowski"
    factor_base_cap: int = 2000     # refuse factor bases larger than this
    relation_budget: int = 400_000  # candidate elements tried before giving up
    relation_window: int = 48       # extra relations with no change => stable
    unit_saturation_primes: tuple[int, ...] = (2, 3, 5, 7)
    regulator_floor: float = 0.05   # smallest plausible regulator (rank >= 1)

    # ray class modulus towers
    stabilization_cap: int = 20
    rank_window: int = 2            # consecutive equal ranks => stable
    growth_window: int = 3          # consecutive identical growth patterns

    # truncated series algebra
    trunc_cap: int = 6
    enum_cap: int = 4096            # monomial count allowed in filtration_index

    # determinism / parallelism
    seed: int = 0
    threads: int = 1

    fixtures_dir: str | None = None

    def with_(self, **kw) -> "EffortConfig":
        return replace(self, **kw)


DEFAULT = EffortConfig()


def fixtures_search_path(config: EffortConfig | None = None) -> list[str]:
    """Directories searched for field fixtures, most specific first."""
    path = []
    if config is not None and config.fixtures_dir:
        path.append(config.fixtures_dir)
    env = os.environ.get("GALRES_FIXTURES")
    if env:
        path.append(env)
    path.append(os.path.join(os.path.dirname(__file__), "fixtures"))
    return path
