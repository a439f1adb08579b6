"""Numeric defaults, in one place.

Every tolerance that scales with the data is stored as a factor of the
relevant diameter. Experiments cite this table; the CLI reads its defaults
from here and nowhere else.

==========================  =========  ==========================================
key                         value      meaning
==========================  =========  ==========================================
``tri_rel_tol``             1e-9       triangle slack, times diameter
``zero_rel_tol``            1e-9       zero-collapse threshold, times diameter
``iso_exhaustive_cap``      10         isometry search is unbounded up to this size
``iso_node_budget``         2_000_000  search nodes allowed above the cap
``gh_exact_cap``            16         max ``|X|*|Y|`` for exhaustive GH
``net_exhaustive_k``        8          net matching is exhaustive up to this size
``heuristic_budget``        24         restarts for correspondence search
``vertex_cap``              600        convergence lab samples above this
``seed``                    0          default RNG seed
==========================  =========  ==========================================
"""

from __future__ import annotations

import os

DEFAULTS: dict[str, float | int] = {
    "tri_rel_tol": 1e-9,
    "zero_rel_tol": 1e-9,
    "iso_exhaustive_cap": 10,
    "iso_node_budget": 2_000_000,
    "gh_exact_cap": 16,
    "net_exhaustive_k": 8,
    "heuristic_budget": 24,
    "vertex_cap": 600,
    "seed": 0,
}

THREADS_ENV = "HLSKIT_THREADS"


def threads() -> int:
    """Worker count for internally parallel searches (``HLSKIT_THREADS``, default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
