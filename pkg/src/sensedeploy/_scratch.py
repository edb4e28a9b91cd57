"""Scratch-directory selection for I/O heavy runs.

Deploy pipelines and the bench harness create hundreds of thousands of
small files; a RAM-backed tmpfs is an order of magnitude faster than
overlay/network filesystems for that pattern. Prefer /dev/shm when it is
usable, otherwise fall back to the system temp dir.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path


def scratch_base() -> str | None:
    """Directory to pass as ``dir=`` to tempfile helpers (None = default)."""
    override = os.environ.get("SENSEDEPLOY_SCRATCH")
    if override:
        return override
    shm = Path("/dev/shm")
    if shm.is_dir() and os.access(shm, os.W_OK):
        return str(shm)
    return None


def make_scratch_dir(prefix: str) -> Path:
    """Create a fresh scratch directory the caller owns (and must remove)."""
    return Path(tempfile.mkdtemp(prefix=prefix, dir=scratch_base()))
