"""Spacing ratios and spacing statistics of non-Hermitian random matrices."""

import importlib.util
import os
import sys

try:
    from . import _core
except ImportError:
    # Build-tree use: NHRMT_EXTENSION_DIR points at the directory holding _core.
    _dir = os.environ.get("NHRMT_EXTENSION_DIR")
    if not _dir:
        raise
    _candidates = [f for f in os.listdir(_dir) if f.startswith("_core.") and f.endswith((".so", ".pyd"))]
    if not _candidates:
        raise ImportError(f"no _core extension in {_dir}")
    _spec = importlib.util.spec_from_file_location(f"{__name__}._core", os.path.join(_dir, sorted(_candidates)[0]))
    _core = importlib.util.module_from_spec(_spec)
    sys.modules[_spec.name] = _core
    _spec.loader.exec_module(_core)

from ._core import *  # noqa: E402,F401,F403
from ._core import (  # noqa: E402,F401
    ConfigError,
    CorruptArchiveError,
    DomainError,
    Error,
    IoError,
)
