"""Data directory resolution.

Default datasets ship inside the package under ``gpm/data``. Setting the
``GPM_DATA_DIR`` environment variable points every loader at an external
directory with the same layout (``devices/``, ``calib/``, ``tolerances.json``).
"""

from __future__ import annotations

import os
from pathlib import Path

ENV_VAR = "GPM_DATA_DIR"

PACKAGE_DATA = Path(__file__).resolve().parent / "data"


def data_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    return Path(override) if override else PACKAGE_DATA


def devices_path() -> Path:
    return data_dir() / "devices" / "paper_devices.json"


def calib_path() -> Path:
    return data_dir() / "calib" / "paper_tables.csv"


def tolerances_path() -> Path:
    return data_dir() / "tolerances.json"
