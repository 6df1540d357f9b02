import os
import pathlib

import pytest


@pytest.fixture
def data_dir():
    env = os.environ.get("EACSI_DATA_DIR")
    return pathlib.Path(env) if env else pathlib.Path(__file__).resolve().parents[2] / "data"
