import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir))

from phasetrack import cli


@pytest.fixture(scope="session")
def desk_tsv_dir(tmp_path_factory):
    """Small-size figures-data run shared by the rendering tests."""
    out = tmp_path_factory.mktemp("tsv")
    rc = cli.cli_main([
        "figures-data", "--scale", "desk", "--out", str(out),
        "--frames", "2", "--frame-len", "256", "--threads", "2",
    ])
    assert rc == cli.EXIT_OK
    return str(out)
