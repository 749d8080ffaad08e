import os

import pytest

from tracesum.heckecoef import HeckeSystem


@pytest.fixture(scope="session", autouse=True)
def cache_dir(tmp_path_factory):
    """Isolate the binary coefficient cache unless the caller points at one."""
    if "TRACESUM_CACHE_DIR" not in os.environ:
        os.environ["TRACESUM_CACHE_DIR"] = str(tmp_path_factory.mktemp("taucache"))
    return os.environ["TRACESUM_CACHE_DIR"]


@pytest.fixture(scope="session")
def hecke4k():
    return HeckeSystem(4000, use_cache=False)
