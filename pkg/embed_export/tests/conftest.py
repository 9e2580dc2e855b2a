import pytest

from embed_export.testing import build_tiny_model


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory):
    return build_tiny_model(tmp_path_factory.mktemp("ckpt") / "tiny")


@pytest.fixture(scope="session")
def narrow_model(tmp_path_factory):
    """Position budget of 12 forces sliding windows on ordinary sentences."""
    return build_tiny_model(tmp_path_factory.mktemp("ckpt") / "narrow", max_positions=12)
