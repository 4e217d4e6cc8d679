from __future__ import annotations

import warnings

import pytest

warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")

from fastapi.testclient import TestClient  # noqa: E402

from tenet.api import create_app  # noqa: E402
from tenet.clock import FakeClock  # noqa: E402
from tenet.config import ServiceConfig  # noqa: E402
from tenet.service import TenetService  # noqa: E402

from support import MASTER_KEY, OPERATOR_KEY, SIGNING_KEY  # noqa: E402


def build_service(tmp_path, clock=None, **overrides) -> TenetService:
    config = ServiceConfig(
        listen_port=0,
        data_dir=str(tmp_path / "data"),
        master_key=overrides.get("master_key", MASTER_KEY),
        signing_key=overrides.get("signing_key", SIGNING_KEY),
        operator_key=overrides.get("operator_key", OPERATOR_KEY),
        mock_idp_personas=overrides.get("mock_idp_personas"),
    )
    return TenetService(config, clock=clock, fsync=False)


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


@pytest.fixture
def service(tmp_path, clock):
    svc = build_service(tmp_path, clock=clock)
    yield svc
    svc.close()


@pytest.fixture
def client(service):
    with TestClient(create_app(service), base_url="http://testserver") as tc:
        yield tc
