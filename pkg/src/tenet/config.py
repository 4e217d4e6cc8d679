"""Service configuration: TOML file with TENET_* environment overrides."""

from __future__ import annotations

import base64
import os
import secrets
from dataclasses import dataclass

try:
    import tomllib  # type: ignore[import-not-found]
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from .errors import validation_error

ENV_PREFIX = "TENET_"

_KEYS = ("listen_port", "data_dir", "master_key", "signing_key", "operator_key", "mock_idp_personas")


@dataclass
class ServiceConfig:
    listen_port: int
    data_dir: str
    master_key: bytes  # 32 bytes, vault encryption
    signing_key: bytes  # 32 bytes, token HMAC
    operator_key: str
    mock_idp_personas: str | None = None

    @classmethod
    def load(cls, path: str | None = None, env: dict[str, str] | None = None) -> "ServiceConfig":
        env = os.environ if env is None else env
        raw: dict[str, object] = {}
        if path is not None:
            with open(path, "rb") as fh:
                raw.update(tomllib.load(fh))
        for key in _KEYS:
            env_value = env.get(ENV_PREFIX + key.upper())
            if env_value is not None:
                raw[key] = env_value
        missing = [k for k in ("data_dir", "master_key", "signing_key", "operator_key") if k not in raw]
        if missing:
            raise validation_error(f"config missing keys: {', '.join(missing)}")
        return cls(
            listen_port=int(raw.get("listen_port", 8600)),
            data_dir=str(raw["data_dir"]),
            master_key=_decode_key(str(raw["master_key"]), "master_key"),
            signing_key=_decode_key(str(raw["signing_key"]), "signing_key"),
            operator_key=str(raw["operator_key"]),
            mock_idp_personas=str(raw["mock_idp_personas"]) if raw.get("mock_idp_personas") else None,
        )


def _decode_key(encoded: str, name: str) -> bytes:
    try:
        key = base64.b64decode(encoded, validate=True)
    except Exception as exc:
        raise validation_error(f"{name} is not valid base64") from exc
    if len(key) != 32:
        raise validation_error(f"{name} must decode to 32 bytes, got {len(key)}")
    return key


def random_key_b64() -> str:
    """Fresh 32-byte key, base64-encoded (config bootstrap helper)."""
    return base64.b64encode(secrets.token_bytes(32)).decode("ascii")
