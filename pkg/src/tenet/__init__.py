"""Multi-tenant security control plane for science-gateway platforms.

Tenancy with operator approval and hierarchy, OAuth2-style token issuance
and validation, federated login brokering with institution routing, an
encrypted credential vault with entity-level sharing, and confined agent
credential retrieval — all over one durable record store and one REST API.
"""

from .api import create_app
from .config import ServiceConfig
from .errors import ApiError, ErrorCode
from .ids import EntityKind, EntityRef, generate_id, parse_id
from .service import TenetService

__version__ = "0.1.0"

__all__ = [
    "ApiError",
    "ErrorCode",
    "EntityKind",
    "EntityRef",
    "ServiceConfig",
    "TenetService",
    "create_app",
    "generate_id",
    "parse_id",
    "__version__",
]
