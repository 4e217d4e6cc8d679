"""Canonical error taxonomy shared by every module and the HTTP facade."""

from __future__ import annotations

from enum import Enum


class ErrorCode(str, Enum):
    INVALID_CLIENT = "INVALID_CLIENT"
    INVALID_GRANT = "INVALID_GRANT"
    ACCESS_DENIED = "ACCESS_DENIED"
    NOT_FOUND = "NOT_FOUND"
    CONFLICT = "CONFLICT"
    EXPIRED_TOKEN = "EXPIRED_TOKEN"
    INVALID_TOKEN = "INVALID_TOKEN"
    TENANT_INACTIVE = "TENANT_INACTIVE"
    VALIDATION_ERROR = "VALIDATION_ERROR"
    INTERNAL = "INTERNAL"


# Fixed mapping used by the REST facade; every non-2xx response carries one of these.
HTTP_STATUS: dict[ErrorCode, int] = {
    ErrorCode.INVALID_CLIENT: 401,
    ErrorCode.INVALID_GRANT: 400,
    ErrorCode.ACCESS_DENIED: 403,
    ErrorCode.TENANT_INACTIVE: 403,
    ErrorCode.NOT_FOUND: 404,
    ErrorCode.CONFLICT: 409,
    ErrorCode.VALIDATION_ERROR: 422,
    ErrorCode.EXPIRED_TOKEN: 401,
    ErrorCode.INVALID_TOKEN: 401,
    ErrorCode.INTERNAL: 500,
}


class ApiError(Exception):
    """Service-level failure carrying exactly one taxonomy code."""

    def __init__(self, code: ErrorCode, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"ApiError({self.code.value}, {self.message!r})"


def invalid_client(message: str = "client authentication failed") -> ApiError:
    return ApiError(ErrorCode.INVALID_CLIENT, message)


def access_denied(message: str = "access denied") -> ApiError:
    return ApiError(ErrorCode.ACCESS_DENIED, message)


def not_found(message: str = "not found") -> ApiError:
    return ApiError(ErrorCode.NOT_FOUND, message)


def conflict(message: str = "conflict") -> ApiError:
    return ApiError(ErrorCode.CONFLICT, message)


def expired_token(message: str = "token expired") -> ApiError:
    return ApiError(ErrorCode.EXPIRED_TOKEN, message)


def invalid_token(message: str = "invalid token") -> ApiError:
    return ApiError(ErrorCode.INVALID_TOKEN, message)


def tenant_inactive(message: str = "tenant is not active") -> ApiError:
    return ApiError(ErrorCode.TENANT_INACTIVE, message)


def validation_error(message: str) -> ApiError:
    return ApiError(ErrorCode.VALIDATION_ERROR, message)


def internal(message: str = "internal error") -> ApiError:
    return ApiError(ErrorCode.INTERNAL, message)
