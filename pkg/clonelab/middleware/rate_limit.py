"""Per-client rate limiting using slowapi."""

from typing import Callable

from fastapi import Request, status
from fastapi.responses import JSONResponse
from slowapi import Limiter
from slowapi.errors import RateLimitExceeded
from slowapi.util import get_remote_address

from clonelab.config import settings
from clonelab.logging import get_logger

logger = get_logger(__name__)

CLIENT_HEADER = "X-Client-ID"


def get_client_identifier(request: Request) -> str:
    """
    Get client identifier for rate limiting.

    Priority:
    1. X-Client-ID request header
    2. Remote IP address
    """
    client_id = request.headers.get(CLIENT_HEADER)
    if client_id:
        return f"client:{client_id}"
    return f"ip:{get_remote_address(request)}"


limiter = Limiter(key_func=get_client_identifier)


def verify_limit() -> str:
    """Limit string for verifier runs, read from settings on every request."""
    return f"{settings.rate_limit_verify_per_min}/minute"


def rate_limit(limit: Callable[[], str]) -> Callable:
    """
    Decorator for per-route rate limiting.

    Args:
        limit: Callable returning a rate limit string (e.g. "10/minute")
    """
    return limiter.limit(limit)


async def rate_limit_exceeded_handler(request: Request, exc: RateLimitExceeded) -> JSONResponse:
    logger.warning(
        "Rate limit exceeded",
        client_id=get_client_identifier(request),
        method=request.method,
        url=str(request.url),
        limit=str(exc.detail),
    )
    return JSONResponse(
        status_code=status.HTTP_429_TOO_MANY_REQUESTS,
        content={
            "code": "429",
            "status": "rate_limit_exceeded",
            "error_message": "Rate limit exceeded. Please try again later.",
        },
    )
