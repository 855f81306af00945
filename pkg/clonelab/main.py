"""FastAPI application exposing the workbench over HTTP."""

from contextlib import asynccontextmanager
from typing import AsyncIterator, Awaitable, Callable

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from slowapi.errors import RateLimitExceeded

from clonelab import __version__
from clonelab.api import routes_algebra, routes_public, routes_verify
from clonelab.config import settings
from clonelab.errors import ClonelabError
from clonelab.logging import get_logger, setup_logging
from clonelab.middleware.correlation import CorrelationIDMiddleware
from clonelab.middleware.rate_limit import limiter, rate_limit_exceeded_handler

setup_logging(settings.log_level, json_output=settings.log_json)
logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncIterator[None]:
    """Application lifespan manager."""
    logger.info("Starting clonelab service", version=__version__, threads=settings.pool_size())
    yield
    logger.info("Shutting down clonelab service")


app = FastAPI(
    title="clonelab",
    description="Operations, relations, minor conditions and pp-constructions over small finite domains",
    version=__version__,
    lifespan=lifespan,
    docs_url="/docs" if settings.log_level == "DEBUG" else None,
    redoc_url="/redoc" if settings.log_level == "DEBUG" else None,
)

app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, rate_limit_exceeded_handler)  # type: ignore[arg-type]


@app.middleware("http")
async def add_security_headers(request: Request, call_next: Callable[[Request], Awaitable[Response]]) -> Response:
    """Add security headers to all responses."""
    response = await call_next(request)

    response.headers["X-Content-Type-Options"] = "nosniff"
    response.headers["X-Frame-Options"] = "DENY"
    response.headers["Referrer-Policy"] = "strict-origin-when-cross-origin"

    return response


app.add_middleware(CorrelationIDMiddleware)


@app.exception_handler(ClonelabError)
async def workbench_error_handler(request: Request, exc: ClonelabError) -> JSONResponse:
    """Inputs that parse but violate a precondition: wrong arity, unknown name, mismatched domain."""
    logger.info(
        "Request rejected",
        error_type=type(exc).__name__,
        error=str(exc),
        method=request.method,
        url=str(request.url),
    )
    return JSONResponse(
        status_code=400,
        content={
            "code": "400",
            "status": "bad_request",
            "error_message": str(exc),
        },
    )


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    """Global exception handler for unhandled errors."""
    correlation_id = getattr(request.state, "correlation_id", "unknown")

    logger.error(
        "Unhandled exception",
        correlation_id=correlation_id,
        error=str(exc),
        method=request.method,
        url=str(request.url),
    )

    return JSONResponse(
        status_code=500,
        content={
            "code": "500",
            "status": "internal_error",
            "error_message": "Internal server error",
        },
    )


app.include_router(routes_public.router, tags=["public"])
app.include_router(routes_verify.router, prefix="/api/v1", tags=["verifiers"])
app.include_router(routes_algebra.router, prefix="/api/v1", tags=["algebra"])


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "clonelab.main:app",
        host=settings.host,
        port=settings.port,
        log_level=settings.log_level.lower(),
    )
