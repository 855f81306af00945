"""Public status routes."""

from fastapi import APIRouter, Request
from fastapi.responses import JSONResponse

from clonelab import __version__
from clonelab.logging import get_logger
from clonelab.verifiers import REGISTRY

logger = get_logger(__name__)

router = APIRouter()


@router.get("/healthz")
async def health_check(request: Request) -> JSONResponse:
    """
    Health check endpoint.

    Returns:
        JSON response with health status
    """
    logger.info("Health check requested", method=request.method, url=str(request.url))

    return JSONResponse(
        status_code=200,
        content={
            "status": "healthy",
            "service": "clonelab",
            "version": __version__,
        },
    )


@router.get("/")
async def root() -> JSONResponse:
    """Service status and the names of the runnable verifiers."""
    return JSONResponse(
        status_code=200,
        content={
            "service": "clonelab",
            "version": __version__,
            "status": "running",
            "verifiers": sorted(REGISTRY),
        },
    )
