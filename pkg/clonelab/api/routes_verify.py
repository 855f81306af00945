"""Named verifier routes."""

from typing import Any, Dict, Optional

from fastapi import APIRouter, Body, Query, Request
from fastapi.responses import JSONResponse

from clonelab.logging import get_logger
from clonelab.middleware.rate_limit import rate_limit, verify_limit
from clonelab.verifiers import REGISTRY, run_verifier

logger = get_logger(__name__)

router = APIRouter()


@router.get("/verifiers")
async def list_verifiers(request: Request) -> JSONResponse:
    """
    List the registered verifiers with their parameter defaults.

    Returns:
        JSON response with one entry per verifier
    """
    entries = [
        {
            "name": entry.name,
            "summary": entry.summary,
            "defaults": {k: list(v) if isinstance(v, tuple) else v for k, v in entry.defaults.items()},
        }
        for _, entry in sorted(REGISTRY.items())
    ]
    return JSONResponse(
        status_code=200,
        content={"code": "200", "status": "success", "data": {"verifiers": entries, "total": len(entries)}},
    )


@router.post("/verify/{name}")
@rate_limit(verify_limit)
def verify(
    request: Request,
    name: str,
    params: Optional[Dict[str, Any]] = Body(default=None),
    budget: Optional[int] = Query(default=None, ge=1),
    seed: Optional[int] = Query(default=None),
) -> JSONResponse:
    """
    Run a named verifier.

    Args:
        request: FastAPI request object
        name: Verifier name
        params: Verifier parameters, e.g. ``{"p": 3}``
        budget: Search budget
        seed: Scan-order seed

    Returns:
        JSON response with the verifier result; the HTTP status is 200 for every verdict
    """
    if name not in REGISTRY:
        logger.info("Unknown verifier requested", verifier=name)
        return JSONResponse(
            status_code=404,
            content={"code": "404", "status": "not_found", "error_message": f"Unknown verifier {name!r}"},
        )

    result = run_verifier(name, params or {}, budget=budget, seed=seed)
    return JSONResponse(
        status_code=200,
        content={"code": "200", "status": "success", "data": result.dump()},
    )
