"""Thin HTTP wrappers over the operation, relation, condition and homomorphism modules."""

from typing import Any, List, Optional, Union

from fastapi import APIRouter, Request
from fastapi.responses import JSONResponse
from pydantic import Field

from clonelab.algebra.conditions import builtin
from clonelab.algebra.ops import Symmetry, compose, minor
from clonelab.algebra.ppcon import find_homomorphism
from clonelab.algebra.rel import blocks, essential_tuples, is_n_decomposable
from clonelab.logging import get_logger
from clonelab.schemas import (
    BlockModel,
    ConditionModel,
    OperationModel,
    RelationModel,
    StructureModel,
    VarMapModel,
    WireModel,
    homomorphism_map,
)
from clonelab.verifiers import check_condition

logger = get_logger(__name__)

router = APIRouter()


class MinorRequest(WireModel):
    operation: OperationModel
    map: VarMapModel


class ComposeRequest(WireModel):
    operation: OperationModel
    args: List[OperationModel]


class CheckRequest(WireModel):
    """A builtin condition name (with its parameters) or a full condition body."""

    condition: Union[str, ConditionModel]
    p: Optional[int] = None
    n: Optional[int] = None
    expanded: bool = False
    operations: Optional[List[OperationModel]] = None
    structure: Optional[StructureModel] = None
    symmetry: Symmetry = Symmetry.NONE
    budget: Optional[int] = Field(default=None, ge=1)


class DecomposableRequest(WireModel):
    relation: RelationModel
    n: int = Field(ge=1)


class HomRequest(WireModel):
    source: StructureModel
    target: StructureModel
    budget: Optional[int] = Field(default=None, ge=1)


def _success(data: Any) -> JSONResponse:
    return JSONResponse(status_code=200, content={"code": "200", "status": "success", "data": data})


@router.post("/ops/minor")
def post_minor(request: Request, body: MinorRequest) -> JSONResponse:
    """Minor of an operation under a variable map."""
    result = minor(body.operation.to_operation(), body.map.to_varmap())
    return _success(OperationModel.from_operation(result).dump())


@router.post("/ops/compose")
def post_compose(request: Request, body: ComposeRequest) -> JSONResponse:
    """Composition f(g_1, ..., g_n)."""
    result = compose(body.operation.to_operation(), [g.to_operation() for g in body.args])
    return _success(OperationModel.from_operation(result).dump())


@router.post("/check")
def post_check(request: Request, body: CheckRequest) -> JSONResponse:
    """
    Decide a minor condition over explicit operations or a structure's polymorphisms.

    Returns:
        JSON response with the verdict; a fail carries a counterexample
    """
    if isinstance(body.condition, str):
        condition = builtin(body.condition, p=body.p, n=body.n, expanded=body.expanded)
    else:
        condition = body.condition.to_condition()
    logger.info("Condition check requested", condition=condition.name)
    result = check_condition(
        condition,
        operations=[op.to_operation() for op in body.operations] if body.operations is not None else None,
        structure=body.structure.to_structure() if body.structure is not None else None,
        symmetry=body.symmetry,
        budget=body.budget,
    )
    return _success(result.dump())


@router.post("/relations/essential")
def post_essential(request: Request, body: RelationModel) -> JSONResponse:
    """Ess(R) and whether R is essential."""
    ess = sorted(essential_tuples(body.to_relation()))
    return _success({"essential": bool(ess), "tuples": [list(t) for t in ess]})


@router.post("/relations/blocks")
def post_blocks(request: Request, body: RelationModel) -> JSONResponse:
    """Blocks of R with their product factors and group structures."""
    relation = body.to_relation()
    return _success({"blocks": [BlockModel.from_block(relation, b).dump() for b in blocks(relation)]})


@router.post("/relations/decomposable")
def post_decomposable(request: Request, body: DecomposableRequest) -> JSONResponse:
    """Whether R is n-decomposable."""
    return _success({"n": body.n, "decomposable": is_n_decomposable(body.relation.to_relation(), body.n)})


@router.post("/hom")
def post_hom(request: Request, body: HomRequest) -> JSONResponse:
    """The first homomorphism between two structures, or null."""
    hom = find_homomorphism(body.source.to_structure(), body.target.to_structure(), budget=body.budget)
    return _success({"homomorphism": homomorphism_map(hom)})
