"""Loading shipped and user-supplied structures and operations."""

import json
from pathlib import Path
from typing import Any, List, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from clonelab.algebra import catalog
from clonelab.algebra.ops import Operation
from clonelab.algebra.rel import Structure
from clonelab.config import settings
from clonelab.errors import ClonelabError
from clonelab.logging import get_logger
from clonelab.schemas import OperationModel, StructureModel

logger = get_logger(__name__)

OPERATIONS_DIR = Path(__file__).parent / "data" / "operations"

PathLike = Union[str, Path]
M = TypeVar("M", bound=BaseModel)


class FixtureError(ClonelabError):
    """Raised when a fixture is missing or does not parse."""
    pass


def fixtures_dir(override: Optional[PathLike] = None) -> Path:
    return Path(override) if override is not None else Path(settings.fixtures_dir)


def available_fixtures(directory: Optional[PathLike] = None) -> List[str]:
    return sorted(p.stem for p in fixtures_dir(directory).glob("*.json"))


def read_json(path: PathLike) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise FixtureError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise FixtureError(f"{path} is not valid JSON: {e}") from e


def parse_model(model: Type[M], data: Any, source: PathLike) -> M:
    """
    Validate decoded JSON against a wire model.

    Raises:
        FixtureError: Naming the source and the first schema violation
    """
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "document"
        raise FixtureError(f"{source} is not a valid {model.__name__}: {location}: {first['msg']}") from e


def _resolve(name: str, directory: Path) -> Optional[Path]:
    candidate = Path(name)
    if candidate.suffix == ".json" and candidate.is_file():
        return candidate
    named = directory / f"{candidate.stem}.json"
    return named if named.is_file() else None


def load_structure(name: str, directory: Optional[PathLike] = None) -> Structure:
    """
    Load a structure by fixture name (``b2``, ``k21``, ...) or by JSON file path.

    Raises:
        FixtureError: If the fixture does not exist or is malformed
    """
    path = _resolve(name, fixtures_dir(directory))
    if path is None:
        raise FixtureError(f"Unknown fixture {name!r}; available: {', '.join(available_fixtures(directory))}")
    structure = parse_model(StructureModel, read_json(path), path).to_structure()
    logger.debug("Fixture loaded", fixture=str(path), domain_size=structure.domain_size)
    return structure


def load_operation(name: str) -> Operation:
    """
    Load an operation from a JSON file, the shipped operations or the catalog names.

    Raises:
        FixtureError: If nothing matches or the file is malformed
    """
    path = _resolve(name, OPERATIONS_DIR)
    if path is None:
        stem = Path(name).stem
        if stem in catalog.NAMED_OPERATIONS:
            return catalog.named_operation(stem)
        raise FixtureError(f"Unknown operation {name!r}")
    return parse_model(OperationModel, read_json(path), path).to_operation()


def write_structure(structure: Structure, path: PathLike) -> None:
    Path(path).write_text(StructureModel.from_structure(structure).to_json() + "\n", encoding="utf-8")
