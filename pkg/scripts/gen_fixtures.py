#!/usr/bin/env python3
"""
Regenerate the shipped JSON fixtures from the in-code catalog.

Outputs:
- clonelab/data/fixtures/<name>.json for every named structure
- clonelab/data/operations/<name>.json for the named operations the verifiers load
"""

from pathlib import Path
from typing import List

from clonelab.algebra import catalog
from clonelab.fixtures import OPERATIONS_DIR, write_structure
from clonelab.schemas import OperationModel

SHIPPED_OPERATIONS = ("and2", "xor3", "min3", "malcev3", "dualdisc3", "symmaj3")


def write_structures(out_dir: Path) -> List[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in sorted(catalog.NAMED_STRUCTURES.items()):
        path = out_dir / f"{name}.json"
        write_structure(build(), path)
        written.append(path)
    return written


def write_operations(out_dir: Path) -> List[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SHIPPED_OPERATIONS:
        path = out_dir / f"{name}.json"
        model = OperationModel.from_operation(catalog.named_operation(name))
        path.write_text(model.to_json() + "\n", encoding="utf-8")
        written.append(path)
    return written


def main() -> None:
    root = Path(__file__).resolve().parent.parent
    written = write_structures(root / "clonelab" / "data" / "fixtures")
    written += write_operations(OPERATIONS_DIR)

    print("Wrote:")
    for path in written:
        print(" -", path)


if __name__ == "__main__":
    main()
