"""Tests for the verifier and algebra HTTP routes."""

import uuid

import pytest
from fastapi.testclient import TestClient

from clonelab.main import app

client = TestClient(app)

AND2 = {"domain": 2, "arity": 2, "table": [0, 0, 0, 1]}
XOR2 = {"domain": 2, "arity": 2, "table": [0, 1, 1, 0]}
BMAJ = {"domain": 2, "arity": 3, "table": [0, 0, 0, 1, 0, 1, 1, 1]}
C2 = {"domain": 2, "relations": {"R": {"domain": 2, "arity": 2, "tuples": [[0, 1], [1, 0]]}}}
C3 = {"domain": 3, "relations": {"R": {"domain": 3, "arity": 2, "tuples": [[0, 1], [1, 2], [2, 0]]}}}
PARITY = {
    "domain": 2,
    "arity": 3,
    "tuples": [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]],
}


@pytest.fixture
def client_headers():
    """A fresh rate-limit identity per test."""
    return {"X-Client-ID": f"api-test-{uuid.uuid4()}"}


def test_list_verifiers():
    """The listing includes defaults with tuples as lists."""
    response = client.get("/api/v1/verifiers")
    assert response.status_code == 200

    data = response.json()
    assert data["status"] == "success"
    assert data["data"]["total"] == len(data["data"]["verifiers"])
    by_name = {v["name"]: v for v in data["data"]["verifiers"]}
    assert by_name["remark-cycles"]["defaults"] == {"p": 3}
    assert by_name["majority-search"]["defaults"]["generators"] == ["malcev3", "min3", "symmaj3"]


def test_run_verifier(client_headers):
    """Verifier results come back in the success envelope."""
    response = client.post("/api/v1/verify/remark-cycles", json={"p": 2}, headers=client_headers)
    assert response.status_code == 200

    data = response.json()["data"]
    assert data["name"] == "remark-cycles"
    assert data["verdict"] == "pass"


def test_run_verifier_with_budget(client_headers):
    """An exhausted budget is an unknown verdict, still HTTP 200."""
    response = client.post(
        "/api/v1/verify/remark-cycles",
        params={"budget": 10},
        json={"p": 3},
        headers=client_headers,
    )
    assert response.status_code == 200
    assert response.json()["data"]["verdict"] == "unknown"


def test_unknown_verifier(client_headers):
    """Unknown verifiers are 404."""
    response = client.post("/api/v1/verify/no-such-check", headers=client_headers)
    assert response.status_code == 404

    data = response.json()
    assert data["code"] == "404"
    assert data["status"] == "not_found"


def test_bad_verifier_parameter(client_headers):
    """Undeclared parameters are rejected with 400."""
    response = client.post("/api/v1/verify/remark-cycles", json={"q": 1}, headers=client_headers)
    assert response.status_code == 400
    assert response.json()["status"] == "bad_request"


def test_minor():
    """and(x, x) = x."""
    body = {"operation": AND2, "map": {"from": 2, "to": 1, "map": [0, 0]}}
    response = client.post("/api/v1/ops/minor", json=body)
    assert response.status_code == 200
    assert response.json()["data"] == {"domain": 2, "arity": 1, "table": [0, 1]}


def test_compose():
    """(x ⊕ y) ∧ (x ∧ y) is constantly 0."""
    response = client.post("/api/v1/ops/compose", json={"operation": AND2, "args": [XOR2, AND2]})
    assert response.status_code == 200
    assert response.json()["data"]["table"] == [0, 0, 0, 0]


def test_compose_arity_mismatch():
    """Precondition failures from the algebra modules are 400."""
    response = client.post("/api/v1/ops/compose", json={"operation": AND2, "args": [XOR2]})
    assert response.status_code == 400
    assert response.json()["code"] == "400"


def test_malformed_operation():
    """Tables of the wrong size fail request validation."""
    body = {"operation": {"domain": 2, "arity": 2, "table": [0, 1]}, "map": {"from": 2, "to": 1, "map": [0, 0]}}
    response = client.post("/api/v1/ops/minor", json=body)
    assert response.status_code == 422


def test_check_builtin_over_operations():
    """Named conditions take their parameters next to the name."""
    response = client.post("/api/v1/check", json={"condition": "quasi_majority", "operations": [BMAJ]})
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["verdict"] == "pass"
    assert data["details"]["witness"]["m"]["table"] == BMAJ["table"]


def test_check_condition_body_over_structure():
    """A custom cyclic identity has no binary witness on C_2."""
    condition = {"symbols": {"c": 2}, "identities": [{"lhs": ["c", [0, 1]], "rhs": ["c", [1, 0]]}]}
    body = {"condition": condition, "structure": C2, "symmetry": "cyclic"}
    response = client.post("/api/v1/check", json=body)
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["verdict"] == "fail"
    assert data["counterexample"] == {"witness": None}


def test_check_unknown_condition():
    """Unknown builtin names are 400."""
    response = client.post("/api/v1/check", json={"condition": "near_unanimity", "operations": [BMAJ]})
    assert response.status_code == 400


def test_essential():
    """Ess of the two-cycle relation."""
    response = client.post("/api/v1/relations/essential", json=C2["relations"]["R"])
    assert response.status_code == 200
    assert response.json()["data"] == {"essential": True, "tuples": [[0, 0], [1, 1]]}


def test_blocks():
    """Parity forms one Z2 block."""
    response = client.post("/api/v1/relations/blocks", json=PARITY)
    assert response.status_code == 200
    (block,) = response.json()["data"]["blocks"]
    assert block["group_structure"]["group"] == "Z2"


def test_decomposable():
    """Parity is not 2-decomposable."""
    response = client.post("/api/v1/relations/decomposable", json={"relation": PARITY, "n": 2})
    assert response.status_code == 200
    assert response.json()["data"] == {"n": 2, "decomposable": False}


def test_hom():
    """C_3 -> C_2 does not exist; C_2 -> C_2 starts with the identity."""
    response = client.post("/api/v1/hom", json={"source": C3, "target": C2})
    assert response.status_code == 200
    assert response.json()["data"] == {"homomorphism": None}

    response = client.post("/api/v1/hom", json={"source": C2, "target": C2})
    assert response.json()["data"]["homomorphism"] in ([0, 1], [1, 0])
