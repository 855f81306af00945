"""Tests for the public status endpoints."""

from fastapi.testclient import TestClient

from clonelab.main import app

client = TestClient(app)


def test_health_check():
    """Test health check endpoint returns 200."""
    response = client.get("/healthz")
    assert response.status_code == 200

    data = response.json()
    assert data["status"] == "healthy"
    assert data["service"] == "clonelab"
    assert data["version"] == "1.0.0"


def test_root_endpoint():
    """Test root endpoint lists the verifiers."""
    response = client.get("/")
    assert response.status_code == 200

    data = response.json()
    assert data["service"] == "clonelab"
    assert data["status"] == "running"
    assert "remark-cycles" in data["verifiers"]
    assert data["verifiers"] == sorted(data["verifiers"])


def test_security_headers():
    """Every response carries the security headers."""
    response = client.get("/healthz")
    assert response.headers["X-Content-Type-Options"] == "nosniff"
    assert response.headers["X-Frame-Options"] == "DENY"


def test_correlation_id_echoed():
    """A supplied correlation ID comes back; otherwise one is generated."""
    response = client.get("/healthz", headers={"X-Correlation-ID": "abc-123"})
    assert response.headers["X-Correlation-ID"] == "abc-123"

    response = client.get("/healthz")
    assert len(response.headers["X-Correlation-ID"]) == 36
