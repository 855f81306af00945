"""Tests for rate limiting functionality."""

from unittest.mock import MagicMock, patch

from fastapi.testclient import TestClient

from clonelab.config import settings
from clonelab.main import app
from clonelab.middleware.rate_limit import get_client_identifier, verify_limit

client = TestClient(app)


def test_rate_limiting_client_identifier():
    """Test client identifier extraction for rate limiting."""
    request = MagicMock()
    request.headers = {"X-Client-ID": "test-client"}

    identifier = get_client_identifier(request)
    assert identifier == "client:test-client"

    request.headers = {}
    with patch("clonelab.middleware.rate_limit.get_remote_address", return_value="192.168.1.1"):
        identifier = get_client_identifier(request)
        assert identifier == "ip:192.168.1.1"


def test_verify_limit_follows_settings(monkeypatch):
    """The limit string is read from settings on every call."""
    monkeypatch.setattr(settings, "rate_limit_verify_per_min", 3)
    assert verify_limit() == "3/minute"


def test_health_is_not_rate_limited():
    """Health checks are never limited."""
    for _ in range(15):
        assert client.get("/healthz").status_code == 200


def test_rate_limiting_exceeded(monkeypatch):
    """Test rate limiting when limit is exceeded."""
    monkeypatch.setattr(settings, "rate_limit_verify_per_min", 1)
    headers = {"X-Client-ID": "rate-limit-exceeded-test"}

    first = client.post("/api/v1/verify/block-structure", headers=headers)
    assert first.status_code == 200

    response = client.post("/api/v1/verify/block-structure", headers=headers)
    assert response.status_code == 429

    data = response.json()
    assert data["code"] == "429"
    assert data["status"] == "rate_limit_exceeded"
    assert "Rate limit exceeded" in data["error_message"]


def test_rate_limiting_per_client(monkeypatch):
    """Each client has its own allowance."""
    monkeypatch.setattr(settings, "rate_limit_verify_per_min", 1)

    for client_id in ("per-client-a", "per-client-b"):
        response = client.post("/api/v1/verify/block-structure", headers={"X-Client-ID": client_id})
        assert response.status_code == 200
