"""HTTP middleware for the workbench service."""
