"""HTTP routes of the workbench service."""
