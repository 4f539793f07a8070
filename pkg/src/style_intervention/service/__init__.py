"""Service layer - configuration, persistence and pipeline orchestration."""
