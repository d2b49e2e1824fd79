"""Long-tail dataset curation and augmentation pipeline."""

from ._core import (
    BackendError,
    IntegrityError,
    ValidationError,
    emit_mix,
    manifest_stats,
    normalize_text,
    parse_description,
    render_description,
    resume,
    run,
)

__all__ = [
    "BackendError",
    "IntegrityError",
    "ValidationError",
    "emit_mix",
    "manifest_stats",
    "normalize_text",
    "parse_description",
    "render_description",
    "resume",
    "run",
]
