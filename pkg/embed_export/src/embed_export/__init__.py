"""Per-token contextual vector export to the eventgcn vector format."""

from .exporter import (
    ExportError,
    ExportJob,
    ExportSummary,
    export,
    export_corpus,
    subword_alignment,
    window_spans,
)

__all__ = [
    "ExportError",
    "ExportJob",
    "ExportSummary",
    "export",
    "export_corpus",
    "subword_alignment",
    "window_spans",
]
