"""Sentence-vector export and optional joint fine-tuning for affectkit.

The adapter only reads and writes the engine's file formats (corpus JSONL
in, embedding/prediction JSONL out); it never imports the engine or talks
to its service.
"""

from .export import AdapterConfig, AdapterError, export_embeddings
from .finetune import FinetuneConfig, joint_finetune

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "export_embeddings",
    "FinetuneConfig",
    "joint_finetune",
]
