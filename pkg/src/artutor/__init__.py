"""Adaptive AR robot-training backend.

Three-layer pipeline: deterministic multimodal analyzers, LLM-backed
pedagogical reasoning, and schema-constrained adaptation commands delivered
over a newline-delimited JSON WebSocket protocol.
"""

__version__ = "0.1.0"
