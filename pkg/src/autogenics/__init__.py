"""Context-aware, noise-filtered inline comment generation for Q&A code snippets."""

from .model import AnswerRecord, Language, Quartile, Snippet

__all__ = ["AnswerRecord", "Language", "Quartile", "Snippet"]
__version__ = "0.1.0"
