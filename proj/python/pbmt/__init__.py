"""Phrase-based statistical machine translation decoder."""

try:
    from ._pbmt import (
        Decoder,
        LanguageModel,
        bleu,
        compile_table,
        generate_synthetic,
    )
except ImportError:  # extension built next to the package, not inside it
    from _pbmt import (
        Decoder,
        LanguageModel,
        bleu,
        compile_table,
        generate_synthetic,
    )

__all__ = [
    "Decoder",
    "LanguageModel",
    "bleu",
    "compile_table",
    "generate_synthetic",
]
