"""Multi-module grapheme-to-phoneme engine.

Dictionary-first conversion with neural fallbacks for out-of-vocabulary
words, homograph disambiguation, and ezafe recognition.
"""

from perg2p._core import (
    Alphabet,
    G2pSystem,
    NormTable,
    apply_ezafe,
    edit_distance,
    ezafe_accuracy,
    homograph_score,
    normalize,
    parse_lexicon,
    run_gradcheck,
    synth_generate,
    tokenize,
    train_module,
    word_accuracy,
)

__all__ = [
    "Alphabet",
    "G2pSystem",
    "NormTable",
    "apply_ezafe",
    "edit_distance",
    "ezafe_accuracy",
    "homograph_score",
    "normalize",
    "parse_lexicon",
    "run_gradcheck",
    "synth_generate",
    "tokenize",
    "train_module",
    "word_accuracy",
]
