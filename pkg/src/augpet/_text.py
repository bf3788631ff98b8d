"""Tokenization shared by the augmenters, the similarity filter and the model."""

import re

# Same character class the Keras ``Tokenizer`` strips by default; apostrophes survive.
_KERAS_FILTERS = '!"#$%&()*+,-./:;<=>?@[\\]^_`{|}~\t\n\r'
_SPLIT_RE = re.compile("[" + re.escape(_KERAS_FILTERS) + r"\s]+")

# Surface-word matcher used where the original characters must be preserved.
WORD_RE = re.compile(r"\w+(?:'\w+)*")


def tokenize(text):
    """Lowercase ``text`` and split on whitespace and punctuation."""
    return [tok for tok in _SPLIT_RE.split(text.lower()) if tok]
