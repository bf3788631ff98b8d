"""Data augmentation, similarity filtering and pattern-based few-shot training for text classification."""

__version__ = "0.1.0"

from .augment import (
    AugmentedExample,
    BackTranslationAugmenter,
    EdaAugmenter,
    EdaConfig,
    GreyscaleAugmenter,
    RandomOversampler,
    back_translate_all,
    eda_augment,
    greyscale_augment,
    oversample,
)
from .corpus import CorpusError, Dataset, Example, class_distribution, load_corpus, sample_training_set, stratified_split
from .lexicons import EmbeddingTable, load_embeddings, load_half_scales, load_thesaurus
from .metrics import aggregate_runs, classification_metrics
from .model import BowClassifier, BowConfig
from .pet import DEFAULT_PATTERNS, PetClassifier, Verbalizer, fit_pet, run_ipet, run_pet
from .simfilter import SimilarityFilter, angular_similarity, quartile_filter, score_augmented

__all__ = [
    "AugmentedExample", "BackTranslationAugmenter", "BowClassifier", "BowConfig", "CorpusError",
    "DEFAULT_PATTERNS", "Dataset", "EdaAugmenter", "EdaConfig", "EmbeddingTable", "Example",
    "GreyscaleAugmenter", "PetClassifier", "RandomOversampler", "SimilarityFilter", "Verbalizer",
    "aggregate_runs", "angular_similarity", "back_translate_all", "class_distribution",
    "classification_metrics", "eda_augment", "fit_pet", "greyscale_augment", "load_corpus",
    "load_embeddings", "load_half_scales", "load_thesaurus", "oversample", "quartile_filter",
    "run_ipet", "run_pet", "sample_training_set", "score_augmented", "stratified_split",
]
