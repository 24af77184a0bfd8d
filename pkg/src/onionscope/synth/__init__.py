"""Synthetic corpora with ground truth for mirror, crawl and classifier experiments."""
from .generate import (DEFAULT_MIX, DEMO_KEYWORDS, EXACT, ORIGINAL, InvalidSpec, SynthCorpus, SynthPage,
                       SynthSpec, benchmark_corpus, forum_titles, generate, read_labels, text_corpus, write_fixture,
                       write_training)
from .mutate import MutationKind, RegionMissing, mutate, region_spans
from .vocab import translate_text

__all__ = [
    "DEFAULT_MIX", "DEMO_KEYWORDS", "EXACT", "ORIGINAL", "InvalidSpec", "SynthCorpus", "SynthPage",
    "SynthSpec", "benchmark_corpus", "forum_titles", "generate", "read_labels", "text_corpus", "write_fixture",
    "write_training", "MutationKind", "RegionMissing", "mutate", "region_spans", "translate_text",
]
