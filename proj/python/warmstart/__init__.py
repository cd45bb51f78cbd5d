# Copyright (c) 2026, The warmstart Authors
# SPDX-License-Identifier: Apache-2.0

"""Warm-start toolkit for training a language model on a new vocabulary."""

from ._warmstart import (
    CallableProvider,
    DictionaryProvider,
    IdentityProvider,
    MaskMode,
    TranslationProvider,
    TranslationTable,
    Vocabulary,
    WarmstartError,
    __version__,
    apply_span_corruption,
    assemble,
    chunk_corpus,
    detokenize,
    draw_mask,
    estimate_memory,
    fill_table,
    load_vocab,
    lookup_or_fetch,
    lr_at,
    map_token,
    mask_counts,
    needs_translation,
    normalize_token,
    plan_accumulation,
    read_embeddings,
    read_store,
    recommend,
    run_cli,
    tokenize_greedy,
    total_steps_for,
    transplant,
    write_embeddings,
    write_store,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
