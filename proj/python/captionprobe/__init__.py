"""Caption perturbation suite and retrieval metrics (C++ core)."""

from ._core import (
    CaptionProbeError,
    Lexicon,
    MOCK_DIM,
    ReplacementVocab,
    TaggedCaption,
    TaggerModel,
    apply_suite,
    build_vocab,
    categorize,
    cosine_similarity,
    delta_table,
    emit,
    evaluate,
    load_embeddings,
    load_external_tags,
    mean_rank,
    median_rank,
    mock_encode,
    normalize,
    perturb,
    read_treebank,
    recall_at_k,
    run_cli,
    task_ids,
    tokenize,
    train_tagger,
    write_cevb,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
