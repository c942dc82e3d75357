# SPDX-License-Identifier: Apache-2.0
"""Recomputation-free simultaneous speech translation at desk scale.

Everything is implemented in the C++ core; this package re-exports it.
"""

from streamst._core import (  # noqa: F401
    BenchRecord,
    Clock,
    DecoderCache,
    DelayProfile,
    EncoderCache,
    EquivSummary,
    Event,
    EventLog,
    ExtractorStream,
    GenerationResult,
    Model,
    ModelConfig,
    PolicyConfig,
    SessionResult,
    Vocabulary,
    adapt,
    adapter_output_len,
    assign_positions,
    bench_scaling,
    bleu_lite,
    build_blockwise_mask,
    build_consistency_mask,
    build_stage2_mask,
    causality_suite,
    count_word_boundaries,
    count_words_total,
    decoder_append,
    decoder_equivalence_suite,
    decoder_forward_full,
    delays_from_log,
    embed_tokens,
    encode_full,
    encode_segment,
    encoder_equivalence_suite,
    extract_all,
    greedy_generate,
    group_words,
    laal,
    load_event_log,
    masked_ce,
    masked_ce_grad,
    run_hold_n,
    run_wait_k_stride_n,
    sample_k,
    save_bench_csv,
    save_event_log,
    stage2_equivalence_suite,
    stage2_logit_equivalence,
    token_groups_for,
    validate_log,
    waco_loss,
    waco_loss_grad,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
