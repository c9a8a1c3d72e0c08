"""Contrastive region masking harness: python bindings over the C++ core."""

from crm._core import (  # noqa: F401
    BoundingBox,
    Image,
    ReasoningStep,
    ReasoningTrace,
    ScoringConfig,
    StepAlignment,
    __version__,
    aggregate_rates,
    align_step_texts,
    build_answer_prompt,
    build_cot_prompt,
    decode_ppm,
    derive_item_seed,
    detect_refusal,
    encode_ppm,
    garbage_score,
    lexical_similarity,
    mask_specific,
    parse_trace,
    sample_random_boxes,
    score_texts,
    sha256_hex,
    standard_error,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
