"""Symmetric private information retrieval with Byzantine servers over GF(q).

Retrieves ``L = N - 4B`` symbols per ``N`` downloaded symbols while any ``B``
colluding servers may answer arbitrarily.
"""

from .actors import (
    DealerRandomness,
    MaskSecrets,
    MaskShare,
    QueryShare,
    StorageShare,
    UserRandomness,
    deal_masks,
    encode_storage,
    generate_queries,
    honest_answer,
)
from .adversary import STRATEGIES, ByzantineView, Strategy, byzantine_answers, corrupt_answers
from .csa import CsaContext, PirParams, build_csa, candidate_submatrices, syndrome_matrix, validate_params
from .decoder import DecodeResult, consistency_check, decode
from .field import PrimeField

__all__ = [
    "STRATEGIES",
    "ByzantineView",
    "CsaContext",
    "DealerRandomness",
    "DecodeResult",
    "MaskSecrets",
    "MaskShare",
    "PirParams",
    "PrimeField",
    "QueryShare",
    "StorageShare",
    "Strategy",
    "UserRandomness",
    "build_csa",
    "byzantine_answers",
    "candidate_submatrices",
    "consistency_check",
    "corrupt_answers",
    "deal_masks",
    "decode",
    "encode_storage",
    "generate_queries",
    "honest_answer",
    "syndrome_matrix",
    "validate_params",
]
