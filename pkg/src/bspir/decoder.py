"""Byzantine-locating decoder.

The user multiplies the answers by the inverse CSA matrix and reads the last
``2B`` coordinates as a syndrome.  Each size-``B`` server set is a candidate
location; a candidate is consistent when the syndrome lies in the span of the
syndrome-matrix columns it selects, and the solution gives the corruption
values to strip from the message rows.  Candidates are tried in lexicographic
order; by default all of them are checked so that two consistent candidates
disagreeing on the message are caught.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .csa import CsaContext, check_candidate, syndrome_matrix


class DecodeError(Exception):
    pass


class NoConsistentCandidateError(DecodeError):
    pass


class AmbiguousDecodeError(DecodeError):
    pass


@dataclass(frozen=True, eq=False)
class DecodeResult:
    message: np.ndarray
    byz_estimate: tuple[int, ...]
    delta_hat: np.ndarray
    candidates_tested: int


@dataclass(frozen=True, eq=False)
class BatchDecode:
    """Vectorised decode of ``M`` answer vectors.

    ``choice`` is the index of the first consistent candidate (undefined where
    ``found`` is False); ``ambiguous`` flags rows where some consistent
    candidate yields a different message.
    """

    messages: np.ndarray  # (M, L)
    delta_hat: np.ndarray  # (M, B)
    choice: np.ndarray  # (M,)
    found: np.ndarray  # (M,)
    ambiguous: np.ndarray  # (M,)
    consistent: np.ndarray  # (M, C)

    @property
    def ok(self) -> np.ndarray:
        return self.found & ~self.ambiguous


def consistency_check(ctx: CsaContext, candidate: Iterable[int], syndrome) -> Optional[np.ndarray]:
    """Corruption values on ``candidate`` explaining ``syndrome``, or None."""
    cand = check_candidate(ctx.params, candidate)
    return ctx.field.solve_in_colspace(syndrome_matrix(ctx, cand), syndrome)


def decode_batch(answers, ctx: CsaContext) -> BatchDecode:
    p = ctx.params
    q = p.q
    tables = ctx.decoder_tables
    answers = np.asarray(answers)
    if answers.shape[-1] != p.n:
        raise ValueError(f"expected {p.n} answers, got shape {answers.shape}")
    a_hat = answers.reshape(-1, p.n).dot(ctx.csa_inv.T) % q
    y = a_hat[:, ctx.syndrome_rows]
    residual = np.einsum("cij,mj->mci", tables.checks, y) % q
    consistent = ~residual.any(axis=2)
    deltas = np.einsum("cij,mj->mci", tables.proj, y) % q
    messages = (a_hat[:, None, : p.l] - np.einsum("clb,mcb->mcl", tables.msg_cols, deltas)) % q

    found = consistent.any(axis=1)
    choice = consistent.argmax(axis=1)
    rows = np.arange(len(choice))
    chosen = messages[rows, choice]
    differs = (messages != chosen[:, None, :]).any(axis=2)
    ambiguous = (consistent & differs).any(axis=1)
    return BatchDecode(chosen, deltas[rows, choice], choice, found, ambiguous, consistent)


def decode(answers, ctx: CsaContext, fast: bool = False) -> DecodeResult:
    """Recover the requested message from ``N`` answers with at most ``B`` corrupted.

    With ``fast`` the search stops at the first consistent candidate and skips
    the ambiguity audit.
    """
    answers = np.asarray(answers)
    if answers.shape != (ctx.params.n,):
        raise ValueError(f"expected {ctx.params.n} answers, got shape {answers.shape}")
    res = decode_batch(answers, ctx)
    ncand = res.consistent.shape[1]
    if not res.found[0]:
        raise NoConsistentCandidateError(
            f"no set of {ctx.params.b} servers explains the syndrome; more than B answers were corrupted"
        )
    choice = int(res.choice[0])
    if not fast and res.ambiguous[0]:
        others = [
            tuple(int(s) + 1 for s in ctx.decoder_tables.candidates[c])
            for c in np.nonzero(res.consistent[0])[0]
        ]
        raise AmbiguousDecodeError(f"consistent candidates {others} disagree on the message")
    estimate = tuple(int(s) + 1 for s in ctx.decoder_tables.candidates[choice])
    return DecodeResult(
        message=res.messages[0],
        byz_estimate=estimate,
        delta_hat=res.delta_hat[0],
        candidates_tested=choice + 1 if fast else ncand,
    )
