"""Protocol parameters and the Cauchy-Vandermonde (CSA) matrix.

Column ``l < L`` of the CSA matrix holds ``1 / (f_l - alpha_n)``; the
remaining ``N - L`` columns are Vandermonde powers ``alpha_n ** j``.  After
multiplying by its inverse, the answer vector splits into three row blocks:
``L`` message rows, ``2B`` masked interference rows and ``2B`` syndrome rows
that vanish unless a Byzantine server tampered with its answer.  The syndrome
rows are further split into a ``Phi`` half and a ``Psi`` half of ``B`` rows.

Server indices are 1-based throughout the public API.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np
from sympy import isprime, nextprime

from .field import PrimeField


class InvalidParamsError(ValueError):
    pass


class LengthMismatchError(InvalidParamsError):
    """L != N - 4B."""


class NotPrimeError(InvalidParamsError):
    pass


class FieldTooSmallError(InvalidParamsError):
    """q < N + L."""


class DuplicateAlphaError(InvalidParamsError):
    pass


class DuplicateFError(InvalidParamsError):
    pass


class PointCollisionError(InvalidParamsError):
    """Some alpha_n equals some f_l, so f_l - alpha_n is not invertible."""


class TooManyByzantineError(InvalidParamsError):
    """N <= 4B."""


class CandidateError(ValueError):
    pass


@dataclass(frozen=True)
class PirParams:
    n: int
    b: int
    k: int
    l: int
    q: int
    alphas: tuple[int, ...]
    fs: tuple[int, ...]

    @classmethod
    def create(
        cls,
        n: int,
        b: int,
        k: int = 1,
        q: Optional[int] = None,
        alphas: Optional[Sequence[int]] = None,
        fs: Optional[Sequence[int]] = None,
    ) -> "PirParams":
        """Validated parameters with the default evaluation points.

        Defaults: ``q`` is the smallest prime ``>= N + L``, ``alpha_n = n`` and
        ``f_l = q - l``.
        """
        l = n - 4 * b
        if q is None:
            q = default_modulus(n, l)
        alphas = tuple(range(1, n + 1)) if alphas is None else tuple(int(a) for a in alphas)
        fs = tuple(q - i for i in range(1, l + 1)) if fs is None else tuple(int(f) for f in fs)
        return validate_params(cls(n, b, k, l, q, alphas, fs))

    @cached_property
    def field(self) -> PrimeField:
        return PrimeField(self.q)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.l, self.n)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "b": self.b,
            "k": self.k,
            "l": self.l,
            "q": self.q,
            "alphas": list(self.alphas),
            "fs": list(self.fs),
        }


def default_modulus(n: int, l: int) -> int:
    return n + l if isprime(n + l) else int(nextprime(n + l))


def validate_params(params: PirParams) -> PirParams:
    p = params
    if p.b < 1 or p.k < 1:
        raise InvalidParamsError(f"need B >= 1 and K >= 1, got B={p.b}, K={p.k}")
    if p.n <= 4 * p.b:
        raise TooManyByzantineError(f"N={p.n} must exceed 4B={4 * p.b}")
    if p.l != p.n - 4 * p.b:
        raise LengthMismatchError(f"L={p.l} but N - 4B = {p.n - 4 * p.b}")
    if not isprime(p.q):
        raise NotPrimeError(f"q={p.q} is not prime")
    if p.q < p.n + p.l:
        raise FieldTooSmallError(f"q={p.q} < N + L = {p.n + p.l}")
    if len(p.alphas) != p.n or len(p.fs) != p.l:
        raise InvalidParamsError(f"expected {p.n} alphas and {p.l} fs")
    alphas = [a % p.q for a in p.alphas]
    fs = [f % p.q for f in p.fs]
    if len(set(alphas)) != len(alphas):
        raise DuplicateAlphaError(f"alphas {p.alphas} are not distinct mod {p.q}")
    if len(set(fs)) != len(fs):
        raise DuplicateFError(f"fs {p.fs} are not distinct mod {p.q}")
    common = set(alphas) & set(fs)
    if common:
        raise PointCollisionError(f"points {sorted(common)} appear among both alphas and fs")
    return params


def check_candidate(params: PirParams, candidate: Iterable[int]) -> tuple[int, ...]:
    cand = tuple(int(c) for c in candidate)
    if len(cand) != params.b:
        raise CandidateError(f"candidate {cand} must have exactly B={params.b} servers")
    if list(cand) != sorted(set(cand)):
        raise CandidateError(f"candidate {cand} must be strictly ascending")
    if cand and (cand[0] < 1 or cand[-1] > params.n):
        raise CandidateError(f"candidate {cand} outside 1..{params.n}")
    return cand


@dataclass(frozen=True, eq=False)
class DecoderTables:
    """Per-candidate linear maps used to test every candidate at once.

    For candidate ``c`` (row ``c`` of ``candidates``, 0-based server
    indices): the syndrome ``y`` is consistent iff ``checks[c] @ y == 0``;
    the corruption estimate is ``proj[c] @ y``; its footprint on the
    message rows is ``msg_cols[c] @ delta``.
    """

    candidates: np.ndarray
    proj: np.ndarray
    checks: np.ndarray
    msg_cols: np.ndarray


@dataclass(frozen=True, eq=False)
class CsaContext:
    params: PirParams
    csa: np.ndarray
    csa_inv: np.ndarray

    @property
    def field(self) -> PrimeField:
        return self.params.field

    @property
    def syndrome_rows(self) -> slice:
        p = self.params
        return slice(p.l + 2 * p.b, p.n)

    @cached_property
    def decoder_tables(self) -> DecoderTables:
        p = self.params
        f = self.field
        cands = list(combinations(range(1, p.n + 1), p.b))
        rows = 2 * p.b
        proj = f.zeros((len(cands), p.b, rows))
        checks = f.zeros((len(cands), rows, rows))
        msg_cols = f.zeros((len(cands), p.l, p.b))
        for i, cand in enumerate(cands):
            solver = f.colspace_solver(syndrome_matrix(self, cand))
            proj[i] = solver.proj
            checks[i, : solver.checks.shape[0]] = solver.checks
            msg_cols[i] = self.csa_inv[: p.l, [c - 1 for c in cand]]
        return DecoderTables(np.array(cands, dtype=np.int64) - 1, proj, checks, msg_cols)


def build_csa(params: PirParams) -> CsaContext:
    f = params.field
    cauchy = [[f.inv(fl - a) for fl in params.fs] for a in params.alphas]
    vander = f.vandermonde(params.alphas, params.n - params.l)
    csa = np.concatenate([f(cauchy).reshape(params.n, params.l), vander], axis=1)
    csa_inv = f.mat_inv(csa)
    csa.setflags(write=False)
    csa_inv.setflags(write=False)
    return CsaContext(params, csa, csa_inv)


def syndrome_matrix(ctx: CsaContext, candidate: Iterable[int]) -> np.ndarray:
    """Syndrome rows of the inverse CSA matrix at the candidate's columns (2B x B)."""
    cand = check_candidate(ctx.params, candidate)
    return ctx.csa_inv[ctx.syndrome_rows][:, [c - 1 for c in cand]]


def candidate_submatrices(ctx: CsaContext, candidate: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    """``(Phi, Psi)``: the upper and lower B-row halves of the syndrome matrix."""
    s = syndrome_matrix(ctx, candidate)
    b = ctx.params.b
    return s[:b], s[b:]
