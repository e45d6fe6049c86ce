"""Exhaustive verification of the scheme's privacy and correctness claims.

Each check enumerates every randomness draw of a small instance, builds the
exact distribution of what the relevant party observes, and compares
distributions by integer counting.  Zero mutual information is tested as
exact distribution equality (total variation distance 0); no floating point
is involved.

A ``mutation`` pins one randomness stream to zero instead of enumerating it:
``no_mask`` (mask secrets), ``no_query_noise`` (query noise) or
``no_storage_noise`` (storage noise).  Mutated runs are expected to fail; they
guard the checks against passing vacuously.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import prod
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .actors import answer_tensor, mask_tensor, query_tensor, storage_tensor
from .adversary import Strategy, get_strategy, make_view
from .csa import PirParams, build_csa
from .decoder import decode_batch

DEFAULT_CEILING = 10**8
CHUNK_ROWS = 1 << 17

MUTATIONS = {
    "no_mask": "zprime",
    "no_query_noise": "r",
    "no_storage_noise": "z",
}


class EnumerationTooLargeError(RuntimeError):
    pass


# -- canonical encoding ------------------------------------------------------


def encode_rows(rows, q: int) -> np.ndarray:
    """Injective encoding of each row of field elements.

    Rows become mixed-radix integers (first column most significant) when they
    fit in int64, and fixed-width big-endian byte strings otherwise.
    """
    rows = np.asarray(rows)
    width = rows.shape[-1]
    if q**width < 2**63:
        keys = np.zeros(rows.shape[:-1], dtype=np.int64)
        for j in range(width):
            keys = keys * q + rows[..., j].astype(np.int64)
        return keys
    nbytes = (int(q - 1).bit_length() + 7) // 8
    flat = rows.reshape(-1, width)
    out = np.empty(len(flat), dtype=object)
    for i, row in enumerate(flat):
        out[i] = b"".join(int(v).to_bytes(nbytes, "big") for v in row)
    return out.reshape(rows.shape[:-1])


def decode_keys(keys, q: int, width: int) -> np.ndarray:
    keys = np.asarray(keys)
    if keys.dtype != object:
        out = np.zeros(keys.shape + (width,), dtype=np.int64)
        rest = keys.astype(np.int64)
        for j in range(width - 1, -1, -1):
            out[..., j] = rest % q
            rest = rest // q
        return out
    nbytes = (int(q - 1).bit_length() + 7) // 8
    out = np.empty(keys.shape + (width,), dtype=object)
    for idx, key in np.ndenumerate(keys):
        for j in range(width):
            out[idx + (j,)] = int.from_bytes(key[j * nbytes : (j + 1) * nbytes], "big")
    return out


# -- exact distributions -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    keys: np.ndarray  # sorted, unique
    counts: np.ndarray

    @classmethod
    def from_keys(cls, keys) -> "ExactDistribution":
        keys, counts = np.unique(np.asarray(keys).ravel(), return_counts=True)
        return cls(keys, counts)

    @classmethod
    def from_rows(cls, rows, q: int) -> "ExactDistribution":
        return cls.from_keys(encode_rows(rows, q))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict:
        return {k: int(c) for k, c in zip(self.keys.tolist(), self.counts.tolist())}

    def tv(self, other: "ExactDistribution") -> Fraction:
        t1, t2 = self.total, other.total
        if t1 == t2 and np.array_equal(self.keys, other.keys) and np.array_equal(self.counts, other.counts):
            return Fraction(0)
        merged, inverse = np.unique(np.concatenate([self.keys, other.keys]), return_inverse=True)
        a = np.zeros(len(merged), dtype=object)
        b = np.zeros(len(merged), dtype=object)
        a[inverse[: len(self.keys)]] = [int(c) for c in self.counts]
        b[inverse[len(self.keys) :]] = [int(c) for c in other.counts]
        return Fraction(int(sum(abs(x * t2 - y * t1) for x, y in zip(a, b))), 2 * t1 * t2)

    def tv_from_uniform(self, support_size: int) -> Fraction:
        t = self.total
        inside = sum(abs(Fraction(int(c), t) - Fraction(1, support_size)) for c in self.counts)
        outside = Fraction(support_size - len(self.keys), support_size)
        return (inside + outside) / 2


# -- reports -----------------------------------------------------------------


@dataclass
class OracleReport:
    check: str
    params: dict
    tv: Optional[Fraction]
    cases: int
    millis: int
    exact: bool = True
    applicable: bool = True
    failures: int = 0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> Optional[bool]:
        """True/False for exact checks, None for sampled privacy checks."""
        if not self.applicable:
            return True
        if self.failures:
            return False
        if self.tv is None:
            return True
        if not self.exact:
            return None
        return self.tv == 0

    def to_record(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "tv_numerator": None if self.tv is None else self.tv.numerator,
            "tv_denominator": None if self.tv is None else self.tv.denominator,
            "cases": self.cases,
            "millis": self.millis,
            "exact": self.exact,
            "applicable": self.applicable,
            "failures": self.failures,
            "passed": self.passed,
            "detail": self.detail,
        }

    def summary(self) -> str:
        tv = "n/a" if self.tv is None else str(self.tv)
        status = {True: "PASS", False: "FAIL", None: "SAMPLED"}[self.passed]
        if not self.applicable:
            return f"N/A {self.check}: not applicable ({self.detail.get('reason', '')})"
        extra = f" failures={self.failures}" if self.failures else ""
        return f"{status} {self.check} tv={tv} cases={self.cases}{extra} {self.millis}ms"


# -- enumeration helpers -----------------------------------------------------


def _stream_shapes(params: PirParams) -> dict[str, tuple[int, ...]]:
    p = params
    return {
        "w": (p.k, p.l),
        "z": (p.l, p.b, p.k),
        "r": (p.l, p.b, p.k),
        "zprime": (2 * p.b,),
    }


@dataclass(frozen=True)
class _Space:
    """Product space of named randomness streams; zeroed streams contribute one point."""

    q: int
    shapes: dict
    zeroed: frozenset

    @property
    def digits(self) -> int:
        return sum(prod(s) for n, s in self.shapes.items() if n not in self.zeroed)

    @property
    def size(self) -> int:
        return self.q**self.digits

    def _split(self, digits: np.ndarray) -> dict[str, np.ndarray]:
        m = len(digits)
        out = {}
        pos = 0
        for name, shape in self.shapes.items():
            if name in self.zeroed:
                out[name] = np.zeros((m,) + shape, dtype=np.int64)
                continue
            width = prod(shape)
            out[name] = digits[:, pos : pos + width].reshape((m,) + shape)
            pos += width
        return out

    def chunks(self, chunk: int = CHUNK_ROWS) -> Iterator[dict[str, np.ndarray]]:
        d = self.digits
        total = self.size
        powers = self.q ** np.arange(d - 1, -1, -1, dtype=np.int64)
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
            yield self._split((idx[:, None] // powers) % self.q)

    def sample(self, count: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        return self._split(rng.integers(0, self.q, size=(count, self.digits)))


def _space(params: PirParams, names: Sequence[str], mutation: Optional[str], extra=None) -> _Space:
    shapes = {n: s for n, s in _stream_shapes(params).items() if n in names}
    if extra:
        shapes.update(extra)
    zeroed = frozenset([MUTATIONS[mutation]] if mutation else [])
    if mutation and mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}; choose from {sorted(MUTATIONS)}")
    return _Space(params.q, shapes, zeroed)


def _guard(cases: int, ceiling: int, what: str) -> None:
    if cases > ceiling:
        raise EnumerationTooLargeError(
            f"{what} needs {cases} cases, above the ceiling of {ceiling}; use sampled mode"
        )


def _all_tables(q: int, shape: tuple[int, ...]) -> np.ndarray:
    width = prod(shape)
    idx = np.arange(q**width, dtype=np.int64)
    powers = q ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers) % q).reshape((len(idx),) + shape)


def _coalitions(params: PirParams, byz_sets: Optional[Iterable[Sequence[int]]]) -> list[tuple[int, ...]]:
    if byz_sets is None:
        return list(combinations(range(1, params.n + 1), params.b))
    return [tuple(sorted(s)) for s in byz_sets]


def _params_record(params: PirParams) -> dict:
    return params.as_dict()


def _millis(start: float) -> int:
    return int(round((time.perf_counter() - start) * 1000))


# -- the checks --------------------------------------------------------------


def check_query_privacy(
    params: PirParams, mutation: Optional[str] = None, ceiling: int = DEFAULT_CEILING
) -> OracleReport:
    """Any B servers' queries have the same distribution for every requested index."""
    start = time.perf_counter()
    p = params
    if p.b == 0:
        return OracleReport("query_privacy", _params_record(p), None, 0, _millis(start), applicable=False,
                            detail={"reason": "no collusion bound when B = 0"})
    space = _space(p, ["r"], mutation)
    sets = _coalitions(p, None)
    cases = len(sets) * p.k * space.size
    _guard(cases, ceiling, "query privacy")
    per_set = {}
    worst = Fraction(0)
    for g in sets:
        idx = [s - 1 for s in g]
        dists = []
        for theta in range(1, p.k + 1):
            keys = [
                encode_rows(query_tensor(p, theta, c["r"])[:, idx].reshape(len(c["r"]), -1), p.q)
                for c in space.chunks()
            ]
            dists.append(ExactDistribution.from_keys(np.concatenate(keys)))
        tv = max((dists[0].tv(d) for d in dists[1:]), default=Fraction(0))
        per_set[",".join(map(str, g))] = str(tv)
        worst = max(worst, tv)
    return OracleReport("query_privacy", _params_record(p), worst, cases, _millis(start),
                        detail={"mutation": mutation, "per_set_tv": per_set})


def check_storage_security(
    params: PirParams, mutation: Optional[str] = None, ceiling: int = DEFAULT_CEILING
) -> OracleReport:
    """Any B servers' storage has the same distribution for every message table."""
    start = time.perf_counter()
    p = params
    if p.b == 0:
        return OracleReport("storage_security", _params_record(p), None, 0, _millis(start), applicable=False,
                            detail={"reason": "no security threshold when B = 0"})
    space = _space(p, ["z"], mutation)
    tables = _all_tables(p.q, (p.k, p.l))
    sets = _coalitions(p, None)
    cases = len(sets) * len(tables) * space.size
    _guard(cases, ceiling, "storage security")
    zs = [c["z"] for c in space.chunks()]
    worst = Fraction(0)
    worst_uniform = Fraction(0)
    per_set = {}
    support = p.q ** (p.b * p.l * p.k)
    for g in sets:
        idx = [s - 1 for s in g]
        ref = None
        set_tv = Fraction(0)
        for w in tables:
            keys = [encode_rows(storage_tensor(p, w, z)[:, idx].reshape(len(z), -1), p.q) for z in zs]
            dist = ExactDistribution.from_keys(np.concatenate(keys))
            worst_uniform = max(worst_uniform, dist.tv_from_uniform(support))
            if ref is None:
                ref = dist
            else:
                set_tv = max(set_tv, ref.tv(dist))
        per_set[",".join(map(str, g))] = str(set_tv)
        worst = max(worst, set_tv)
    return OracleReport(
        "storage_security", _params_record(p), worst, cases, _millis(start),
        detail={"mutation": mutation, "per_set_tv": per_set, "max_tv_from_uniform": str(worst_uniform)},
    )


@dataclass(frozen=True, eq=False)
class _Chunk:
    """A batch of randomness draws with everything that does not depend on the messages.

    ``gamma`` rows are crossed with the ``Mb`` draws, or matched one per draw
    when ``paired``.
    """

    draws: dict
    queries: np.ndarray  # (Mb, N, L, K)
    zhat: np.ndarray  # (Mb, N)
    gamma: np.ndarray
    paired: bool
    query_keys: Optional[np.ndarray] = None

    @property
    def gamma_rows(self) -> int:
        return 1 if self.paired else len(self.gamma)


def _prepare(p: PirParams, theta: int, draws: dict, gamma: np.ndarray, paired: bool = False) -> _Chunk:
    queries = query_tensor(p, theta, draws["r"])
    zhat = mask_tensor(p, draws["zprime"])
    qflat = queries.reshape(len(queries), -1)
    qkeys = encode_rows(qflat, p.q) if p.q ** (qflat.shape[1] + p.n) < 2**63 else None
    return _Chunk(draws, queries, zhat, gamma, paired, qkeys)


def _chunks(p: PirParams, theta: int, space: _Space, glen: int, samples: Optional[int], rng) -> list[_Chunk]:
    if samples is not None:
        draws = space.sample(samples, rng)
        return [_prepare(p, theta, draws, rng.integers(0, p.q, size=(samples, glen)), paired=True)]
    gamma = _all_tables(p.q, (glen,))
    return [_prepare(p, theta, d, gamma) for d in space.chunks(max(1, CHUNK_ROWS // len(gamma)))]


def _answers(p: PirParams, chunk: _Chunk, coalition, strategy: Strategy, w) -> np.ndarray:
    """All N answers, shape ``(Mb, Mg, N)``, with the coalition following ``strategy``."""
    storages = storage_tensor(p, w, chunk.draws["z"])
    honest = answer_tensor(storages, chunk.queries, chunk.zhat, p.q)
    gamma = chunk.gamma[:, None, :] if chunk.paired else chunk.gamma[None]
    view = make_view(coalition, storages[:, None], chunk.queries[:, None], chunk.zhat[:, None], gamma, p.q)
    byz = strategy(view)
    shape = (honest.shape[0], chunk.gamma_rows, p.n)
    answers = np.array(np.broadcast_to(honest[:, None, :], shape))
    answers[..., [s - 1 for s in coalition]] = np.broadcast_to(byz, shape[:2] + (len(coalition),))
    return answers


def _transcript_keys(p: PirParams, chunk: _Chunk, answers: np.ndarray) -> np.ndarray:
    """Canonical keys of (all queries, all answers)."""
    if chunk.query_keys is not None:
        return chunk.query_keys[:, None] * (p.q**p.n) + encode_rows(answers, p.q)
    mb, mg, n = answers.shape
    qflat = chunk.queries.reshape(mb, -1)
    rows = np.concatenate([np.broadcast_to(qflat[:, None, :], (mb, mg, qflat.shape[1])), answers], axis=2)
    return encode_rows(rows, p.q)


def check_symmetric_privacy(
    params: PirParams,
    strategy: str | Strategy,
    byz_sets: Optional[Iterable[Sequence[int]]] = None,
    mutation: Optional[str] = None,
    ceiling: int = DEFAULT_CEILING,
    samples: Optional[int] = None,
    seed: int = 0,
) -> OracleReport:
    """The user's full transcript carries nothing about the other messages.

    For every coalition, requested index and value of the requested message,
    the distribution of (all queries, all answers) over storage noise, query
    noise, mask secrets and the coalition's gamma must be the same for every
    value of the remaining messages.  ``ceiling`` bounds the enumeration for
    one coalition.  With ``samples`` the randomness is sampled instead, and
    the reported distance is only an empirical estimate.
    """
    start = time.perf_counter()
    p = params
    strat = get_strategy(strategy) if isinstance(strategy, str) else strategy
    space = _space(p, ["z", "r", "zprime"], mutation)
    sets = _coalitions(p, byz_sets)
    rng = np.random.default_rng(seed)
    glen = strat.gamma_len(p.b)
    draws = space.size * p.q**glen if samples is None else samples
    per_set_cases = p.k * p.q ** (p.k * p.l) * draws
    if samples is None:
        _guard(per_set_cases, ceiling, "symmetric privacy (per coalition)")
    wanted = _all_tables(p.q, (p.l,))
    others = _all_tables(p.q, (p.k - 1, p.l))
    set_tv = {g: Fraction(0) for g in sets}
    for theta in range(1, p.k + 1):
        chunks = _chunks(p, theta, space, glen, samples, rng)
        rest = [k for k in range(p.k) if k != theta - 1]
        for g in sets:
            for wt in wanted:
                ref = None
                for wc in others:
                    w = np.zeros((p.k, p.l), dtype=np.int64)
                    w[theta - 1] = wt
                    w[rest] = wc
                    keys = [_transcript_keys(p, c, _answers(p, c, g, strat, w)).ravel() for c in chunks]
                    dist = ExactDistribution.from_keys(np.concatenate(keys))
                    if ref is None:
                        ref = dist
                    else:
                        set_tv[g] = max(set_tv[g], ref.tv(dist))
    return OracleReport(
        "symmetric_privacy",
        _params_record(p),
        max(set_tv.values(), default=Fraction(0)),
        per_set_cases * len(sets),
        _millis(start),
        exact=samples is None,
        detail={
            "strategy": strat.name,
            "mutation": mutation,
            "per_set_tv": {",".join(map(str, g)): str(tv) for g, tv in set_tv.items()},
        },
    )


def check_correctness_exhaustive(
    params: PirParams,
    strategy: str | Strategy,
    byz_sets: Optional[Iterable[Sequence[int]]] = None,
    ceiling: int = DEFAULT_CEILING,
    samples: Optional[int] = None,
    seed: int = 0,
) -> OracleReport:
    """Decoding returns the requested message for every draw, index and coalition.

    With ``samples`` each (coalition, index) pair gets that many random draws
    of messages and randomness instead of the full enumeration.
    """
    start = time.perf_counter()
    p = params
    strat = get_strategy(strategy) if isinstance(strategy, str) else strategy
    ctx = build_csa(p)
    space = _space(p, ["w", "z", "r", "zprime"], None)
    sets = _coalitions(p, byz_sets)
    rng = np.random.default_rng(seed)
    glen = strat.gamma_len(p.b)
    per_block = space.size * p.q**glen if samples is None else samples
    cases = per_block * len(sets) * p.k
    if samples is None:
        _guard(cases, ceiling, "correctness")
    failures = ambiguous = unlocated = 0
    for theta in range(1, p.k + 1):
        for g in sets:
            # sampled mode draws fresh randomness for every coalition
            for c in _chunks(p, theta, space, glen, samples, rng):
                w = c.draws["w"]
                answers = _answers(p, c, g, strat, w)
                res = decode_batch(answers.reshape(-1, p.n), ctx)
                truth = np.repeat(w[:, theta - 1, :], answers.shape[1], axis=0)
                wrong = ~res.ok | (res.messages != truth).any(axis=1)
                failures += int(wrong.sum())
                ambiguous += int(res.ambiguous.sum())
                unlocated += int((~res.found).sum())
    return OracleReport(
        "correctness",
        _params_record(p),
        None,
        cases,
        _millis(start),
        exact=samples is None,
        failures=failures,
        detail={"strategy": strat.name, "ambiguous": ambiguous, "no_consistent_candidate": unlocated},
    )
