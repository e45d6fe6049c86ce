"""Experiment driver: seeded trial campaigns, the worked-example regression and reports.

Every random quantity of trial ``t`` comes from its own generator seeded with
``derive_seed(seed, t, tag)``: the first 8 bytes (big-endian) of
``sha256(b"bspir:<seed>:<t>:<tag>")``.  Tags are ``<strategy>/<stream>`` for
the streams ``messages``, ``theta``, ``coalition``, ``dealer``, ``user``,
``mask`` and ``gamma``, so any single trial can be replayed in isolation and
results do not depend on scheduling.
"""

from __future__ import annotations

import hashlib
import json
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import actors
from .adversary import STRATEGIES, get_strategy, make_view
from .csa import CsaContext, PirParams, build_csa, candidate_submatrices
from .decoder import DecodeError, consistency_check, decode

MODES = ("simulate", "verify-privacy", "golden")


@dataclass
class RunConfig:
    n: int = 9
    b: int = 2
    k: int = 1
    q: Optional[int] = None
    seed: int = 0
    strategy: str = "random_noise"
    byz_set: Optional[tuple[int, ...]] = None
    trials: int = 100
    mode: str = "simulate"
    fast: bool = False
    threads: int = 1
    alphas: Optional[tuple[int, ...]] = None
    fs: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.byz_set is not None:
            self.byz_set = tuple(sorted(int(s) for s in self.byz_set))
            if len(self.byz_set) > self.b:
                raise ValueError(f"byz_set {self.byz_set} has more than B={self.b} servers")
            if len(set(self.byz_set)) != len(self.byz_set) or any(not 1 <= s <= self.n for s in self.byz_set):
                raise ValueError(f"byz_set {self.byz_set} must hold distinct servers in 1..{self.n}")
        for name in ("alphas", "fs"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, tuple(int(v) for v in value))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.strategy != "all":
            get_strategy(self.strategy)
        if self.trials < 0 or self.threads < 1:
            raise ValueError("trials must be >= 0 and threads >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def params(self) -> PirParams:
        return PirParams.create(self.n, self.b, self.k, q=self.q, alphas=self.alphas, fs=self.fs)

    def strategies(self) -> list[str]:
        return sorted(STRATEGIES) if self.strategy == "all" else [self.strategy]


def derive_seed(seed: int, trial: int, tag: str) -> int:
    digest = hashlib.sha256(f"bspir:{seed}:{trial}:{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _rng(seed: int, trial: int, tag: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, trial, tag))


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    located: bool  # every server whose answer changed is in the decoder's estimate
    exact: bool  # estimate equals the coalition
    error: Optional[str] = None


@dataclass(frozen=True, eq=False)
class Retrieval:
    messages: np.ndarray
    theta: int
    byz_set: tuple[int, ...]
    honest: np.ndarray
    answers: np.ndarray

    @property
    def corrupted(self) -> set[int]:
        return {int(i) + 1 for i in np.nonzero(self.answers != self.honest)[0]}


def simulate_retrieval(
    params: PirParams, strategy: str, trial: int, seed: int, byz_set: Optional[Sequence[int]] = None
) -> Retrieval:
    """Dealer, user, servers and coalition for one seeded retrieval."""
    p = params
    strat = get_strategy(strategy)

    def rng(stream: str) -> np.random.Generator:
        return _rng(seed, trial, f"{strategy}/{stream}")

    w = actors.sample_messages(p, rng("messages"))
    theta = int(rng("theta").integers(1, p.k + 1))
    if byz_set is None:
        byz_set = sorted(int(s) + 1 for s in rng("coalition").choice(p.n, size=p.b, replace=False))
    byz_set = tuple(byz_set)
    dealer = actors.sample_dealer_randomness(p, rng("dealer"))
    user = actors.sample_user_randomness(p, rng("user"))
    secrets = actors.sample_mask_secrets(p, rng("mask"))
    gamma = p.field(rng("gamma").integers(0, p.q, size=strat.gamma_len(len(byz_set))))

    storages = actors.storage_tensor(p, w, dealer.z)
    queries = actors.query_tensor(p, theta, user.r)
    zhat = actors.mask_tensor(p, secrets.zprime)
    honest = actors.answer_tensor(storages, queries, zhat, p.q)
    answers = honest.copy()
    if byz_set:
        view = make_view(byz_set, storages, queries, zhat, gamma, p.q)
        answers[[s - 1 for s in byz_set]] = strat(view)
    return Retrieval(w, theta, byz_set, honest, answers)


def run_trial(
    ctx: CsaContext,
    strategy: str,
    trial: int,
    seed: int,
    byz_set: Optional[Sequence[int]] = None,
    fast: bool = False,
) -> TrialOutcome:
    r = simulate_retrieval(ctx.params, strategy, trial, seed, byz_set)
    try:
        result = decode(r.answers, ctx, fast=fast)
    except DecodeError as exc:
        return TrialOutcome(False, False, False, type(exc).__name__)
    success = bool(np.array_equal(result.message, r.messages[r.theta - 1]))
    return TrialOutcome(success, r.corrupted <= set(result.byz_estimate), result.byz_estimate == r.byz_set)


def _rate(retrieved: int, downloaded: int) -> Fraction:
    return Fraction(retrieved, downloaded) if downloaded else Fraction(0)


def _fraction_record(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


@dataclass
class TrialReport:
    params: dict
    seed: int
    trials: int = 0
    successes: int = 0
    byz_located: int = 0
    byz_exact: int = 0
    downloaded_symbols: int = 0
    retrieved_symbols: int = 0
    decode_errors: dict = field(default_factory=dict)
    per_strategy: dict = field(default_factory=dict)

    @property
    def rate(self) -> Fraction:
        return _rate(self.retrieved_symbols, self.downloaded_symbols)

    @property
    def passed(self) -> bool:
        return self.successes == self.trials

    def to_record(self) -> dict:
        out = asdict(self)
        out["rate"] = _fraction_record(self.rate)
        for entry in out["per_strategy"].values():
            entry["rate"] = _fraction_record(_rate(entry["retrieved_symbols"], entry["downloaded_symbols"]))
        return out


def run_trials(config: RunConfig) -> TrialReport:
    """Run ``config.trials`` retrievals for each selected strategy.

    A retrieval downloads one symbol per server (N in total) and, when
    decoding succeeds, yields the L requested symbols.
    """
    p = config.params()
    ctx = build_csa(p)
    ctx.decoder_tables  # build once before threads share the context
    report = TrialReport(params=p.as_dict(), seed=config.seed)
    errors: Counter = Counter()
    for name in config.strategies():

        def one(trial: int, name=name) -> TrialOutcome:
            return run_trial(ctx, name, trial, config.seed, config.byz_set, config.fast)

        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                outcomes = list(pool.map(one, range(config.trials)))
        else:
            outcomes = [one(t) for t in range(config.trials)]
        successes = sum(o.success for o in outcomes)
        entry = {
            "trials": len(outcomes),
            "successes": successes,
            "byz_located": sum(o.located for o in outcomes),
            "byz_exact": sum(o.exact for o in outcomes),
            "downloaded_symbols": len(outcomes) * p.n,
            "retrieved_symbols": successes * p.l,
        }
        report.per_strategy[name] = entry
        report.trials += entry["trials"]
        report.successes += successes
        report.byz_located += entry["byz_located"]
        report.byz_exact += entry["byz_exact"]
        report.downloaded_symbols += entry["downloaded_symbols"]
        report.retrieved_symbols += entry["retrieved_symbols"]
        errors.update(o.error for o in outcomes if o.error)
    report.decode_errors = dict(errors)
    return report


# -- worked example (N=9, B=2, q=11) ------------------------------------------

EXAMPLE_PARAMS = dict(n=9, b=2, k=1, q=11, alphas=tuple(range(1, 10)), fs=(10,))
EXAMPLE_INV_COLUMNS = {1: (9, 5, 6, 1, 10, 8, 3, 4, 7), 2: (5, 7, 3, 4, 3, 8, 1, 0, 4)}
EXAMPLE_PHI_23 = ((8, 10), (1, 9))
EXAMPLE_PSI_23 = ((0, 7), (4, 7))
EXAMPLE_PSI_23_INV = ((8, 3), (8, 0))


@dataclass
class GoldenRecord:
    params: dict
    checks: dict = field(default_factory=dict)
    mismatches: list = field(default_factory=list)
    coincidences: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and not self.mismatches

    def to_record(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _compare(record: GoldenRecord, name: str, got, expected) -> None:
    got = np.asarray(got)
    expected = np.asarray(expected)
    ok = got.shape == expected.shape and bool(np.array_equal(got, expected))
    record.checks[name] = ok
    if ok:
        return
    if got.shape != expected.shape:
        record.mismatches.append(f"{name}: shape {got.shape}, expected {expected.shape}")
        return
    for idx in zip(*np.nonzero(got != expected)):
        pos = ",".join(str(i + 1) for i in idx)
        record.mismatches.append(f"{name}[{pos}] = {got[idx]}, expected {expected[idx]}")


def run_golden(params: Optional[PirParams] = None) -> GoldenRecord:
    """Compare the implementation with the published N=9, B=2, q=11 example.

    ``params`` defaults to that example; passing perturbed points shows which
    entries move.
    """
    p = params or PirParams.create(**EXAMPLE_PARAMS)
    record = GoldenRecord(params=p.as_dict())
    if (p.n, p.b, p.l, p.q) != (9, 2, 1, 11):
        record.mismatches.append(f"(N, B, L, q) = {(p.n, p.b, p.l, p.q)}, expected (9, 2, 1, 11)")
        return record
    ctx = build_csa(p)
    f = p.field
    for col, expected in EXAMPLE_INV_COLUMNS.items():
        _compare(record, f"csa_inv_column_{col}", ctx.csa_inv[:, col - 1], expected)
    phi, psi = candidate_submatrices(ctx, (2, 3))
    _compare(record, "phi_23", phi, EXAMPLE_PHI_23)
    _compare(record, "psi_23", psi, EXAMPLE_PSI_23)
    try:
        psi_inv = f.mat_inv(psi)
    except ValueError as exc:
        record.checks["psi_23_inverse"] = False
        record.mismatches.append(f"psi_23_inverse: {exc}")
        return record
    _compare(record, "psi_23_inverse", psi_inv, EXAMPLE_PSI_23_INV)

    # every corruption on servers {1, 2}: the published wrong-candidate test
    syn = ctx.csa_inv[ctx.syndrome_rows][:, :2]
    product = f.matmul(phi, psi_inv)
    printed_form = ok_correct = ok_wrong = True
    for d1 in range(p.q):
        for d2 in range(p.q):
            y = f.matmul(syn, [d1, d2])
            # Phi Psi^-1 (4 d1, 7 d1 + 4 d2) = (7 d1 + 8 d2, d2)
            predicted = f.matmul(product, y[2:])
            printed_form &= bool(np.array_equal(predicted, f([7 * d1 + 8 * d2, d2])))
            matches = bool(np.array_equal(predicted, y[:2]))
            delta = consistency_check(ctx, (1, 2), y)
            ok_correct &= delta is not None and bool(np.array_equal(delta, [d1, d2]))
            wrong = consistency_check(ctx, (2, 3), y)
            if wrong is not None:
                record.coincidences.append([d1, d2])
                # a coincidence must explain the same corruption
                ok_wrong &= d1 == 0 and bool(np.array_equal(wrong, [d2, 0]))
            ok_wrong &= matches == (wrong is not None)
    record.checks["wrong_candidate_printed_form"] = printed_form
    record.checks["correct_candidate_recovers_delta"] = ok_correct
    record.checks["wrong_candidate_rejected_off_coincidences"] = ok_wrong
    return record


def emit_report(report, path=None) -> str:
    """Deterministic JSON (sorted keys); written to ``path`` or stdout."""
    record = report.to_record() if hasattr(report, "to_record") else report
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text
