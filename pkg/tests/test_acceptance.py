"""Acceptance criteria, one test each.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section at the end of the output for one PASS/FAIL line per criterion.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from bspir.cli import main
from bspir.csa import PirParams, build_csa, candidate_submatrices
from bspir.decoder import consistency_check, decode
from bspir.harness import EXAMPLE_PARAMS, RunConfig, run_golden, run_trials, simulate_retrieval
from bspir.oracle import check_query_privacy, check_storage_security, check_symmetric_privacy

TINY = dict(n=5, b=1, k=2, q=7)


def _elapsed(start):
    return time.perf_counter() - start


@pytest.mark.acceptance(1, "worked example reproduced exactly")
def test_golden_reproduction():
    start = time.perf_counter()
    ctx = build_csa(PirParams.create(**EXAMPLE_PARAMS))
    f = ctx.field
    assert ctx.csa_inv[:, 0].tolist() == [9, 5, 6, 1, 10, 8, 3, 4, 7]
    assert ctx.csa_inv[:, 1].tolist() == [5, 7, 3, 4, 3, 8, 1, 0, 4]
    phi, psi = candidate_submatrices(ctx, (2, 3))
    assert phi.tolist() == [[8, 10], [1, 9]]
    assert psi.tolist() == [[0, 7], [4, 7]]
    assert f.mat_inv(psi).tolist() == [[8, 3], [8, 0]]
    assert run_golden().passed
    assert _elapsed(start) < 1.0


@pytest.mark.acceptance(2, "candidate discrimination over all 121 corruptions")
def test_candidate_discrimination():
    ctx = build_csa(PirParams.create(**EXAMPLE_PARAMS))
    f = ctx.field
    rng = np.random.default_rng(2)
    coincidences = []
    for d1, d2 in itertools.product(range(11), repeat=2):
        x = np.concatenate([rng.integers(0, 11, size=5), np.zeros(4, dtype=np.int64)])
        answers = f.matmul(ctx.csa, x)
        answers[:2] = (answers[:2] + [d1, d2]) % 11
        a_hat = f.matmul(ctx.csa_inv, answers)
        y = a_hat[ctx.syndrome_rows]
        right = consistency_check(ctx, (1, 2), y)
        assert right is not None and right.tolist() == [d1, d2]
        wrong = consistency_check(ctx, (2, 3), y)
        if wrong is not None:
            coincidences.append((d1, d2))
            msg_right = (a_hat[0] - f.matmul(ctx.csa_inv[:1, :2], right)[0]) % 11
            msg_wrong = (a_hat[0] - f.matmul(ctx.csa_inv[:1, 1:3], wrong)[0]) % 11
            assert msg_right == msg_wrong == x[0]
        assert decode(answers, ctx).message.tolist() == [x[0]]  # raises on ambiguity
    # the coincidence set is a subspace of dimension at most one
    pts = set(coincidences)
    assert len(pts) <= 11
    assert all(((a + c) % 11, (b + d) % 11) in pts for (a, b), (c, d) in itertools.product(pts, repeat=2))
    assert all(((s * a) % 11, (s * b) % 11) in pts for (a, b) in pts for s in range(11))
    print(f"\ncoincidences ({len(pts)}): {sorted(pts)}")


@pytest.mark.acceptance(3, "end-to-end decoding 100% for every strategy")
def test_end_to_end_correctness():
    start = time.perf_counter()
    for n, b in [(5, 1), (9, 2), (13, 3)]:
        report = run_trials(RunConfig(n=n, b=b, strategy="all", trials=1000, seed=3))
        for name, entry in report.per_strategy.items():
            assert entry["successes"] == entry["trials"] == 1000, (n, b, name)
        assert report.decode_errors == {}
    assert _elapsed(start) < 60.0


@pytest.mark.acceptance(4, "rate (N-4B)/N exactly")
def test_rate():
    for n, b in [(5, 1), (9, 2), (13, 3)]:
        report = run_trials(RunConfig(n=n, b=b, strategy="all", trials=100, seed=4))
        assert report.passed
        assert report.downloaded_symbols == report.trials * n
        assert report.retrieved_symbols == report.trials * (n - 4 * b)
        assert report.rate == Fraction(n - 4 * b, n)
        assert report.to_record()["rate"] == {"num": report.rate.numerator, "den": report.rate.denominator}
    assert run_trials(RunConfig(n=9, b=2, trials=10)).rate == Fraction(1, 9)


@pytest.mark.acceptance(5, "exact query privacy")
def test_query_privacy():
    start = time.perf_counter()
    r = check_query_privacy(PirParams.create(**TINY))
    assert r.exact and r.tv == 0
    assert len(r.detail["per_set_tv"]) == 5 and set(r.detail["per_set_tv"].values()) == {"0"}
    assert _elapsed(start) < 1.0


@pytest.mark.acceptance(6, "exact storage security")
def test_storage_security():
    start = time.perf_counter()
    r = check_storage_security(PirParams.create(**TINY))
    assert r.exact and r.tv == 0
    assert len(r.detail["per_set_tv"]) == 5
    assert _elapsed(start) < 10.0


@pytest.mark.acceptance(7, "exact symmetric privacy")
def test_symmetric_privacy():
    start = time.perf_counter()
    p = PirParams.create(**TINY)
    for name in ["honest_camouflage", "leak_mask", "echo_query", "replay_storage", "coordinated_affine"]:
        r = check_symmetric_privacy(p, name)
        print(f"\n{r.summary()} strategy={name}")
        assert r.exact and r.tv == 0, name
        assert len(r.detail["per_set_tv"]) == 5
    assert _elapsed(start) < 600.0


@pytest.mark.acceptance(8, "mutations are detected")
def test_mutation_sensitivity():
    p = PirParams.create(**TINY)
    mask = [check_symmetric_privacy(p, name, mutation="no_mask") for name in ("replay_storage", "coordinated_affine")]
    query = check_query_privacy(p, mutation="no_query_noise")
    storage = check_storage_security(p, mutation="no_storage_noise")
    for r in mask + [query, storage]:
        print(f"\n{r.summary()}")
        assert r.tv > 0 and r.passed is False


@pytest.mark.acceptance(9, "zero syndrome in 10^4 honest runs")
def test_zero_syndrome():
    p = PirParams.create(9, 2)
    ctx = build_csa(p)
    honest = np.stack([simulate_retrieval(p, "honest_camouflage", t, 9).answers for t in range(10_000)])
    a_hat = honest.dot(ctx.csa_inv.T) % p.q
    assert not a_hat[:, p.l + 2 * p.b :].any()


@pytest.mark.acceptance(10, "byte-identical reports across thread counts")
def test_determinism(tmp_path):
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"t{threads}.json"
        assert main(["simulate", "--seed", "42", "--trials", "1000", "--threads", str(threads),
                     "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
