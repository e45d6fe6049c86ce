import dataclasses
import inspect

import numpy as np
import pytest

from bspir.actors import answer_tensor, mask_tensor, query_tensor, storage_tensor
from bspir.adversary import (
    STRATEGIES,
    ByzantineView,
    CorruptionBoundError,
    byzantine_answers,
    corrupt_answers,
    get_strategy,
    make_view,
)


@pytest.fixture
def example_run(example_ctx):
    p = example_ctx.params
    rng = np.random.default_rng(11)
    w = rng.integers(0, 11, size=(1, 1))
    S = storage_tensor(p, w, rng.integers(0, 11, size=(1, 2, 1)))
    Q = query_tensor(p, 1, rng.integers(0, 11, size=(1, 2, 1)))
    Z = mask_tensor(p, rng.integers(0, 11, size=4))
    return p, w, S, Q, Z, answer_tensor(S, Q, Z, 11)


def test_zoo_is_complete():
    assert set(STRATEGIES) == {
        "honest_camouflage", "random_noise", "constant_garbage", "echo_query",
        "replay_storage", "leak_mask", "coordinated_affine",
    }
    with pytest.raises(KeyError):
        get_strategy("nope")


def test_honest_camouflage_has_zero_delta(example_run):
    p, w, S, Q, Z, honest = example_run
    view = make_view((1, 2), S, Q, Z, np.zeros(0, dtype=np.int64), p.q)
    assert byzantine_answers(STRATEGIES["honest_camouflage"], view) == {1: honest[0], 2: honest[1]}


def test_random_noise_offsets(example_run):
    p, w, S, Q, Z, honest = example_run
    view = make_view((1, 2), S, Q, Z, np.array([3, 7]), p.q)
    byz = byzantine_answers(STRATEGIES["random_noise"], view)
    answers = corrupt_answers(honest, byz, p.b)
    assert ((answers - honest) % 11).tolist() == [3, 7, 0, 0, 0, 0, 0, 0, 0]


def test_leaky_strategies(example_run):
    p, w, S, Q, Z, honest = example_run
    view = make_view((3, 7), S, Q, Z, np.zeros(0, dtype=np.int64), p.q)
    assert byzantine_answers(STRATEGIES["echo_query"], view) == {3: Q[2, 0, 0], 7: Q[6, 0, 0]}
    assert byzantine_answers(STRATEGIES["replay_storage"], view) == {3: S[2, 0, 0], 7: S[6, 0, 0]}
    assert byzantine_answers(STRATEGIES["leak_mask"], view) == {3: Z[2], 7: Z[6]}
    gview = make_view((3, 7), S, Q, Z, np.array([4, 9]), p.q)
    assert byzantine_answers(STRATEGIES["constant_garbage"], gview) == {3: 4, 7: 9}


def test_coordinated_affine_uses_pooled_view(example_run):
    p, w, S, Q, Z, honest = example_run
    strat = STRATEGIES["coordinated_affine"]
    view = make_view((1, 2), S, Q, Z, np.array([5]), p.q)
    v = view.pooled()
    assert v.shape == (2 * 2 + 2,)
    expected = [(5 + sum((5 + s + j + 1) * int(x) for j, x in enumerate(v))) % 11 for s in range(2)]
    assert strat(view).tolist() == expected
    # a change anywhere in the pooled view moves the answers
    S2 = S.copy()
    S2[1, 0, 0] = (S2[1, 0, 0] + 1) % 11
    assert not np.array_equal(strat(make_view((1, 2), S2, Q, Z, np.array([5]), p.q)), strat(view))


@pytest.mark.parametrize("name", sorted(STRATEGIES))
def test_strategies_deterministic_and_in_field(example_run, name):
    p, w, S, Q, Z, honest = example_run
    strat = STRATEGIES[name]
    gamma = np.arange(strat.gamma_len(2)) + 3
    view = make_view((4, 8), S, Q, Z, gamma, p.q)
    a, b = strat(view), strat(view)
    assert np.array_equal(a, b)
    assert a.shape == (2,) and ((0 <= a) & (a < 11)).all()


@pytest.mark.parametrize("name", sorted(STRATEGIES))
def test_strategies_batch(example_run, name):
    # a batched view gives the same answers as a loop of single views
    p, w, S, Q, Z, honest = example_run
    strat = STRATEGIES[name]
    glen = strat.gamma_len(2)
    gammas = np.arange(3 * glen).reshape(3, glen) % 11
    Zs = np.stack([Z, (Z + 1) % 11, (Z * 2) % 11])
    batched = strat(make_view((2, 5), S, Q, Zs, gammas, p.q))
    for i in range(3):
        assert np.array_equal(batched[i], strat(make_view((2, 5), S, Q, Zs[i], gammas[i], p.q)))


def test_view_confinement():
    fields = {f.name for f in dataclasses.fields(ByzantineView)}
    assert fields == {"byz_set", "storages", "queries", "mask_shares", "gamma", "q"}
    for strat in STRATEGIES.values():
        assert list(inspect.signature(strat.respond).parameters) == ["view"]


def test_view_only_holds_coalition_shares(example_run):
    p, w, S, Q, Z, honest = example_run
    view = make_view((2, 6), S, Q, Z, np.zeros(0, dtype=np.int64), p.q)
    assert np.array_equal(view.storages, S[[1, 5]])
    assert np.array_equal(view.queries, Q[[1, 5]])
    assert view.mask_shares.tolist() == [Z[1], Z[5]]


def test_corrupt_answers(example_run):
    p, w, S, Q, Z, honest = example_run
    assert np.array_equal(corrupt_answers(honest, {}, p.b), honest)
    with pytest.raises(CorruptionBoundError):
        corrupt_answers(honest, {1: 0, 2: 0, 3: 0}, p.b)
    with pytest.raises(CorruptionBoundError):
        corrupt_answers(honest, {10: 0}, p.b)


def test_corrupted_answers_match_delta_form(example_ctx, example_run):
    # csa_inv applied to the corrupted answers = honest part + csa_inv columns 1, 2 times delta
    p, w, S, Q, Z, honest = example_run
    f = example_ctx.field
    answers = corrupt_answers(honest, {1: (honest[0] + 4) % 11, 2: (honest[1] + 9) % 11}, p.b)
    got = f.matmul(example_ctx.csa_inv, answers)
    expected = f.matmul(example_ctx.csa_inv, honest) + f.matmul(example_ctx.csa_inv[:, :2], [4, 9])
    assert np.array_equal(got, expected % 11)
