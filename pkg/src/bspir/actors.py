"""Dealer, user and honest-server computations.

The ``*_tensor`` functions operate on numpy arrays with arbitrary leading
batch dimensions, so the same code serves a single retrieval and the
exhaustive oracle that evaluates every randomness draw at once.  The share
dataclasses wrap a single retrieval for callers that want per-server objects.

Array layouts (leading ``...`` = batch):

* messages ``W``: ``(..., K, L)``, row k is message k (0-based)
* storage noise ``Z`` and query noise ``R``: ``(..., L, B, K)``
* mask secrets ``Z'``: ``(..., 2B)``
* storage / query shares: ``(..., N, L, K)``; mask shares and answers: ``(..., N)``
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .csa import PirParams


@dataclass(frozen=True, eq=False)
class StorageShare:
    server: int
    blocks: np.ndarray  # (L, K)


@dataclass(frozen=True, eq=False)
class QueryShare:
    server: int
    blocks: np.ndarray  # (L, K)


@dataclass(frozen=True)
class MaskShare:
    server: int
    zhat: int


@dataclass(frozen=True, eq=False)
class MaskSecrets:
    zprime: np.ndarray  # (2B,)


@dataclass(frozen=True, eq=False)
class DealerRandomness:
    z: np.ndarray  # (L, B, K)


@dataclass(frozen=True, eq=False)
class UserRandomness:
    r: np.ndarray  # (L, B, K)


@dataclass(frozen=True, eq=False)
class _Powers:
    storage: np.ndarray  # (N, L, B): (f_l - alpha_n)^i, i = 1..B
    query: np.ndarray  # (N, L, B): (f_l - alpha_n)^(i-1), i = 1..B
    inv_diff: np.ndarray  # (N, L): (f_l - alpha_n)^-1
    mask: np.ndarray  # (N, 2B): alpha_n^(i-1), i = 1..2B


@lru_cache(maxsize=64)
def _powers(params: PirParams) -> _Powers:
    f = params.field
    q = params.q
    diff = [[(fl - a) % q for fl in params.fs] for a in params.alphas]
    storage = f([[[pow(d, i, q) for i in range(1, params.b + 1)] for d in row] for row in diff])
    query = f([[[pow(d, i, q) for i in range(params.b)] for d in row] for row in diff])
    inv_diff = f([[f.inv(d) for d in row] for row in diff])
    mask = f.vandermonde(params.alphas, 2 * params.b)
    shape = (params.n, params.l, params.b)
    return _Powers(
        storage.reshape(shape),
        query.reshape(shape),
        inv_diff.reshape(params.n, params.l),
        mask.reshape(params.n, 2 * params.b),
    )


def unit_vector(params: PirParams, theta: int) -> np.ndarray:
    if not 1 <= theta <= params.k:
        raise ValueError(f"theta={theta} outside 1..{params.k}")
    e = params.field.zeros(params.k)
    e[theta - 1] = 1
    return e


def storage_tensor(params: PirParams, w, z) -> np.ndarray:
    """``S[n, l] = W[:, l] + sum_i (f_l - alpha_n)^i Z[l, i]``."""
    w = np.asarray(w)
    z = np.asarray(z)
    if w.shape[-2:] != (params.k, params.l) or z.shape[-3:] != (params.l, params.b, params.k):
        raise ValueError(f"bad shapes W{w.shape} Z{z.shape} for {params}")
    noise = np.einsum("nli,...lik->...nlk", _powers(params).storage, z)
    return (np.swapaxes(w, -1, -2)[..., None, :, :] + noise) % params.q


def query_tensor(params: PirParams, theta: int, r) -> np.ndarray:
    """``Q[n, l] = (f_l - alpha_n)^-1 (e_theta + sum_i (f_l - alpha_n)^i R[l, i])``."""
    r = np.asarray(r)
    if r.shape[-3:] != (params.l, params.b, params.k):
        raise ValueError(f"bad shape R{r.shape} for {params}")
    pw = _powers(params)
    e = unit_vector(params, theta)
    signal = pw.inv_diff[:, :, None] * e
    noise = np.einsum("nli,...lik->...nlk", pw.query, r)
    return (signal + noise) % params.q


def mask_tensor(params: PirParams, zprime) -> np.ndarray:
    """``Zhat[n] = sum_i alpha_n^(i-1) Z'[i]``."""
    zprime = np.asarray(zprime)
    if zprime.shape[-1] != 2 * params.b:
        raise ValueError(f"expected {2 * params.b} mask secrets, got shape {zprime.shape}")
    return np.einsum("ni,...i->...n", _powers(params).mask, zprime) % params.q


def answer_tensor(storage, queries, zhat, q: int) -> np.ndarray:
    return ((storage * queries).sum(axis=(-2, -1)) + zhat) % q


def sample_messages(params: PirParams, rng: np.random.Generator) -> np.ndarray:
    return params.field(rng.integers(0, params.q, size=(params.k, params.l)))


def sample_dealer_randomness(params: PirParams, rng: np.random.Generator) -> DealerRandomness:
    return DealerRandomness(params.field(rng.integers(0, params.q, size=(params.l, params.b, params.k))))


def sample_user_randomness(params: PirParams, rng: np.random.Generator) -> UserRandomness:
    return UserRandomness(params.field(rng.integers(0, params.q, size=(params.l, params.b, params.k))))


def sample_mask_secrets(params: PirParams, rng: np.random.Generator) -> MaskSecrets:
    return MaskSecrets(params.field(rng.integers(0, params.q, size=2 * params.b)))


def encode_storage(w, params: PirParams, dealer: DealerRandomness) -> list[StorageShare]:
    s = storage_tensor(params, w, dealer.z)
    return [StorageShare(n + 1, s[n]) for n in range(params.n)]


def generate_queries(theta: int, params: PirParams, user: UserRandomness) -> list[QueryShare]:
    qs = query_tensor(params, theta, user.r)
    return [QueryShare(n + 1, qs[n]) for n in range(params.n)]


def mask_shares(params: PirParams, secrets: MaskSecrets) -> list[MaskShare]:
    zhat = mask_tensor(params, secrets.zprime)
    return [MaskShare(n + 1, int(zhat[n])) for n in range(params.n)]


def deal_masks(params: PirParams, rng: np.random.Generator) -> tuple[MaskSecrets, list[MaskShare]]:
    """Sample fresh mask secrets and the per-server shares.

    Only the shares leave the dealer; neither the user nor the servers see
    the secrets themselves.
    """
    secrets = sample_mask_secrets(params, rng)
    return secrets, mask_shares(params, secrets)


def honest_answer(storage: StorageShare, query: QueryShare, mask: MaskShare, q: int) -> int:
    if not storage.server == query.server == mask.server:
        raise ValueError(
            f"server mismatch: storage {storage.server}, query {query.server}, mask {mask.server}"
        )
    if storage.blocks.shape != query.blocks.shape:
        raise ValueError(f"shape mismatch: {storage.blocks.shape} vs {query.blocks.shape}")
    return int(answer_tensor(storage.blocks, query.blocks, mask.zhat, q))
