"""Byzantine coalition model.

A coalition pools its members' storage, queries and mask shares, plus a
shared coordination stream ``gamma``.  A strategy maps that pooled view to one
answer per member and sees nothing else: no messages, mask secrets, honest
servers' shares or the requested index.

View arrays carry arbitrary leading batch dimensions (see ``actors``); a
strategy returns answers broadcast over those dimensions with a trailing axis
of coalition size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .actors import answer_tensor


class CorruptionBoundError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ByzantineView:
    byz_set: tuple[int, ...]
    storages: np.ndarray  # (..., |G|, L, K)
    queries: np.ndarray  # (..., |G|, L, K)
    mask_shares: np.ndarray  # (..., |G|)
    gamma: np.ndarray  # (..., gamma_len)
    q: int

    @property
    def size(self) -> int:
        return len(self.byz_set)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return np.broadcast_shapes(
            self.storages.shape[:-3], self.queries.shape[:-3], self.mask_shares.shape[:-1], self.gamma.shape[:-1]
        )

    def pooled(self) -> np.ndarray:
        """Every scalar in the view except gamma, flattened on the last axis."""
        s = self.storages
        batch = np.broadcast_shapes(s.shape[:-3], self.queries.shape[:-3], self.mask_shares.shape[:-1])
        parts = [
            np.broadcast_to(s, batch + s.shape[-3:]).reshape(batch + (-1,)),
            np.broadcast_to(self.queries, batch + self.queries.shape[-3:]).reshape(batch + (-1,)),
            np.broadcast_to(self.mask_shares, batch + self.mask_shares.shape[-1:]),
        ]
        return np.concatenate(parts, axis=-1)


@dataclass(frozen=True)
class Strategy:
    name: str
    respond: Callable[[ByzantineView], np.ndarray]
    gamma_per_server: int = 0
    gamma_shared: int = 0
    description: str = ""

    def gamma_len(self, coalition_size: int) -> int:
        return self.gamma_per_server * coalition_size + self.gamma_shared

    def __call__(self, view: ByzantineView) -> np.ndarray:
        out = np.asarray(self.respond(view)) % view.q
        return np.broadcast_to(out, view.batch_shape + (view.size,))


def _honest(view: ByzantineView) -> np.ndarray:
    return answer_tensor(view.storages, view.queries, view.mask_shares, view.q)


def _random_noise(view: ByzantineView) -> np.ndarray:
    return _honest(view) + view.gamma[..., : view.size]


def _constant_garbage(view: ByzantineView) -> np.ndarray:
    return view.gamma[..., : view.size]


def _echo_query(view: ByzantineView) -> np.ndarray:
    return view.queries[..., 0, 0]


def _replay_storage(view: ByzantineView) -> np.ndarray:
    return view.storages[..., 0, 0]


def _leak_mask(view: ByzantineView) -> np.ndarray:
    return view.mask_shares


def _coordinated_affine(view: ByzantineView) -> np.ndarray:
    # member s answers key + sum_j (key + s + j + 1) v_j over the pooled view v
    v = view.pooled()
    key = view.gamma[..., 0]
    total = v.sum(axis=-1) % view.q
    weighted = v.dot(np.arange(1, v.shape[-1] + 1)) % view.q
    members = np.arange(view.size)
    out = (key * (1 + total) + weighted)[..., None] + members * total[..., None]
    return out


STRATEGIES: dict[str, Strategy] = {
    s.name: s
    for s in [
        Strategy("honest_camouflage", _honest, description="answer honestly"),
        Strategy("random_noise", _random_noise, gamma_per_server=1, description="honest answer plus a gamma offset"),
        Strategy("constant_garbage", _constant_garbage, gamma_per_server=1, description="gamma, ignoring the view"),
        Strategy("echo_query", _echo_query, description="first coordinate of own query block 1"),
        Strategy("replay_storage", _replay_storage, description="first coordinate of own storage block 1"),
        Strategy("leak_mask", _leak_mask, description="own mask share"),
        Strategy(
            "coordinated_affine",
            _coordinated_affine,
            gamma_shared=1,
            description="gamma-keyed affine function of the whole pooled view",
        ),
    ]
}


def get_strategy(name: str) -> Strategy:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise KeyError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None


def make_view(byz_set: Sequence[int], storages, queries, zhat, gamma, q: int) -> ByzantineView:
    """Slice a coalition's view out of full ``(..., N, ...)`` share tensors."""
    idx = [s - 1 for s in byz_set]
    return ByzantineView(
        tuple(byz_set),
        np.asarray(storages)[..., idx, :, :],
        np.asarray(queries)[..., idx, :, :],
        np.asarray(zhat)[..., idx],
        np.asarray(gamma),
        q,
    )


def byzantine_answers(strategy: Strategy, view: ByzantineView) -> dict[int, int]:
    out = strategy(view)
    if out.ndim != 1:
        raise ValueError("byzantine_answers expects an unbatched view")
    return {s: int(a) for s, a in zip(view.byz_set, out)}


def corrupt_answers(honest, byz: Mapping[int, int], b: int) -> np.ndarray:
    """Replace honest answers at the Byzantine positions (1-based keys)."""
    if len(byz) > b:
        raise CorruptionBoundError(f"{len(byz)} corrupted positions exceeds B={b}")
    out = np.array(honest, copy=True)
    for server, value in byz.items():
        if not 1 <= server <= len(out):
            raise CorruptionBoundError(f"server {server} outside 1..{len(out)}")
        out[server - 1] = value
    return out
