"""Seeded samplers for discrete- and continuous-time chains.

Randomness comes from numpy's PCG64 generator. Each trajectory draws from
its own stream, seeded by ``SeedSequence(seed, spawn_key=(index,))``, so
trajectories with different indices are independent and a given
``(inputs, seed, index)`` always reproduces the same output.
"""

import bisect
from dataclasses import dataclass

import numpy as np

from .estimation import Trajectory

__all__ = [
    "make_rng",
    "JumpPath",
    "simulate_dtmc",
    "simulate_ctmc",
    "sample_skeleton",
    "random_reversible_generator",
    "random_reversible_stochastic",
]


def make_rng(seed, index=0):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Right-continuous jump path: ``states[k]`` is occupied from
    ``times[k]`` until the next jump."""

    times: np.ndarray
    states: np.ndarray
    initial_state: int
    horizon: float

    def state_at(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        full = np.concatenate(([self.initial_state], self.states))
        return full[idx]


def _cumulative_rows(P):
    rows = []
    for row in np.asarray(P, dtype=float):
        cdf = np.cumsum(row)
        cdf[-1] = max(cdf[-1], 1.0)
        rows.append(cdf.tolist())
    return rows


def simulate_dtmc(P, steps, initial=0, seed=0, index=0):
    """Sample ``Y_0, ..., Y_steps`` by inverse-CDF lookup on each row."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    cdf = _cumulative_rows(P)
    n = len(cdf)
    u = make_rng(seed, index).random(steps).tolist()
    states = [int(initial)]
    state = int(initial)
    for x in u:
        state = min(bisect.bisect_right(cdf[state], x), n - 1)
        states.append(state)
    return Trajectory(np.array(states), 1.0, n)


def simulate_ctmc(Q, horizon, initial=0, seed=0, index=0):
    """Gillespie simulation of a generator up to `horizon`.

    Holding times at ``i`` are exponential with rate ``-q_ii``; the next
    state is ``j != i`` with probability ``q_ij / -q_ii``. A state with
    ``q_ii == 0`` is absorbing.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    rates = -np.diag(Q)
    jump_cdf = []
    for i in range(n):
        row = np.clip(Q[i], 0.0, None)
        row[i] = 0.0
        jump_cdf.append(np.cumsum(row / rates[i]).tolist() if rates[i] > 0 else None)
    rng = make_rng(seed, index)
    times, states = [], []
    t = 0.0
    state = int(initial)
    batch = 4096
    while True:
        holds = rng.standard_exponential(batch).tolist()
        picks = rng.random(batch).tolist()
        for hold, u in zip(holds, picks):
            if rates[state] <= 0:
                return _path(times, states, initial, horizon)
            t += hold / rates[state]
            if t >= horizon:
                return _path(times, states, initial, horizon)
            cdf = jump_cdf[state]
            nxt = min(bisect.bisect_right(cdf, u * cdf[-1]), n - 1)
            while nxt == state or Q[state, nxt] <= 0:
                nxt = (nxt - 1) % n
            state = nxt
            times.append(t)
            states.append(state)


def _path(times, states, initial, horizon):
    return JumpPath(np.array(times, dtype=float), np.array(states, dtype=np.int64),
                    int(initial), float(horizon))


def sample_skeleton(path, T, n_states=None):
    """Observe a jump path at ``0, T, 2T, ...`` up to its horizon."""
    if not T > 0 or T > path.horizon:
        raise ValueError("interval must satisfy 0 < T <= horizon")
    count = int(np.floor(path.horizon / T * (1 + 1e-12)))
    grid = np.arange(count + 1) * T
    observed = path.state_at(grid)
    if n_states is None:
        n_states = int(max(observed.max(), path.states.max() if path.states.size else 0)) + 1
    return Trajectory(observed, T, n_states)


def random_reversible_generator(n, rng, scale=1.0, zero_fraction=0.0):
    """Random reversible generator with a random positive stationary law.

    Rates are ``q_ij = s_ij * mu_j`` for a symmetric positive ``s``, which
    satisfies detailed balance with respect to ``mu``. A `zero_fraction` of
    the symmetric pairs are set to zero while keeping a spanning path so the
    chain stays irreducible.

    Returns ``(Q, mu)``.
    """
    w = rng.uniform(0.2, 1.0, size=n)
    mu = w / w.sum()
    s = rng.uniform(0.05, 1.0, size=(n, n))
    s = np.triu(s, 1)
    if zero_fraction > 0:
        drop = rng.random((n, n)) < zero_fraction
        s[drop] = 0.0
        order = rng.permutation(n)
        for a, b in zip(order[:-1], order[1:]):
            i, j = min(a, b), max(a, b)
            if s[i, j] == 0.0:
                s[i, j] = rng.uniform(0.05, 1.0)
    s = s + s.T
    Q = scale * s * mu[None, :]
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q, mu


def random_reversible_stochastic(n, rng):
    """Random reversible stochastic matrix from a symmetric positive flux
    matrix ``F``: ``p_ij = F_ij / sum_j F_ij``. Not necessarily embeddable."""
    F = rng.uniform(0.0, 1.0, size=(n, n))
    F = F + F.T
    return F / F.sum(axis=1, keepdims=True)
