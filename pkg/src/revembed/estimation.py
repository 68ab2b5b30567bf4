"""Generator estimation from discretely sampled trajectories.

Transitions are counted between consecutive observations, turned into the
maximum-likelihood transition matrix ``P_hat[i, j] = c_ij / v_i`` and fed to
the reversible embedding decision. A successful embedding ``H`` of
``P_hat`` gives the rate estimate ``Q_hat = H / T`` for sampling period
``T``.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .chain import DEFAULT_TOL, validate_stochastic
from .embedding import reversible_embedding
from .errors import UnvisitedState

__all__ = [
    "Trajectory",
    "TransitionCounts",
    "count_transitions",
    "mle_transition",
    "restrict_counts",
    "estimate_generator",
]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States observed at times ``0, T, 2T, ...`` (0-based indices)."""

    states: np.ndarray
    interval: float = 1.0
    n_states: int = None

    def __post_init__(self):
        states = np.array(self.states, dtype=np.int64)
        if states.ndim != 1 or states.size < 2:
            raise ValueError("a trajectory needs at least two observations")
        if states.min() < 0:
            raise ValueError("state indices must be nonnegative")
        n = self.n_states if self.n_states is not None else int(states.max()) + 1
        if states.max() >= n:
            raise ValueError(f"state {int(states.max())} outside [0, {n})")
        if not self.interval > 0:
            raise ValueError("sampling interval must be positive")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "n_states", n)
        object.__setattr__(self, "interval", float(self.interval))

    def __len__(self):
        return self.states.size


@dataclass(frozen=True, eq=False)
class TransitionCounts:
    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def visits(self):
        return self.counts.sum(axis=1)

    @property
    def n_states(self):
        return self.counts.shape[0]

    def __add__(self, other):
        if other.n_states != self.n_states:
            raise ValueError("cannot add counts over different state spaces")
        return TransitionCounts(self.counts + other.counts)


def count_transitions(traj):
    """Count consecutive pairs ``(Y_k, Y_{k+1})`` of a trajectory."""
    n = traj.n_states
    c = np.zeros((n, n), dtype=np.int64)
    np.add.at(c, (traj.states[:-1], traj.states[1:]), 1)
    return TransitionCounts(c)


def mle_transition(counts, pseudocount=0.0):
    """Row-normalized transition counts.

    A positive `pseudocount` is added to every count before normalizing.
    This is a smoothing option on top of the plain maximum-likelihood
    estimate and is off by default.

    Raises
    ------
    UnvisitedState
        For the first state with no outgoing transitions.
    """
    c = counts.counts.astype(float) + pseudocount
    visits = c.sum(axis=1)
    empty = np.nonzero(visits == 0)[0]
    if empty.size:
        raise UnvisitedState(int(empty[0]))
    return validate_stochastic(c / visits[:, None])


def restrict_counts(counts):
    """Drop states that are never left, repeatedly, until every remaining
    state has outgoing transitions inside the kept set.

    Returns the restricted counts and the kept original indices.
    """
    c = counts.counts
    keep = np.arange(c.shape[0])
    while True:
        sub = c[np.ix_(keep, keep)]
        visited = sub.sum(axis=1) > 0
        if visited.all():
            return TransitionCounts(sub), keep
        keep = keep[visited]


def estimate_generator(trajectories, tol=DEFAULT_TOL, restrict=False, pseudocount=0.0):
    """Estimate a reversible generator from one or more trajectories.

    Counts from several trajectories are summed. All trajectories must share
    the sampling interval and state-space size.

    Parameters
    ----------
    trajectories : Trajectory or sequence of Trajectory
    tol : float
    restrict : bool
        Drop unvisited states (see `restrict_counts`) instead of raising
        `UnvisitedState`. The mapping to original indices is recorded in
        ``report.state_map``.
    pseudocount : float

    Returns
    -------
    EmbeddingReport
        On success ``report.generator`` is the rate matrix ``H / T``.
    """
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("no trajectories given")
    T = trajectories[0].interval
    n = trajectories[0].n_states
    for traj in trajectories[1:]:
        if traj.interval != T or traj.n_states != n:
            raise ValueError("trajectories differ in sampling interval or state count")
    counts = sum((count_transitions(t) for t in trajectories[1:]), count_transitions(trajectories[0]))
    state_map = None
    if restrict:
        counts, keep = restrict_counts(counts)
        state_map = tuple(int(i) for i in keep)
    P_hat = mle_transition(counts, pseudocount)
    report = reversible_embedding(P_hat, tol)
    changes = dict(interval=T, state_map=state_map,
                   extra={**report.extra, "transition_matrix": P_hat.matrix})
    if report.generator is not None:
        changes["generator"] = report.generator.scaled(1.0 / T)
    return dataclasses.replace(report, **changes)
