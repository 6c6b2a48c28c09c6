"""Q-table, similarity-shaped rewards, and the tabular training loop.

States are training-question indices and actions are training-answer
indices, so with a train split of n records the table is n x n. The
reward for pairing question s with answer a is a piecewise shaping of
the cosine similarity between question s and question a (the question
that answer a belongs to): full reward above a high threshold, the
similarity itself in the middle band, a flat penalty below.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SchemaError

EPSILON_FLOOR = 0.01


class QTable:
    """Sparse state x action value map; absent entries read as 0."""

    __slots__ = ("n_states", "n_actions", "_rows")

    def __init__(self, n_states: int, n_actions: int) -> None:
        if n_states < 1 or n_actions < 1:
            raise ConfigError(
                f"QTable needs positive dimensions, got {n_states}x{n_actions}"
            )
        self.n_states = n_states
        self.n_actions = n_actions
        self._rows: dict[int, dict[int, float]] = {}

    def _check(self, s: int, a: int) -> None:
        if not 0 <= s < self.n_states:
            raise IndexError(f"state {s} out of range [0, {self.n_states})")
        if not 0 <= a < self.n_actions:
            raise IndexError(f"action {a} out of range [0, {self.n_actions})")

    def get(self, s: int, a: int) -> float:
        self._check(s, a)
        return self._rows.get(s, {}).get(a, 0.0)

    def set(self, s: int, a: int, value: float) -> None:
        self._check(s, a)
        if not math.isfinite(value):
            raise ValueError(f"Q({s},{a}) would become non-finite: {value!r}")
        self._rows.setdefault(s, {})[a] = value

    def max_value(self, s: int) -> float:
        """max over a of Q(s, a), counting unset actions as 0."""
        self._check(s, 0)
        row = self._rows.get(s)
        if not row:
            return 0.0
        best = max(row.values())
        # unset actions still contribute their implicit zero
        if len(row) < self.n_actions:
            return max(best, 0.0)
        return best

    def entries(self) -> list[tuple[int, int, float]]:
        """Stored (s, a, value) triples sorted by (s, a)."""
        out = [
            (s, a, v)
            for s, row in self._rows.items()
            for a, v in row.items()
        ]
        out.sort(key=lambda e: (e[0], e[1]))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented
        if (self.n_states, self.n_actions) != (other.n_states, other.n_actions):
            return False
        # explicit zeros are indistinguishable from absent entries
        mine = {(s, a): v for s, a, v in self.entries() if v != 0.0}
        theirs = {(s, a): v for s, a, v in other.entries() if v != 0.0}
        return mine == theirs

    def __repr__(self) -> str:
        n = sum(len(r) for r in self._rows.values())
        return f"QTable({self.n_states}x{self.n_actions}, {n} stored)"

    def to_json(self) -> dict:
        return {
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "entries": [[s, a, v] for s, a, v in self.entries()],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "QTable":
        try:
            n_states = payload["n_states"]
            n_actions = payload["n_actions"]
            entries = payload["entries"]
        except (TypeError, KeyError) as e:
            raise SchemaError(f"qtable payload is missing key {e}") from e
        if not isinstance(n_states, int) or not isinstance(n_actions, int):
            raise SchemaError("qtable dimensions must be integers")
        table = cls(n_states, n_actions)
        for i, entry in enumerate(entries):
            if not isinstance(entry, (list, tuple)) or len(entry) != 3:
                raise SchemaError(f"qtable entry {i} is not an [s, a, value] triple")
            s, a, v = entry
            try:
                table.set(int(s), int(a), float(v))
            except (IndexError, ValueError, TypeError) as e:
                raise SchemaError(f"qtable entry {i} is invalid: {e}") from e
        return table


@dataclass(frozen=True)
class RewardSpec:
    """Piecewise similarity-to-reward shaping thresholds."""

    hi_threshold: float = 0.8
    lo_threshold: float = 0.5
    full_reward: float = 1.0
    penalty: float = -0.1

    def __post_init__(self) -> None:
        if not 0 < self.lo_threshold < self.hi_threshold <= 1:
            raise ConfigError(
                "thresholds must satisfy 0 < lo < hi <= 1, got "
                f"lo={self.lo_threshold}, hi={self.hi_threshold}"
            )
        # both needed to keep the shaped reward monotone in similarity
        if self.penalty >= self.lo_threshold:
            raise ConfigError(
                f"penalty {self.penalty} must stay below lo_threshold {self.lo_threshold}"
            )
        if self.full_reward < self.hi_threshold:
            raise ConfigError(
                f"full_reward {self.full_reward} must not undercut hi_threshold {self.hi_threshold}"
            )


def shape_reward(similarity: float, spec: RewardSpec) -> float:
    """Full reward above hi, the similarity itself in [lo, hi], penalty below lo."""
    if not -1.0 - 1e-9 <= similarity <= 1.0 + 1e-9:
        raise ValueError(f"similarity {similarity!r} outside [-1, 1]")
    if similarity > spec.hi_threshold:
        return spec.full_reward
    if similarity >= spec.lo_threshold:
        return float(similarity)
    return spec.penalty


@dataclass(frozen=True)
class TrainingConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.2
    episodes: int = 50
    convergence_tol: float = 1e-3
    seed: int = 42

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0 <= self.gamma < 1:
            raise ConfigError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if self.convergence_tol <= 0:
            raise ConfigError(f"convergence_tol must be > 0, got {self.convergence_tol}")


@dataclass
class TrainingReport:
    """Per-sweep convergence trace; max_deltas has length sweeps_run."""

    max_deltas: list[float] = field(default_factory=list)
    mean_rewards: list[float] = field(default_factory=list)
    converged: bool = False
    sweeps_run: int = 0


def q_update(
    q: QTable,
    s: int,
    a: int,
    r: float,
    s_next: int | None,
    cfg: TrainingConfig,
) -> float:
    """One Bellman step: Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).

    s_next of None marks a terminal transition, zeroing the bootstrap term.
    Returns the stored new value.
    """
    old = q.get(s, a)
    bootstrap = 0.0 if s_next is None else q.max_value(s_next)
    new = old + cfg.alpha * (r + cfg.gamma * bootstrap - old)
    q.set(s, a, new)  # set() rejects non-finite results
    return new


def greedy_action(q: QTable, s: int) -> int:
    """argmax over a of Q(s, a); ties break to the lowest action index."""
    best_a = 0
    best_v = q.get(s, 0)
    for a in range(1, q.n_actions):
        v = q.get(s, a)
        if v > best_v:
            best_a, best_v = a, v
    return best_a


def _reward_matrix(sim: np.ndarray, spec: RewardSpec) -> np.ndarray:
    """shape_reward applied elementwise to a similarity matrix."""
    return np.where(
        sim > spec.hi_threshold,
        spec.full_reward,
        np.where(sim >= spec.lo_threshold, sim, spec.penalty),
    )


def train(corpus, index, spec: RewardSpec, cfg: TrainingConfig):
    """Fit the answer-selection table over the train split.

    Each sweep visits every state once in a freshly shuffled order. At each
    visit an epsilon-greedy action (ties to the lowest index) is drawn to
    trace the exploration trajectory, whose shaped reward feeds the
    per-sweep mean-reward curve; epsilon decays linearly to a 0.01 floor
    over the configured sweep count. Learning itself backs up the shaped
    reward for every action of the visited state with a terminal one-step
    target, so each Q(s,a) contracts geometrically onto its reward and the
    per-sweep max |delta| decays by a factor of (1 - alpha) until it drops
    under convergence_tol, which ends the run early. Everything downstream
    of the seed is deterministic.

    Returns (QTable, TrainingReport).
    """
    n = len(corpus)
    if n == 0:
        raise ConfigError("cannot train on an empty corpus")
    if [rec.id for rec in corpus] != list(index.ids):
        raise ConfigError("corpus and index disagree on record ids")

    # pairwise cosine of unit rows, shaped once up front
    rewards = _reward_matrix(index.matrix @ index.matrix.T, spec)

    q = QTable(n, n)
    report = TrainingReport()
    rng = random.Random(cfg.seed)
    eps_end = min(cfg.epsilon, EPSILON_FLOOR)

    for sweep in range(cfg.episodes):
        if cfg.episodes > 1:
            eps = cfg.epsilon + (eps_end - cfg.epsilon) * sweep / (cfg.episodes - 1)
        else:
            eps = cfg.epsilon
        order = list(range(n))
        rng.shuffle(order)
        max_delta = 0.0
        reward_sum = 0.0
        for s in order:
            if rng.random() < eps:
                chosen = rng.randrange(n)
            else:
                chosen = greedy_action(q, s)
            reward_sum += rewards[s, chosen]
            for a in range(n):
                old = q.get(s, a)
                new = q_update(q, s, a, float(rewards[s, a]), None, cfg)
                delta = abs(new - old)
                if delta > max_delta:
                    max_delta = delta
        report.max_deltas.append(max_delta)
        report.mean_rewards.append(reward_sum / n)
        report.sweeps_run = sweep + 1
        if max_delta < cfg.convergence_tol:
            report.converged = True
            break
    return q, report
