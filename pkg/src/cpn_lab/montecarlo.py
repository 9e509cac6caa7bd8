"""Monte Carlo simulation of the adaptive receiver walking a strategy tree.

Randomness comes from SplitMix64 used as a counter-based generator. The
n-th output of a SplitMix64 stream seeded with ``x`` is
``mix(x + n * GOLDEN)``, so any draw can be computed directly:

* trial ``t`` gets the key ``mix(seed + (t + 1) * GOLDEN)``, i.e. the
  ``(t+1)``-th output of the stream seeded with ``seed``;
* draw ``d`` of that trial is ``mix(key + (d + 1) * GOLDEN)``.

Draw 0 picks the transmitted codeword, draw ``k`` (k >= 1) decides the click
in slot ``k``. Results therefore depend only on ``(seed, trials)`` and not on
how trials are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import IDEAL, DetectionModel
from .ensembles import Family, SignalEnsemble
from .strategy import StrategyTree

__all__ = ["McConfig", "McResult", "splitmix64", "uniform_draws", "simulate"]

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_BATCH = 1 << 18


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of the SplitMix64 stream seeded with ``seed``."""
    counters = np.arange(1, n + 1, dtype=np.uint64)
    return _mix(np.uint64(seed & _MASK64) + counters * GOLDEN)


def uniform_draws(seed: int, trials: np.ndarray, n_draws: int) -> np.ndarray:
    """Uniforms in [0, 1) of shape ``(len(trials), n_draws)``."""
    t = np.asarray(trials, dtype=np.uint64)
    keys = _mix(np.uint64(seed & _MASK64) + (t + np.uint64(1)) * GOLDEN)
    d = np.arange(1, n_draws + 1, dtype=np.uint64)
    raw = _mix(keys[:, None] + d[None, :] * GOLDEN)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class McConfig:
    trials: int
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class McResult:
    p_correct_hat: float
    std_error: float
    trials: int
    seed: int
    successes: int


def _heap_arrays(tree: StrategyTree):
    betas = np.asarray(tree.betas(), dtype=float)
    decisions = np.asarray([leaf.decision for leaf in tree.leaves()], dtype=np.intp)
    return betas, decisions


def simulate(
    ensemble: SignalEnsemble,
    model: DetectionModel | None,
    tree: StrategyTree,
    cfg: McConfig,
) -> McResult:
    """Estimate the success probability of ``tree`` by sampling.

    Each trial draws a codeword from the priors, walks the tree sampling a
    click per slot from the detection model, and scores the leaf decision.
    """
    if tree.m_slots != ensemble.m_slots or Family(tree.family) is not ensemble.family:
        raise ValueError("strategy tree does not match the ensemble (slots or family)")
    tree.check_shape()
    if model is None:
        model = IDEAL
    betas, decisions = _heap_arrays(tree)
    amps = ensemble.amplitudes()
    cum = np.cumsum(ensemble.prior_array())
    m = ensemble.m_slots
    n_internal = (1 << m) - 1

    successes = 0
    for start in range(0, cfg.trials, _BATCH):
        idx = np.arange(start, min(start + _BATCH, cfg.trials), dtype=np.uint64)
        u = uniform_draws(cfg.seed, idx, m + 1)
        sent = np.minimum(np.searchsorted(cum, u[:, 0], side="right"), len(cum) - 1)
        node = np.zeros(idx.size, dtype=np.intp)
        for k in range(m):
            p = model.click(amps[sent, k] + betas[node])
            node = 2 * node + 1 + (u[:, k + 1] < p)
        successes += int(np.count_nonzero(decisions[node - n_internal] == sent))

    p_hat = successes / cfg.trials
    std = math.sqrt(p_hat * (1.0 - p_hat) / cfg.trials)
    return McResult(p_hat, std, cfg.trials, cfg.seed, successes)
