"""Reference receivers: direct detection, homodyne, square-root measurement.

Also provides the Holevo quantity of a pure-state codeword ensemble.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .detection import IDEAL, DetectionModel
from .ensembles import Family, SignalEnsemble
from .linalg import sqrt_psd, sym_eig

__all__ = [
    "ReceiverResult",
    "coherent_overlap",
    "gram_matrix",
    "weighted_gram",
    "dd_ml_error",
    "homodyne_bit_error",
    "hd_ml_error",
    "srm_error",
    "holevo_bound",
]

ENTROPY_CUTOFF = 1e-14


@dataclass(frozen=True)
class ReceiverResult:
    p_error: float
    receiver: str
    n_bar: float

    @property
    def p_correct(self) -> float:
        return 1.0 - self.p_error


def coherent_overlap(a: float, b: float) -> float:
    """``<a|b>`` for real coherent amplitudes."""
    return math.exp(-0.5 * (a - b) ** 2)


def gram_matrix(ensemble: SignalEnsemble) -> np.ndarray:
    """Codeword overlaps ``G[i, j] = prod_k exp(-(a_ik - a_jk)**2 / 2)``."""
    amps = ensemble.amplitudes()
    diff = amps[:, None, :] - amps[None, :, :]
    return np.exp(-0.5 * np.sum(diff * diff, axis=2))


def weighted_gram(ensemble: SignalEnsemble) -> np.ndarray:
    root = np.sqrt(ensemble.prior_array())
    return root[:, None] * gram_matrix(ensemble) * root[None, :]


def dd_ml_error(ensemble: SignalEnsemble, model: DetectionModel = IDEAL) -> ReceiverResult:
    """Slot-by-slot direct detection followed by MAP decoding of the click pattern.

    Each of the ``2**M`` click patterns is scored by the product of per-slot
    likelihoods under every codeword; the decoder keeps the largest
    ``prior * likelihood``.
    """
    if ensemble.family is not Family.OOK:
        raise ValueError("direct detection baseline applies to OOK-like ensembles only")
    amps = ensemble.amplitudes()
    p_click = model.click(amps)  # (N, M), no displacement
    p_quiet = model.no_click(amps)
    priors = ensemble.prior_array()

    p_error = 0.0
    for pattern in itertools.product((0, 1), repeat=ensemble.m_slots):
        z = np.asarray(pattern, dtype=bool)
        joint = priors * np.prod(np.where(z, p_click, p_quiet), axis=1)
        # mass of the pattern not claimed by the decoded codeword
        p_error += float(joint.sum() - joint.max())
    return ReceiverResult(min(1.0, max(0.0, p_error)), "dd", ensemble.n_bar)


def homodyne_bit_error(n_bar: float) -> float:
    """Hard-decision homodyne error for ``|+-alpha>``: ``erfc(sqrt(2 n_bar)) / 2``."""
    return 0.5 * math.erfc(math.sqrt(2.0 * n_bar))


def hd_ml_error(
    ensemble: SignalEnsemble, slot_bit_error: float | None = None
) -> ReceiverResult:
    """Per-slot hard homodyne decisions, then minimum-distance block decoding.

    Every received word is decoded once (ties to the lowest codeword index),
    then the probability of each (codeword, error pattern) pair that decodes
    wrongly is summed exactly. ``slot_bit_error`` overrides the homodyne
    crossover probability.
    """
    if ensemble.family is not Family.BPSK:
        raise ValueError("homodyne baseline applies to BPSK ensembles only")
    q = homodyne_bit_error(ensemble.n_bar) if slot_bit_error is None else float(slot_bit_error)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"slot bit error must lie in [0, 1], got {q!r}")
    m = ensemble.m_slots
    words = np.array([[int(c) for c in b] for b in ensemble.bits()], dtype=np.int8)
    received = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int8)
    distance = np.sum(received[:, None, :] != words[None, :, :], axis=2)
    decoded = np.argmin(distance, axis=1)  # first minimum = lowest index

    weights = np.sum(received, axis=1)
    p_pattern = q**weights * (1.0 - q) ** (m - weights)
    place = 1 << np.arange(m - 1, -1, -1)
    p_error = 0.0
    for i, (prior, word) in enumerate(zip(ensemble.priors, words)):
        wrong = decoded[(received ^ word) @ place] != i
        p_error += prior * float(np.sum(p_pattern[wrong]))
    return ReceiverResult(min(1.0, max(0.0, p_error)), "hd", ensemble.n_bar)


def srm_error(ensemble: SignalEnsemble) -> ReceiverResult:
    """Square-root measurement, ``P_c = sum_i (sqrt(G')_ii)**2``.

    Because ``sum_j sqrt(G')_ij**2 = G'_ii = p_i``, the error equals the sum
    of squared off-diagonal entries, which stays accurate when it is tiny.
    """
    root = sqrt_psd(weighted_gram(ensemble))
    off = root - np.diag(np.diag(root))
    return ReceiverResult(min(1.0, float(np.sum(off * off))), "srm", ensemble.n_bar)


def holevo_bound(ensemble: SignalEnsemble) -> float:
    """Von Neumann entropy (bits) of the average codeword state.

    The weighted Gram matrix shares its nonzero spectrum with
    ``rho = sum_i p_i |psi_i><psi_i|``.
    """
    w, _ = sym_eig(weighted_gram(ensemble))
    w = w[w > ENTROPY_CUTOFF]
    return float(max(0.0, -np.sum(w * np.log2(w))))
