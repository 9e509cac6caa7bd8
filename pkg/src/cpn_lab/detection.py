"""On-off photodetection after a displacement control.

The receiver displaces each slot by ``beta`` and records click / no click.
For a displaced amplitude ``x`` the detector with efficiency ``eta`` and
dark-click probability ``p_d`` clicks with probability
``1 - (1 - p_d) * exp(-eta * x**2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import Amplitude, Family, SlotSymbol

__all__ = [
    "DetectionModel",
    "IDEAL",
    "control_set",
    "control_index",
    "displaced_amplitude",
    "click_probability",
]


@dataclass(frozen=True)
class DetectionModel:
    efficiency: float = 1.0
    dark_click: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency!r}")
        if not 0.0 <= self.dark_click < 1.0:
            raise ValueError(f"dark_click must lie in [0, 1), got {self.dark_click!r}")

    @property
    def is_ideal(self) -> bool:
        return self.efficiency == 1.0 and self.dark_click == 0.0

    def no_click(self, displaced):
        """P(no click) for displaced amplitude(s); accepts scalars or arrays."""
        x = np.asarray(displaced, dtype=float)
        return (1.0 - self.dark_click) * np.exp(-self.efficiency * x * x)

    def click(self, displaced):
        x = np.asarray(displaced, dtype=float)
        # -expm1 keeps the small-amplitude limit accurate
        light = -np.expm1(-self.efficiency * x * x)
        return self.dark_click + (1.0 - self.dark_click) * light


IDEAL = DetectionModel()


def control_set(family: Family | str, amplitude: Amplitude) -> tuple[float, float]:
    """The two admissible displacements, in tie-break order.

    OOK: (0, -alpha), i.e. direct detection then pulse nulling.
    BPSK: (-alpha, +alpha), nulling ``+alpha`` then nulling ``-alpha``.
    """
    a = amplitude.alpha
    if Family(family) is Family.OOK:
        return (0.0, -a)
    return (-a, a)


def control_index(beta: float, family: Family | str, amplitude: Amplitude) -> int:
    """Position of ``beta`` in the control set; raises on an illegal control."""
    sigma = control_set(family, amplitude)
    tol = 1e-12 * max(1.0, amplitude.alpha)
    for i, b in enumerate(sigma):
        if abs(beta - b) <= tol:
            return i
    raise ValueError(
        f"control beta={beta!r} not in {Family(family).value} control set {sigma!r}"
    )


_SYMBOL_FAMILIES = {
    SlotSymbol.VACUUM: (Family.OOK,),
    SlotSymbol.MINUS_ALPHA: (Family.BPSK,),
    SlotSymbol.PLUS_ALPHA: (Family.OOK, Family.BPSK),
}


def displaced_amplitude(
    symbol: SlotSymbol,
    beta: float,
    amplitude: Amplitude,
    family: Family | str | None = None,
) -> float:
    """Slot amplitude after displacement, ``gamma + beta``.

    Without ``family`` the control is accepted if it is legal for any family
    the symbol can belong to.
    """
    if family is None:
        families = _SYMBOL_FAMILIES[symbol]
    else:
        families = (Family(family),)
        if families[0] not in _SYMBOL_FAMILIES[symbol]:
            raise ValueError(f"{symbol.name} does not occur in {families[0].value} ensembles")
    errors = []
    for fam in families:
        try:
            control_index(beta, fam, amplitude)
            break
        except ValueError as exc:
            errors.append(str(exc))
    else:
        raise ValueError("; ".join(errors))
    return symbol.amplitude(amplitude) + beta


def click_probability(
    symbol: SlotSymbol,
    beta: float,
    amplitude: Amplitude,
    model: DetectionModel = IDEAL,
    family: Family | str | None = None,
) -> float:
    x = displaced_amplitude(symbol, beta, amplitude, family)
    return float(model.click(x))


def slot_tables(amplitudes: np.ndarray, sigma, model: DetectionModel):
    """Per-slot click / no-click probabilities for every control and codeword.

    ``amplitudes`` is ``(N, M)``; returns two arrays of shape ``(M, |sigma|, N)``.
    """
    shifted = amplitudes.T[:, None, :] + np.asarray(sigma, dtype=float)[None, :, None]
    return model.click(shifted), model.no_click(shifted)

