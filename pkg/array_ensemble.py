"""
Tweezer array under an elliptical Gaussian Raman beam. The beam waists are field waists and
the Raman Rabi frequency follows the local intensity, so an atom displaced by one waist sees
e⁻² of the peak. Rows run along x (the minor waist) and columns along y (the major waist).
"""

import logging
import math
from dataclasses import (
    dataclass,
    replace
)
from typing import (
    Dict,
    List,
    Optional,
    Sequence,
    Tuple
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)
from scipy.stats import norm

from export import write_csv
from fitting import (
    FitModels,
    FitResult,
    fit_decay
)

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 400

Site = Tuple[int, int]


@dataclass(frozen=True)
class ArrayGeometry:
    rows: int
    cols: int
    pitch_x: float
    pitch_y: float
    fill_probability: float = 1.0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"array needs at least one site, got {self.rows}x{self.cols}")
        if self.pitch_x <= 0.0 or self.pitch_y <= 0.0:
            raise ValueError("array pitches must be positive")
        if not 0.0 <= self.fill_probability <= 1.0:
            raise ValueError(f"fill probability must lie in [0, 1], got {self.fill_probability}")

    @classmethod
    def from_extent(cls, rows: int, cols: int, extent_x: float, extent_y: float, fill_probability: float = 1.0) -> "ArrayGeometry":
        return cls(
            rows=rows,
            cols=cols,
            pitch_x=extent_x / max(rows - 1, 1),
            pitch_y=extent_y / max(cols - 1, 1),
            fill_probability=fill_probability,
        )

    def positions(self) -> Tuple[NDArray, NDArray]:
        """Site coordinates (x, y) of shape (rows, cols), centred on the array."""
        x = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.pitch_x
        y = (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.pitch_y
        return np.meshgrid(x, y, indexing="ij")


@dataclass(frozen=True)
class BeamProfile:
    waist_minor: float
    waist_major: float
    peak_rabi: float
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.waist_minor <= 0.0 or self.waist_major <= 0.0:
            raise ValueError("beam waists must be positive")
        if self.peak_rabi < 0.0:
            raise ValueError(f"peak Rabi frequency must be non-negative, got {self.peak_rabi}")


@dataclass(frozen=True)
class EnsembleResult:
    per_atom_rabi: Dict[Site, float]
    times: NDArray
    signal: NDArray
    row_signals: Dict[int, NDArray]
    fitted: Optional[FitResult]

    def write_csv(self, path: str) -> None:
        rows = sorted(self.row_signals)
        header = ["t"] + [f"signal_row{r}" for r in rows] + ["signal_mean"]
        write_csv(
            path,
            header,
            ([t] + [self.row_signals[r][i] for r in rows] + [self.signal[i]] for i, t in enumerate(self.times)),
        )


def fill_mask(geom: ArrayGeometry, seed: int = 0) -> NDArray:
    if geom.fill_probability >= 1.0:
        return np.ones((geom.rows, geom.cols), dtype=bool)
    rng = np.random.default_rng(seed)
    return rng.random((geom.rows, geom.cols)) < geom.fill_probability


def rabi_grid(geom: ArrayGeometry, beam: BeamProfile) -> NDArray:
    x, y = geom.positions()
    dx = x - beam.center[0]
    dy = y - beam.center[1]
    return beam.peak_rabi * np.exp(-2.0 * dx * dx / beam.waist_minor ** 2 - 2.0 * dy * dy / beam.waist_major ** 2)


def per_atom_rabi(geom: ArrayGeometry, beam: BeamProfile, mask: Optional[NDArray] = None) -> Dict[Site, float]:
    grid = rabi_grid(geom, beam)
    mask = fill_mask(geom) if mask is None else mask
    return {(int(r), int(c)): float(grid[r, c]) for r, c in zip(*np.nonzero(mask))}


def middle_rows(geom: ArrayGeometry, count: int = 4) -> List[int]:
    first = (geom.rows - count) // 2
    return list(range(max(first, 0), min(first + count, geom.rows)))


def _selected(geom: ArrayGeometry, rows: Optional[Sequence[int]]) -> List[int]:
    rows = list(range(geom.rows)) if rows is None else list(rows)
    if len(rows) == 0 or any(not 0 <= r < geom.rows for r in rows):
        raise ValueError(f"row selection must be a non-empty subset of 0..{geom.rows - 1}")
    return rows


def row_rabi_spread(geom: ArrayGeometry, beam: BeamProfile, rows: Optional[Sequence[int]] = None) -> Tuple[float, float]:
    """Mean Rabi frequency over the selected rows and the max/min − 1 spread of the row means."""
    rows = _selected(geom, rows)
    grid = rabi_grid(geom, beam)[rows]
    means = np.mean(grid, axis=1)
    return float(np.mean(grid)), float(np.max(means) / np.min(means) - 1.0)


def calibrate_peak_rabi(geom: ArrayGeometry, beam: BeamProfile, target: float, rows: Optional[Sequence[int]] = None) -> BeamProfile:
    mean, _ = row_rabi_spread(geom, beam, rows)
    if mean <= 0.0:
        raise ValueError("selected rows see no Raman drive")
    return replace(beam, peak_rabi=beam.peak_rabi * target / mean)


def _average_transfer(omegas: NDArray, scales: NDArray, times: NDArray) -> NDArray:
    total = np.zeros_like(times)
    for scale in scales:
        total += np.sum(0.5 * (1.0 - np.cos(np.outer(scale * omegas, times))), axis=0)
    return total / (scales.size * omegas.size)


def _power_scales(power_noise: float, shots: int, seed: int) -> NDArray:
    if power_noise == 0.0:
        return np.ones(1)
    rng = np.random.default_rng(seed)
    u = (rng.permutation(shots) + rng.random(shots)) / shots
    return 1.0 + power_noise * norm.ppf(u)


def ensemble_rabi(
    geom: ArrayGeometry,
    beam: BeamProfile,
    duration: float,
    rows: Optional[Sequence[int]] = None,
    samples: int = DEFAULT_SAMPLES,
    power_noise: float = 0.0,
    shots: int = 1000,
    seed: int = 0,
    fit: bool = True,
) -> EnsembleResult:
    """
    Population transfer (1 − cos Ωt)/2 of every occupied site, averaged within each selected row
    and over all selected atoms. `power_noise` draws a per-shot gaussian Rabi scale.
    """
    if duration <= 0.0:
        raise ValueError(f"duration must be positive, got {duration}")
    rows = _selected(geom, rows)
    times = np.linspace(0.0, duration, samples)
    grid = rabi_grid(geom, beam)
    mask = fill_mask(geom, seed)
    scales = _power_scales(power_noise, shots, seed)

    row_signals = {}
    atoms = []
    for r in rows:
        omegas = grid[r][mask[r]]
        if omegas.size == 0:
            continue
        atoms.append(omegas)
        row_signals[r] = _average_transfer(omegas, scales, times)
    if len(atoms) == 0:
        raise ValueError("no occupied sites in the selected rows")

    signal = _average_transfer(np.concatenate(atoms), scales, times)

    fitted = None
    if fit:
        fitted = fit_decay(times, signal, FitModels.DAMPED_COSINE)
        logger.info(
            f"ensemble Rabi: ω = {fitted.params['omega'] / (2.0 * math.pi):.6g} Hz, γ = {fitted.params['gamma']:.6g} 1/s"
        )
    return EnsembleResult(
        per_atom_rabi=per_atom_rabi(geom, beam, mask),
        times=times,
        signal=signal,
        row_signals=row_signals,
        fitted=fitted,
    )


@dataclass(frozen=True)
class IdleDecayRow:
    hold: float
    p1_from_0: float
    p1_from_1: float
    survival: float


def idle_decay(t1: float, background_lifetime: float, holds: ArrayLike) -> List[IdleDecayRow]:
    """
    Populations (conditioned on survival) after holding in |0⟩ or |1⟩; they converge to ½ with
    their difference decaying as e^{−t/t1}. Survival falls as e^{−t/lifetime}.
    """
    if t1 <= 0.0 or background_lifetime <= 0.0:
        raise ValueError("t1 and background lifetime must be positive")
    holds = np.asarray(holds, dtype=float)
    contrast = np.exp(-holds / t1)
    survival = np.exp(-holds / background_lifetime)
    return [
        IdleDecayRow(hold=float(t), p1_from_0=float(0.5 - 0.5 * c), p1_from_1=float(0.5 + 0.5 * c), survival=float(s))
        for t, c, s in zip(holds, contrast, survival)
    ]


def write_idle_decay_csv(path: str, rows: Sequence[IdleDecayRow]) -> None:
    write_csv(
        path,
        ["hold_s", "p1_from_0", "p1_from_1", "survival"],
        ([r.hold, r.p1_from_0, r.p1_from_1, r.survival] for r in rows),
    )


__all__ = [
    "ArrayGeometry",
    "BeamProfile",
    "EnsembleResult",
    "IdleDecayRow",
    "calibrate_peak_rabi",
    "ensemble_rabi",
    "fill_mask",
    "idle_decay",
    "middle_rows",
    "per_atom_rabi",
    "rabi_grid",
    "row_rabi_spread",
    "write_idle_decay_csv",
]
