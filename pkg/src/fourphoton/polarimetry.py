"""Polarization analysers, the fourfold correlation function and fringe fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_angles, check_seed
from .qstate import (
    OutcomeDistribution,
    StateLike,
    as_noisy,
    born_distribution,
    parity,
)

PM_SYMBOLS = ("+", "-")


@dataclass(frozen=True)
class AnalyzerSetting:
    """Analyser with eigenvectors ``(|V> + l e^{-i phi} |H>)/sqrt2``, ``l = +1, -1``."""

    phi: float = 0.0

    def eigenvector(self, l: int) -> np.ndarray:
        if l not in (1, -1):
            raise ValueError(f"analyser outcome must be +1 or -1, got {l!r}")
        # (H, V) components
        return np.array([l * np.exp(-1j * self.phi), 1.0], dtype=complex) / np.sqrt(2)

    def basis(self) -> np.ndarray:
        """Columns are the ``l = +1`` and ``l = -1`` eigenvectors."""
        return np.column_stack([self.eigenvector(1), self.eigenvector(-1)])

    def observable(self) -> np.ndarray:
        plus, minus = analyzer_projectors(self)
        return plus - minus


def analyzer_projectors(setting: AnalyzerSetting) -> tuple[np.ndarray, np.ndarray]:
    vp, vm = setting.eigenvector(1), setting.eigenvector(-1)
    return np.outer(vp, vp.conj()), np.outer(vm, vm.conj())


def _phases_for(state: StateLike, phases: Mapping[str, float] | None) -> list[float]:
    phases = dict(phases or {})
    order = as_noisy(state).mode_order
    unknown = set(phases) - set(order)
    if unknown:
        raise ValueError(f"phases given for modes {sorted(unknown)} not in state {order}")
    return [float(phases.get(m, 0.0)) for m in order]


def analyzer_distribution(state: StateLike, phases: Mapping[str, float] | None = None) -> OutcomeDistribution:
    """16-outcome table with each mode read out by its phase analyser (outcome 0 is l=+1)."""
    bases = [AnalyzerSetting(p).basis() for p in _phases_for(state, phases)]
    return born_distribution(state, bases, symbols=PM_SYMBOLS)


def correlation(state: StateLike, phases: Mapping[str, float] | None = None) -> float:
    """``E = sum_l (prod l_x) P_l`` with phases keyed by mode name; missing modes use 0."""
    dist = analyzer_distribution(state, phases)
    signs = np.array([1 - 2 * parity(i) for i in range(dist.probabilities.size)])
    return float(signs @ dist.probabilities)


def correlation_expectation(state: StateLike, phases: Mapping[str, float] | None = None) -> float:
    """Same quantity as :func:`correlation`, computed as ``Tr(rho O_1 (x) ... (x) O_n)``."""
    op = np.array([[1.0]], dtype=complex)
    for p in _phases_for(state, phases):
        op = np.kron(op, AnalyzerSetting(p).observable())
    rho = as_noisy(state).density_matrix()
    return float(np.real(np.trace(rho @ op)))


@dataclass(frozen=True, eq=False)
class FringeCurve:
    angles: np.ndarray
    values: np.ndarray
    kind: str = "probability"
    counts: np.ndarray | None = None
    errors: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("probability", "correlation"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        angles = np.asarray(self.angles, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if angles.shape != values.shape:
            raise ValueError("angles and values must have the same length")
        if not (np.all(np.isfinite(angles)) and np.all(np.isfinite(values))):
            raise ValueError("fringe curve contains non-finite values")
        if angles.size > 1 and np.any(np.diff(angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        if self.kind == "probability" and (np.any(values < -1e-12) or np.any(values > 1 + 1e-12)):
            raise ValueError("probability curve values must lie in [0, 1]")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "values", values)
        for name in ("counts", "errors"):
            extra = getattr(self, name)
            if extra is not None:
                extra = np.asarray(extra).ravel()
                if extra.shape != angles.shape:
                    raise ValueError(f"{name} must match the number of angles")
                object.__setattr__(self, name, extra)

    def __len__(self):
        return self.angles.size


def correlation_scan(
    state: StateLike,
    varying_mode: str,
    grid: Sequence[float],
    fixed: Mapping[str, float] | None = None,
) -> FringeCurve:
    """``E`` as one mode's phase sweeps ``grid``; the other phases stay at ``fixed`` (default 0)."""
    grid = check_angles(grid, min_points=4)
    order = as_noisy(state).mode_order
    if varying_mode not in order:
        raise ValueError(f"mode {varying_mode!r} not in state {order}")
    base = dict(fixed or {})
    values = [correlation(state, {**base, varying_mode: float(t)}) for t in grid]
    return FringeCurve(grid, np.array(values), kind="correlation")


def linear_analyzer_basis(alpha: float) -> np.ndarray:
    """Linear analyser at ``alpha`` from H; column 0 is the transmitted direction."""
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]], dtype=complex)


def fringe_scan_linear(
    state: StateLike,
    grid: Sequence[float],
    varying_mode: str = "f",
) -> FringeCurve:
    """Fourfold probability with all other modes projected on ``+`` (45 deg).

    ``grid`` is the angle between the varying mode's linear analyser and
    the ``+`` direction.
    """
    grid = check_angles(grid)
    order = as_noisy(state).mode_order
    if varying_mode not in order:
        raise ValueError(f"mode {varying_mode!r} not in state {order}")
    plus = linear_analyzer_basis(math.pi / 4)
    values = []
    for theta in grid:
        bases = [
            linear_analyzer_basis(math.pi / 4 + theta) if m == varying_mode else plus
            for m in order
        ]
        values.append(born_distribution(state, bases).probabilities[0])
    return FringeCurve(grid, np.array(values), kind="probability")


class DegenerateFitError(ValueError):
    """The angle grid cannot resolve offset, cosine and sine terms."""


class SinusoidFit(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``offset + amplitude * cos(harmonic * theta + phase)``.

    The model is linear in ``(offset, A cos(phase), -A sin(phase))`` and is
    solved in closed form.  For ``kind="probability"`` the visibility is
    ``amplitude / offset``; a correlation curve is already a normalised
    contrast, so there the visibility is the amplitude itself.

    Parameters
    ----------
    harmonic : int
        Angular frequency ``k``.  Linear-polariser fringes oscillate at
        ``k=2``; phase scans of the correlation function at ``k=1``.
    kind : {"probability", "correlation"}
    """

    def __init__(self, harmonic: int = 1, kind: str = "probability"):
        self.harmonic = harmonic
        self.kind = kind

    def _design(self, X) -> np.ndarray:
        theta = np.asarray(X, dtype=float).ravel() * self.harmonic
        return np.column_stack([np.ones_like(theta), np.cos(theta), np.sin(theta)])

    def fit(self, X, y):
        if self.kind not in ("probability", "correlation"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if int(self.harmonic) != self.harmonic or self.harmonic < 1:
            raise ValueError(f"harmonic must be a positive integer, got {self.harmonic!r}")
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(-1, 1), y, y_numeric=True)
        if X.shape[0] < 4:
            raise DegenerateFitError(f"need at least 4 points, got {X.shape[0]}")
        A = self._design(X)
        if np.linalg.matrix_rank(A) < 3:
            raise DegenerateFitError("design matrix is rank deficient; spread the angles")
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        self.coef_ = coef
        self.offset_ = float(coef[0])
        self.amplitude_ = float(math.hypot(coef[1], coef[2]))
        self.phase_ = float(math.atan2(-coef[2], coef[1])) if self.amplitude_ > 0 else 0.0
        resid = y - A @ coef
        self.residual_rms_ = float(np.sqrt(np.mean(resid**2)))
        self.visibility_ = self._visibility()
        self.n_features_in_ = 1
        return self

    def _visibility(self) -> float:
        if self.kind == "correlation":
            return self.amplitude_
        if self.amplitude_ == 0.0:
            return 0.0
        if self.offset_ <= 0.0:
            raise DegenerateFitError("non-positive fitted offset; visibility undefined")
        return self.amplitude_ / self.offset_

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(np.asarray(X, dtype=float).reshape(-1, 1))
        return self._design(X) @ self.coef_


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    offset: float
    phase: float
    visibility: float
    residual_rms: float
    harmonic: int

    def as_dict(self) -> dict:
        return {
            "amplitude": self.amplitude,
            "offset": self.offset,
            "phase": self.phase,
            "visibility": self.visibility,
            "residual_rms": self.residual_rms,
            "harmonic": self.harmonic,
        }


def fit_sinusoid(curve: FringeCurve, harmonic: int) -> FitResult:
    est = SinusoidFit(harmonic=harmonic, kind=curve.kind).fit(curve.angles, curve.values)
    return FitResult(
        amplitude=est.amplitude_,
        offset=est.offset_,
        phase=est.phase_,
        visibility=est.visibility_,
        residual_rms=est.residual_rms_,
        harmonic=harmonic,
    )


def mixed_visibility(pure_fit: FitResult, weight: float, n_qubits: int = 4) -> float:
    """Visibility of a probability fringe after white-noise admixture.

    Least squares is linear, so mixing scales the fitted amplitude by
    ``weight`` and maps the offset to ``weight * offset + (1 - weight) / 2**n``.
    """
    amp = weight * pure_fit.amplitude
    if amp == 0:
        return 0.0
    return amp / (weight * pure_fit.offset + (1 - weight) / 2**n_qubits)


@dataclass(frozen=True, eq=False)
class CountSample:
    """Simulated coincidence counts with Poisson (sqrt N) error bars."""

    labels: tuple
    counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.sum() != self.total:
            raise ValueError("counts do not sum to total")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def std_error(self) -> np.ndarray:
        return np.sqrt(self.counts)

    @property
    def frequencies(self) -> np.ndarray:
        if self.total == 0:
            return np.zeros(self.counts.size)
        return self.counts / self.total

    @property
    def frequency_errors(self) -> np.ndarray:
        """Binomial standard errors of the empirical frequencies."""
        if self.total == 0:
            return np.zeros(self.counts.size)
        f = self.frequencies
        return np.sqrt(f * (1 - f) / self.total)


def sample_counts(dist: OutcomeDistribution, n: int, seed: int = 0) -> CountSample:
    """Multinomial draw of ``n`` coincidence events, reproducible for a given seed."""
    if int(n) != n or n < 0:
        raise ValueError(f"event count must be a non-negative integer, got {n!r}")
    rng = np.random.default_rng(check_seed(seed))
    p = dist.probabilities / dist.probabilities.sum()
    counts = rng.multinomial(int(n), p)
    return CountSample(tuple(dist.labels()), counts, int(n))
