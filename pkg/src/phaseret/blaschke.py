"""Finite Blaschke products and the rational unimodular phase model.

The phase of a holomorphic/meromorphic response on the imaginary axis is
modelled as e^{j phi} * P(jw)/P*(jw) with P a monic polynomial given by its
roots and P* its paraconjugate; every value of the model has modulus 1 on
the axis, whatever the roots are. A signal estimate is then the measured
magnitude times the modelled phase.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import require_finite

__all__ = [
    "FrequencyMap",
    "BlaschkePhaseModel",
    "SegmentedPhaseModel",
    "ComplexSpectrum",
    "eval_finite_blaschke",
    "eval_phase",
    "eval_phase_segmented",
    "reconstruct",
    "segment_index_ranges",
]


@dataclass(frozen=True)
class FrequencyMap:
    """Affine map taking the physical band [lo, hi] onto [-1, 1].

    Normalizing the evaluation coordinate keeps high-degree products well
    scaled on wide bands. The identity map is FrequencyMap(-1.0, 1.0).
    """

    lo: float
    hi: float

    def __post_init__(self):
        require_finite((self.lo, self.hi), "frequency band")
        if not self.hi > self.lo:
            raise ValueError(f"need hi > lo, got [{self.lo}, {self.hi}]")

    def __call__(self, omegas):
        omegas = np.asarray(omegas, dtype=float)
        return 2.0 * (omegas - self.lo) / (self.hi - self.lo) - 1.0


@dataclass(frozen=True)
class BlaschkePhaseModel:
    """Unimodular rational phase model: e^{j phi} * P(jw)/P*(jw).

    `roots` are the roots of the monic P (any complex values), `phase_angle`
    is the angle of the global unimodular factor, and `frequency_map`
    normalizes physical frequencies before evaluation.
    """

    roots: np.ndarray
    phase_angle: float
    frequency_map: FrequencyMap = field(default_factory=lambda: FrequencyMap(-1.0, 1.0))

    def __post_init__(self):
        roots = np.atleast_1d(np.asarray(self.roots, dtype=complex))
        require_finite(roots, "roots") if roots.size else None
        require_finite(self.phase_angle, "phase_angle")
        object.__setattr__(self, "roots", roots)

    @property
    def degree(self):
        return self.roots.size


@dataclass(frozen=True)
class SegmentedPhaseModel:
    """Contiguous frequency segments, each with its own phase model.

    `boundaries` has one more entry than `models`; segment k covers
    [boundaries[k], boundaries[k+1]) (the last segment is closed on the
    right). Together the segments cover the band exactly once.
    """

    boundaries: np.ndarray
    models: tuple

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        require_finite(b, "boundaries")
        if b.ndim != 1 or b.size < 2 or not np.all(np.diff(b) > 0):
            raise ValueError("boundaries must be strictly increasing, length >= 2")
        models = tuple(self.models)
        if len(models) != b.size - 1:
            raise ValueError(
                f"{b.size - 1} segments require {b.size - 1} models, got {len(models)}"
            )
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "models", models)

    @property
    def n_segments(self):
        return len(self.models)


@dataclass(frozen=True)
class ComplexSpectrum:
    """A frequency grid with complex response values on it."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        require_finite(omegas, "omegas")
        require_finite(values, "values")
        if omegas.ndim != 1 or values.shape != omegas.shape:
            raise ValueError("omegas and values must be 1-d and the same length")
        if omegas.size >= 2 and not np.all(np.diff(omegas) > 0):
            raise ValueError("omegas must be strictly increasing")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)

    @property
    def magnitudes(self):
        return np.abs(self.values)

    def __len__(self):
        return self.omegas.size


def eval_finite_blaschke(roots, n, z):
    """Evaluate a finite Blaschke product for the right half plane.

        B(z) = ((1+z)/(1-z))^n *
               prod_j (|a_j-1|/(a_j-1)) (|a_j+1|/(a_j+1)) (z-a_j)/(z+conj(a_j))

    On z = jw every factor has modulus one. Raises on the singular inputs:
    any root equal to +-1 (normalization undefined), z at a pole
    -conj(a_j), or z = 1 with n > 0.
    """
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    require_finite(roots, "roots")
    z = complex(z)
    require_finite(z, "z")
    n = int(n)
    if np.any(roots == 1.0) or np.any(roots == -1.0):
        raise ValueError("roots at +1 or -1 make the normalization undefined")
    if n > 0 and z == 1.0:
        raise ZeroDivisionError("z = 1 is a pole of ((1+z)/(1-z))^n for n > 0")
    out = ((1.0 + z) / (1.0 - z)) ** n if n != 0 else 1.0 + 0.0j
    for a in roots:
        denom = z + np.conj(a)
        if denom == 0:
            raise ZeroDivisionError(f"z = {z} is a pole (root {a})")
        out *= (abs(a - 1.0) / (a - 1.0)) * (abs(a + 1.0) / (a + 1.0))
        out *= (z - a) / denom
    return complex(out)


def eval_phase(model, omegas):
    """Evaluate a BlaschkePhaseModel on physical frequencies.

    Returns e^{j phi} * prod_k (jw^ - a_k)/conj(jw^ - a_k) per point, with
    w^ the normalized frequency; each output has modulus 1. Raises if some
    jw^ equals a purely imaginary root (a 0/0 factor).
    """
    w = model.frequency_map(np.asarray(omegas, dtype=float))
    out = np.full(w.shape, np.exp(1j * model.phase_angle), dtype=complex)
    jw = 1j * w
    for a in model.roots:
        u = jw - a
        if np.any(u == 0):
            raise ZeroDivisionError(
                f"purely imaginary root {a} coincides with an evaluation point"
            )
        out *= u / np.conj(u)
    return out


def eval_phase_segmented(model, omegas):
    """Evaluate a SegmentedPhaseModel; per-segment results are concatenated
    in frequency order. Raises on frequencies outside the covered band."""
    omegas = np.asarray(omegas, dtype=float)
    b = model.boundaries
    if np.any(omegas < b[0]) or np.any(omegas > b[-1]):
        raise ValueError("frequency outside the segmented band")
    # right-open segments, except the last one which is closed
    seg = np.minimum(np.searchsorted(b, omegas, side="right") - 1, len(model.models) - 1)
    out = np.empty(omegas.shape, dtype=complex)
    for k, sub in enumerate(model.models):
        mask = seg == k
        if np.any(mask):
            out[mask] = eval_phase(sub, omegas[mask])
    return out


def reconstruct(magnitudes, phase):
    """Combine known magnitudes with a modelled unimodular phase:
    f~_i = |f_i| * b~_i. Raises on negative magnitudes or length mismatch."""
    magnitudes = np.asarray(magnitudes, dtype=float)
    phase = np.asarray(phase, dtype=complex)
    if magnitudes.shape != phase.shape:
        raise ValueError(
            f"length mismatch: {magnitudes.shape} magnitudes, {phase.shape} phases"
        )
    if np.any(magnitudes < 0):
        raise ValueError("magnitudes must be nonnegative")
    return magnitudes * phase


def segment_index_ranges(n_points, n_segments):
    """Split indices 0..n_points-1 into n_segments equal-length contiguous
    ranges (the first n_points % n_segments ranges get one extra point).

    Returns a list of (start, stop) pairs. Every segment must keep at least
    two points so its band is non-degenerate.
    """
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    if n_points < 2 * n_segments:
        raise ValueError(
            f"{n_segments} segments need at least {2 * n_segments} points, got {n_points}"
        )
    base, extra = divmod(n_points, n_segments)
    ranges = []
    start = 0
    for k in range(n_segments):
        stop = start + base + (1 if k < extra else 0)
        ranges.append((start, stop))
        start = stop
    return ranges
