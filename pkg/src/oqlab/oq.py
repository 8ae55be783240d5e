"""Operational quasiprobability of two sequential measurements.

The quasiprobability combines the statistics of three measurement setups,

    w(a1, a2) = P_joint(a1, a2)
              + [P_t1(a1) - sum_b P_joint(a1, b)] / 2
              + [P_t2(a2) - sum_b P_joint(b, a2)] / 2,

so that its marginals always reproduce the single-measurement
distributions. The correction terms measure how much the presence of one
measurement disturbs the statistics of the other; when both vanish (the
no-signaling-in-time and arrow-of-time conditions) w reduces to the joint
distribution and is nonnegative. Negative cells are therefore a witness
of measurement-selection context dependence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contexts import ProbabilitySet, validate_probability_set

# Largest attainable negativity for projective qubit measurements in
# mutually unbiased bases: (sqrt(2) - 1) / 4.
MAX_NEGATIVITY = (np.sqrt(2.0) - 1.0) / 4.0


@dataclass(frozen=True)
class Quasiprobability:
    """Quasiprobability table with its negativity and disturbance diagnostics.

    w : (2, 2) array, quasiprobability of outcome pair (a1, a2)
    negativity : half the summed absolute value of the negative part of w
    nsit_dev : per-outcome deviation |p_t2(a2) - joint marginal|
    aot_dev : per-outcome deviation |p_t1(a1) - joint marginal|
    """

    w: np.ndarray
    negativity: float
    nsit_dev: np.ndarray
    aot_dev: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        object.__setattr__(self, "nsit_dev", np.asarray(self.nsit_dev, dtype=float))
        object.__setattr__(self, "aot_dev", np.asarray(self.aot_dev, dtype=float))


def negativity(w) -> float:
    """Half the summed absolute value of the negative components of w."""
    w = np.asarray(w, dtype=float)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"quasiprobability must sum to 1, got {w.sum()!r}")
    return float(0.5 * np.sum(np.abs(w) - w))


def oq_distribution(ps: ProbabilitySet, atol: float = 1e-9) -> Quasiprobability:
    """Quasiprobability of a probability bundle, with diagnostics.

    Raises ValueError when the bundle violates nonnegativity or
    normalization beyond `atol`.
    """
    validate_probability_set(ps, atol=atol)
    marg1 = ps.p_joint.sum(axis=1)
    marg2 = ps.p_joint.sum(axis=0)
    corr1 = (ps.p_t1 - marg1) / 2.0
    corr2 = (ps.p_t2 - marg2) / 2.0
    w = ps.p_joint + corr1[:, None] + corr2[None, :]
    return Quasiprobability(
        w=w,
        negativity=negativity(w),
        nsit_dev=np.abs(ps.p_t2 - marg2),
        aot_dev=np.abs(ps.p_t1 - marg1),
    )


def _check_disk(x: float, z: float):
    if not (np.isfinite(x) and np.isfinite(z)):
        raise ValueError("disk coordinates must be finite")
    if x * x + z * z > 1.0 + 1e-12:
        raise ValueError(f"({x}, {z}) lies outside the unit disk")


def oq_closed_form(x: float, z: float) -> np.ndarray:
    """Quasiprobability of projective H/V then D/A measurements, closed form.

    For a state with Bloch components x (D/A axis) and z (H/V axis) the
    full pipeline collapses to

        w(a1, a2) = [1 + (-1)^a1 z + (-1)^a2 x] / 4.

    Serves as the independent oracle for the measurement pipeline.
    """
    _check_disk(x, z)
    signs = np.array([1.0, -1.0])
    return (1.0 + signs[:, None] * z + signs[None, :] * x) / 4.0


def negativity_region(x: float, z: float) -> float:
    """Exact negativity of oq_closed_form: max(0, (|x| + |z| - 1) / 4).

    At most one cell of the closed form can be negative, so the negativity
    is zero exactly on the diamond |x| + |z| <= 1 and grows linearly
    outside it.
    """
    _check_disk(x, z)
    return max(0.0, (abs(x) + abs(z) - 1.0) / 4.0)
