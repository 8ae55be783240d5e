"""Selective single and sequential projective polarization measurements.

A measurement setup is a tuple (n1, n2) of bits: n1 = 1 means the H/V
measurement runs at the first time, n2 = 1 means the D/A measurement runs
at the second time. Outcomes are bits a1 (0 = H, 1 = V) and a2 (0 = D,
1 = A); the detector that fires in the full sequential arrangement is
labeled D_{a1,a2}, and with the first polarizing splitter removed all
light reaches the a1 = 0 arm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore

HV = "HV"
DA = "DA"

SETUPS = ((0, 0), (0, 1), (1, 0), (1, 1))


def validate_setup(setup) -> tuple[int, int]:
    n1, n2 = setup
    if (n1, n2) not in SETUPS:
        raise ValueError(f"setup must be one of {SETUPS}, got {setup!r}")
    return (int(n1), int(n2))


def hv_projectors():
    """Projectors (|H><H|, |V><V|)."""
    return (
        np.outer(qcore.KET_H, qcore.KET_H.conj()),
        np.outer(qcore.KET_V, qcore.KET_V.conj()),
    )


def da_projectors():
    """Projectors (|D><D|, |A><A|) with |D/A> = (|H> +- |V>)/sqrt(2)."""
    d = (qcore.KET_H + qcore.KET_V) / np.sqrt(2)
    a = (qcore.KET_H - qcore.KET_V) / np.sqrt(2)
    return (np.outer(d, d.conj()), np.outer(a, a.conj()))


_PROJECTORS = {HV: hv_projectors(), DA: da_projectors()}


def _single_probs(rho, projs) -> np.ndarray:
    # Tr(P rho) written as an elementwise sum to avoid matmul overhead.
    p = np.array([(pi * rho.T).sum().real for pi in projs])
    return np.clip(p, 0.0, None)


def _sequential_probs(rho) -> np.ndarray:
    hv = _PROJECTORS[HV]
    da = _PROJECTORS[DA]
    joint = np.empty((2, 2))
    for a1 in (0, 1):
        updated = hv[a1] @ rho @ hv[a1]
        for a2 in (0, 1):
            joint[a1, a2] = (da[a2] * updated.T).sum().real
    return np.clip(joint, 0.0, None)


def single_probs(rho, basis: str) -> np.ndarray:
    """Born-rule outcome probabilities of a single measurement.

    Parameters
    ----------
    rho : 2x2 density matrix
    basis : "HV" or "DA"
    """
    rho = qcore.validate_state(rho)
    key = str(basis).upper()
    if key not in _PROJECTORS:
        raise ValueError(f"basis must be 'HV' or 'DA', got {basis!r}")
    return _single_probs(rho, _PROJECTORS[key])


def sequential_probs(rho) -> np.ndarray:
    """Joint probabilities of H/V followed by D/A on the updated state.

    P(a1, a2) = Tr[Pi_DA(a2) Pi_HV(a1) rho Pi_HV(a1)], i.e. a projective
    update after the first outcome, then the Born rule for the second.
    Returned as a (2, 2) array indexed [a1, a2].
    """
    return _sequential_probs(qcore.validate_state(rho))


@dataclass(frozen=True)
class ProbabilitySet:
    """The probability bundle feeding the quasiprobability formula.

    p_t1 : outcome probabilities of the first measurement alone
    p_t2 : outcome probabilities of the second measurement alone
    p_joint : (2, 2) joint probabilities of the sequential run
    """

    p_t1: np.ndarray
    p_t2: np.ndarray
    p_joint: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_t1", np.asarray(self.p_t1, dtype=float))
        object.__setattr__(self, "p_t2", np.asarray(self.p_t2, dtype=float))
        object.__setattr__(self, "p_joint", np.asarray(self.p_joint, dtype=float))


def validate_probability_set(ps: ProbabilitySet, atol: float = 1e-9) -> ProbabilitySet:
    """Check shapes, nonnegativity, and normalization of each block."""
    if ps.p_t1.shape != (2,) or ps.p_t2.shape != (2,) or ps.p_joint.shape != (2, 2):
        raise ValueError("probability set blocks have wrong shapes")
    for name, block in (("p_t1", ps.p_t1), ("p_t2", ps.p_t2), ("p_joint", ps.p_joint)):
        if not np.isfinite(block).all():
            raise ValueError(f"{name} has non-finite entries")
        if block.min() < -atol:
            raise ValueError(f"{name} has negative entries")
        if abs(block.sum() - 1.0) > atol:
            raise ValueError(f"{name} does not sum to 1 (sum = {block.sum()!r})")
    return ps


def context_table(rho) -> ProbabilitySet:
    """Exact single and sequential probabilities for one input state.

    The state is validated once here; the three probability blocks are
    then computed directly.
    """
    rho = qcore.validate_state(rho)
    return ProbabilitySet(
        p_t1=_single_probs(rho, _PROJECTORS[HV]),
        p_t2=_single_probs(rho, _PROJECTORS[DA]),
        p_joint=_sequential_probs(rho),
    )
