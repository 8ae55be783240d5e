"""Stochastic photon-counting simulation of the polarization setups.

Sources (heralded pair source, two-level emitter, attenuated pulsed
laser) feed the measurement train of `contexts` through an imperfect
optics and detection model. Counting runs produce CountTable objects;
timing runs produce ClickStream objects for correlation analysis.

Imperfection model
------------------
* Waveplate misalignment is systematic: one offset per optical element is
  drawn once per run, uniform within the stated operating error. A plate
  offset delta rotates the prepared polarization by 2*delta, and an
  analysis-plate offset rotates the measurement basis of its arm by
  2*delta.
* Polarizing-splitter leakage flips the routing of a photon: a
  transmit-bound photon exits the reflected port with probability
  pbs_reflect_leak, a reflect-bound photon exits the transmitted port
  with probability pbs_transmit_leak. The photon keeps its projected
  polarization, only the path label is wrong.
* Detection efficiency thins each detector independently; dark counts are
  Poisson per detector (per integration window for counting runs, per
  pulse gate for pulsed post-selection runs).

Photons in a counting run are independent given the systematic draw, so
counts are sampled from the exact per-detector probabilities with a
single multinomial; this is equivalent to routing photons one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import qcore
from .contexts import validate_setup

NS_PER_S = 1.0e9


# ---------------------------------------------------------------------------
# parameter bundles


@dataclass(frozen=True)
class DetectorModel:
    """Optics and detection imperfections, defaults at the bench values.

    efficiency : per-detector detection probability, order (D00, D01,
        D10, D11)
    dark_rate_hz : dark count rate per detector
    pbs_reflect_leak : probability that a transmit-bound photon exits the
        reflected port
    pbs_transmit_leak : probability that a reflect-bound photon exits the
        transmitted port
    waveplate_angle_error_deg : operating error of the waveplate settings
    coincidence_window_ns : AND-gate coincidence window for timing runs
    timing_jitter_ns : Gaussian detector jitter for timing runs
    integration_time_s : dark-count accumulation window of a counting run
    pulse_window_ns : detection gate per pulse for post-selected runs
    """

    efficiency: tuple = (1.0, 1.0, 1.0, 1.0)
    dark_rate_hz: float = 1.0e3
    pbs_reflect_leak: float = 0.05
    pbs_transmit_leak: float = 0.001
    waveplate_angle_error_deg: float = 0.5
    coincidence_window_ns: float = 5.5
    timing_jitter_ns: float = 0.61
    integration_time_s: float = 1.0e-3
    pulse_window_ns: float = 125.0

    def __post_init__(self):
        eff = tuple(float(e) for e in self.efficiency)
        if len(eff) != 4 or any(not (0.0 < e <= 1.0) for e in eff):
            raise ValueError("efficiency must be four values in (0, 1]")
        object.__setattr__(self, "efficiency", eff)
        for name in ("pbs_reflect_leak", "pbs_transmit_leak"):
            v = getattr(self, name)
            if not (0.0 <= v < 0.5):
                raise ValueError(f"{name} must lie in [0, 0.5), got {v}")
        for name in (
            "dark_rate_hz",
            "waveplate_angle_error_deg",
            "timing_jitter_ns",
            "integration_time_s",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("coincidence_window_ns", "pulse_window_ns"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def ideal(cls, **overrides) -> "DetectorModel":
        """Noise-free model: unit efficiency, no darks, no leaks, no jitter."""
        base = cls(
            efficiency=(1.0, 1.0, 1.0, 1.0),
            dark_rate_hz=0.0,
            pbs_reflect_leak=0.0,
            pbs_transmit_leak=0.0,
            waveplate_angle_error_deg=0.0,
            timing_jitter_ns=0.0,
        )
        return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class WeakCoherent:
    """Attenuated pulsed laser: Poisson photon number per pulse."""

    mean_photons_per_pulse: float = 6.0e-3
    pulse_rate_hz: float = 3.8e6

    def __post_init__(self):
        if self.mean_photons_per_pulse < 0 or self.pulse_rate_hz < 0:
            raise ValueError("weak coherent parameters must be nonnegative")


@dataclass(frozen=True)
class SingleEmitter:
    """Phenomenological two-level emitter.

    Emissions form a renewal process: after each photon the emitter is
    unavailable for one excited-state lifetime and is then re-excited
    after an exponential waiting time with the given rate. Only the
    correlation shape matters here, not microscopic photophysics.
    """

    excited_lifetime_ns: float = 4.0
    excitation_rate_hz: float = 2.0e6

    def __post_init__(self):
        if self.excited_lifetime_ns < 0 or self.excitation_rate_hz <= 0:
            raise ValueError("emitter parameters must be positive")


@dataclass(frozen=True)
class HeraldedSPDC:
    """Heralded pair source feeding the AND-gate coincidence scheme.

    Pair emissions are Poissonian at pair_rate with at most one usable
    pair per coincidence window: the gating electronics cannot resolve a
    second pair inside one AND window, and heralded operation presumes
    one photon per gate. The herald arm detects a pair with probability
    herald_efficiency; unheralded pairs open no gate.
    """

    pair_rate_hz: float = 2.0e5
    herald_efficiency: float = 0.8

    def __post_init__(self):
        if self.pair_rate_hz < 0:
            raise ValueError("pair rate must be nonnegative")
        if not (0.0 <= self.herald_efficiency <= 1.0):
            raise ValueError("herald efficiency must lie in [0, 1]")


# ---------------------------------------------------------------------------
# result containers


@dataclass(frozen=True)
class CountTable:
    """Integer detector counts of one measurement run.

    counts is indexed [a1, a2] following the detector labels D_{a1,a2};
    with the first splitter out (n1 = 0) real photons land on row a1 = 0
    and any row-1 entries are dark or leakage strays.
    """

    setup: tuple
    counts: np.ndarray
    total: int

    def __post_init__(self):
        object.__setattr__(self, "setup", validate_setup(self.setup))
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (2, 2) or np.min(counts) < 0:
            raise ValueError("counts must be a nonnegative (2, 2) table")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", int(self.total))
        if self.total != int(counts.sum()):
            raise ValueError("total must equal the sum of counts")


@dataclass(frozen=True)
class ClickStream:
    """Sorted detection times (ns) of one detector channel."""

    times_ns: np.ndarray
    detector: str = "0"

    def __post_init__(self):
        t = np.asarray(self.times_ns, dtype=float)
        if t.ndim != 1:
            raise ValueError("times_ns must be one-dimensional")
        if t.size and (not np.all(np.isfinite(t)) or np.any(np.diff(t) < 0)):
            raise ValueError("times_ns must be finite and nondecreasing")
        object.__setattr__(self, "times_ns", t)
        object.__setattr__(self, "detector", str(self.detector))


# ---------------------------------------------------------------------------
# counting runs


def _draw_misalignment(det: DetectorModel, rng):
    err = math.radians(det.waveplate_angle_error_deg)
    # preparation plates rotate the polarization by twice the setting error
    prep = rng.uniform(-2 * err, 2 * err)
    arms = 2.0 * rng.uniform(-err, err, size=2)
    return prep, (arms[0], arms[1])


def _da_probs_rotated(rho, basis_rot: float) -> np.ndarray:
    """Born probabilities in a D/A basis rotated by basis_rot radians."""
    c = np.cos(np.pi / 4 + basis_rot)
    s = np.sin(np.pi / 4 + basis_rot)
    ket_d = np.array([c, s], dtype=complex)
    ket_a = np.array([-s, c], dtype=complex)
    pd = (ket_d.conj() @ rho @ ket_d).real
    pa = (ket_a.conj() @ rho @ ket_a).real
    return np.clip(np.array([pd, pa]), 0.0, None)


def detection_probs(rho, setup, det: DetectorModel, misalignment=None):
    """Exact per-detector landing probabilities for one run.

    Returns (probs, lost) where probs is the (2, 2) probability of a
    photon being counted at detector D_{a1,a2} and lost the probability
    of no count. misalignment is the (prep_rotation, arm_rotations)
    tuple drawn once per run; None means perfectly aligned.
    """
    rho = qcore.validate_state(rho)
    n1, n2 = validate_setup(setup)
    prep_rot, arm_rots = misalignment if misalignment is not None else (0.0, (0.0, 0.0))
    if prep_rot != 0.0:
        rho = qcore.rotate_polarization(rho, prep_rot)

    fr, ft = det.pbs_reflect_leak, det.pbs_transmit_leak
    flip = np.array([[1.0 - fr, fr], [ft, 1.0 - ft]])

    if n1 == 1:
        p1 = np.clip(np.diag(rho).real, 0.0, None)
        arm_pols = (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))
        weights = p1[:, None] * flip
    else:
        arm_pols = (rho,)
        weights = np.array([[1.0, 0.0]])

    probs = np.zeros((2, 2))
    if n2 == 1:
        for pol, warm in zip(arm_pols, weights):
            for arm in (0, 1):
                if warm[arm] == 0.0:
                    continue
                pda = _da_probs_rotated(pol, arm_rots[arm])
                probs[arm, :] += warm[arm] * (pda @ flip)
    else:
        probs[:, 0] = weights.sum(axis=0)

    probs *= np.asarray(det.efficiency).reshape(2, 2)
    lost = max(0.0, 1.0 - probs.sum())
    return probs, lost


def simulate_counts(rho, setup, n_photons: int, det: DetectorModel | None = None, seed=0) -> CountTable:
    """Counting run: n_photons identical photons through one setup.

    Photons are routed by the exact context probabilities perturbed by
    the detector model; dark counts accumulate over the integration
    window. Reproducible for a fixed seed.
    """
    if n_photons < 1:
        raise ValueError("n_photons must be at least 1")
    det = det if det is not None else DetectorModel()
    rng = np.random.default_rng(seed)
    mis = _draw_misalignment(det, rng)
    probs, lost = detection_probs(rho, setup, det, mis)
    pvals = np.append(probs.ravel(), lost)
    pvals /= pvals.sum()
    draws = rng.multinomial(int(n_photons), pvals)
    counts = draws[:4].reshape(2, 2)
    dark_mean = det.dark_rate_hz * det.integration_time_s
    if dark_mean > 0.0:
        counts = counts + rng.poisson(dark_mean, size=4).reshape(2, 2)
    return CountTable(setup=setup, counts=counts, total=int(counts.sum()))


def dark_click_prob(det: DetectorModel) -> float:
    """Dark click probability per detector within one pulse gate."""
    return 1.0 - math.exp(-det.dark_rate_hz * det.pulse_window_ns / NS_PER_S)


def expected_dark_counts(det: DetectorModel, n_pulses: int) -> np.ndarray:
    """Expected dark clicks per detector over a post-selected pulse run."""
    return np.full(4, round(n_pulses * dark_click_prob(det)), dtype=np.int64)


def weakfield_run(
    theta: float,
    phi: float,
    src: WeakCoherent,
    setup,
    n_pulses: int,
    det: DetectorModel | None = None,
    seed=0,
) -> CountTable:
    """Pulsed run with single-click post-selection.

    Per pulse the photon number is Poisson with the source mean; each
    photon routes independently; detectors are threshold devices (click
    or no click per pulse) and each detector can also dark-click within
    the pulse gate. Only pulses with exactly one click across the four
    detectors are retained; the returned total is the number of retained
    pulses.
    """
    if not isinstance(src, WeakCoherent):
        raise TypeError("weakfield_run requires a WeakCoherent source")
    if n_pulses < 1:
        raise ValueError("n_pulses must be at least 1")
    det = det if det is not None else DetectorModel()
    rng = np.random.default_rng(seed)
    mis = _draw_misalignment(det, rng)
    probs, lost = detection_probs(qcore.make_pure_state(theta, phi), setup, det, mis)
    pvals = np.append(probs.ravel(), lost)
    pvals /= pvals.sum()

    n_pulses = int(n_pulses)
    photon_count = rng.poisson(src.mean_photons_per_pulse, n_pulses)
    clicks = np.zeros((n_pulses, 4), dtype=bool)

    single = np.flatnonzero(photon_count == 1)
    if single.size:
        dest = rng.choice(5, size=single.size, p=pvals)
        hit = dest < 4
        clicks[single[hit], dest[hit]] = True

    multi = np.flatnonzero(photon_count >= 2)
    if multi.size:
        per_det = rng.multinomial(photon_count[multi], pvals)
        clicks[multi] = per_det[:, :4] > 0

    p_dark = dark_click_prob(det)
    if p_dark > 0.0:
        clicks |= rng.random((n_pulses, 4)) < p_dark

    keep = clicks.sum(axis=1) == 1
    fired = np.argmax(clicks[keep], axis=1)
    counts = np.bincount(fired, minlength=4).reshape(2, 2)
    return CountTable(setup=setup, counts=counts, total=int(keep.sum()))


# ---------------------------------------------------------------------------
# timing runs


def and_gate(a: ClickStream, b: ClickStream, window_ns: float) -> ClickStream:
    """Coincidence output of an AND gate with the given window.

    Fires once per a-click that has a b-click within window_ns; the
    output time is the later of the two edges.
    """
    if window_ns <= 0:
        raise ValueError("window_ns must be positive")
    ta, tb = a.times_ns, b.times_ns
    if ta.size == 0 or tb.size == 0:
        return ClickStream(np.empty(0), detector=f"{a.detector}&{b.detector}")
    idx = np.searchsorted(tb, ta)
    lo = np.clip(idx - 1, 0, tb.size - 1)
    hi = np.clip(idx, 0, tb.size - 1)
    pick = np.where(np.abs(tb[hi] - ta) < np.abs(tb[lo] - ta), hi, lo)
    nearest = tb[pick]
    fired = np.abs(nearest - ta) <= window_ns
    out = np.sort(np.maximum(ta[fired], nearest[fired]))
    return ClickStream(out, detector=f"{a.detector}&{b.detector}")


def _thin(times, prob, rng):
    if prob >= 1.0:
        return times
    return times[rng.random(times.size) < prob]


def _with_darks_and_jitter(times, det: DetectorModel, duration_ns: float, rng):
    if det.timing_jitter_ns > 0.0 and times.size:
        times = times + rng.normal(0.0, det.timing_jitter_ns, times.size)
    n_dark = rng.poisson(det.dark_rate_hz * duration_ns / NS_PER_S)
    if n_dark:
        times = np.concatenate([times, rng.uniform(0.0, duration_ns, n_dark)])
    return np.sort(times)


def _poisson_times(rate_hz: float, duration_ns: float, rng):
    n = rng.poisson(rate_hz * duration_ns / NS_PER_S)
    return np.sort(rng.uniform(0.0, duration_ns, n))


def _renewal_times(dead_ns: float, rate_hz: float, duration_ns: float, rng):
    """Poisson arrivals at rate_hz with a hard dead time after each event.

    A non-paralyzable dead time on a Poisson process is equivalent to a
    renewal process whose gaps are dead_ns plus an exponential wait, so
    the times can be drawn directly.
    """
    mean_exp_ns = NS_PER_S / rate_hz
    expect = duration_ns / (dead_ns + mean_exp_ns)
    times = np.cumsum(dead_ns + rng.exponential(mean_exp_ns, size=int(expect * 1.2 + 100)))
    while times.size and times[-1] < duration_ns:
        more = dead_ns + rng.exponential(mean_exp_ns, size=int(expect * 0.2 + 100))
        times = np.concatenate([times, times[-1] + np.cumsum(more)])
    return times[times < duration_ns]


def generate_click_streams(src, duration_s: float, det: DetectorModel | None = None, seed=0):
    """Timed detection records of a source feeding a two-branch splitter.

    Returns two ClickStream objects:

    * WeakCoherent: a Poisson photon stream (mean per pulse times pulse
      rate) split 50:50.
    * SingleEmitter: the renewal emission stream split 50:50.
    * HeraldedSPDC: the two AND-gate outputs. Pair times carry at most
      one pair per coincidence window, the herald opens a gate with the
      source's herald efficiency, and the signal photon picks one branch;
      each gate output is the coincidence of its signal branch with the
      herald stream.

    Detection applies per-branch efficiency (channels 0 and 1 of the
    detector model), Gaussian timing jitter, and uniform dark counts.
    """
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    det = det if det is not None else DetectorModel()
    rng = np.random.default_rng(seed)
    duration_ns = duration_s * NS_PER_S

    if isinstance(src, WeakCoherent):
        rate = src.mean_photons_per_pulse * src.pulse_rate_hz
        times = _poisson_times(rate, duration_ns, rng)
        return _split_two_branches(times, det, duration_ns, rng)

    if isinstance(src, SingleEmitter):
        times = _renewal_times(src.excited_lifetime_ns, src.excitation_rate_hz, duration_ns, rng)
        return _split_two_branches(times, det, duration_ns, rng)

    if isinstance(src, HeraldedSPDC):
        pairs = _renewal_times(det.coincidence_window_ns, src.pair_rate_hz, duration_ns, rng)
        heralded = _thin(pairs, src.herald_efficiency, rng)
        idler = _with_darks_and_jitter(heralded, det, duration_ns, rng)
        branch = rng.integers(0, 2, size=heralded.size)
        outputs = []
        for i in (0, 1):
            sig = _thin(heralded[branch == i], det.efficiency[i], rng)
            sig = _with_darks_and_jitter(sig, det, duration_ns, rng)
            gate = and_gate(
                ClickStream(sig, detector=f"s{i}"),
                ClickStream(idler, detector="i"),
                det.coincidence_window_ns,
            )
            outputs.append(gate)
        return outputs

    raise TypeError(f"unsupported source model: {src!r}")


def _split_two_branches(times, det: DetectorModel, duration_ns: float, rng):
    branch = rng.integers(0, 2, size=times.size)
    streams = []
    for i in (0, 1):
        t = _thin(times[branch == i], det.efficiency[i], rng)
        t = _with_darks_and_jitter(t, det, duration_ns, rng)
        streams.append(ClickStream(t, detector=str(i)))
    return streams


# ---------------------------------------------------------------------------
# serialization

COUNT_CSV_HEADER = "n1,n2,a1,a2,counts"
CLICK_CSV_HEADER = "time_ns,detector"
SCHEMA_VERSION = 1


def count_tables_to_csv(tables, path):
    """Write CountTables as CSV rows n1,n2,a1,a2,counts (one file, any number of setups)."""
    lines = [f"# schema_version={SCHEMA_VERSION}", COUNT_CSV_HEADER]
    for table in tables:
        n1, n2 = table.setup
        for a1 in (0, 1):
            for a2 in (0, 1):
                lines.append(f"{n1},{n2},{a1},{a2},{table.counts[a1, a2]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def count_tables_from_csv(path):
    """Read CountTables back from CSV; returns {setup: CountTable}.

    Raises ValueError with the offending line number on malformed rows.
    """
    acc: dict[tuple, np.ndarray] = {}
    seen_header = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not seen_header:
                if line.replace(" ", "") != COUNT_CSV_HEADER:
                    raise ValueError(
                        f"{path}: line {lineno}: expected header '{COUNT_CSV_HEADER}', got '{line}'"
                    )
                seen_header = True
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ValueError(f"{path}: line {lineno}: expected 5 fields, got {len(parts)}")
            try:
                n1, n2, a1, a2, value = (int(p) for p in parts)
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: non-integer field ({exc})") from None
            if (n1, n2) not in ((0, 0), (0, 1), (1, 0), (1, 1)) or a1 not in (0, 1) or a2 not in (0, 1):
                raise ValueError(f"{path}: line {lineno}: setup or outcome bits out of range")
            if value < 0:
                raise ValueError(f"{path}: line {lineno}: negative count")
            acc.setdefault((n1, n2), np.zeros((2, 2), dtype=np.int64))[a1, a2] += value
    if not seen_header:
        raise ValueError(f"{path}: line 1: empty file, expected header '{COUNT_CSV_HEADER}'")
    if not acc:
        raise ValueError(f"{path}: no data rows found")
    return {
        setup: CountTable(setup=setup, counts=counts, total=int(counts.sum()))
        for setup, counts in sorted(acc.items())
    }


def click_streams_to_csv(streams, path):
    """Write click streams as a merged CSV time_ns,detector ordered by time."""
    times = np.concatenate([s.times_ns for s in streams]) if streams else np.empty(0)
    labels = np.concatenate(
        [np.full(s.times_ns.size, s.detector, dtype=object) for s in streams]
    ) if streams else np.empty(0, dtype=object)
    order = np.argsort(times, kind="stable")
    lines = [f"# schema_version={SCHEMA_VERSION}", CLICK_CSV_HEADER]
    for t, lab in zip(times[order], labels[order]):
        lines.append(f"{float(t)!r},{lab}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
