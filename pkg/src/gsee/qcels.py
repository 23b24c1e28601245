"""Statistical phase estimation from overlap time series.

The pipeline rescales a Hamiltonian so its spectrum fits inside
[-pi/4, pi/4], acquires the overlap series

    Z_n = <psi| exp(-i t_n H~) |psi>,    t_n = n tau,

exactly, from sampled Hadamard tests, or from recompiled preparation
circuits, and maximizes the objective

    f(theta) = | sum_n Z_n exp(i n tau theta) |^2

whose peak location theta* converts back to an energy through
E* = h0 + h1 theta*.
"""

import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, hea_ansatz
from .pauli import PauliString, PauliSum
from .recompile import SeriesCompilation
from .simulator import (
    StateVector,
    apply_circuit,
    estimate_pauli_z,
    evolve_exact,
    expectation,
    sample_z,
)

__all__ = [
    "ALIAS_SAFE_TAU",
    "GRID_POINTS",
    "OverlapSeries",
    "QcelsResult",
    "ScaledHamiltonian",
    "acquire",
    "choose_grid",
    "fit",
    "hadamard_test_state",
    "scale",
    "std_error",
]

# f(theta) repeats every 2 pi / tau; below this step every alias of a
# phase inside [-pi/4, pi/4] falls outside the search window.
ALIAS_SAFE_TAU = 3.9
GRID_POINTS = 20001
_MODES = ("exact", "shots", "recompiled")


# ----------------------------------------------------------------------
# rescaling
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ScaledHamiltonian:
    """H = h0 I + h1 H~ with the spectrum of H~ inside [-pi/4, pi/4].

    Attributes:
        h0: spectral mean of H (its identity coefficient), in Hartree.
        h1: scale factor (4/pi) ||H - h0 I||, in Hartree.
        scaled: the dimensionless operator H~ = (H - h0 I) / h1.
    """

    h0: float
    h1: float
    scaled: PauliSum

    def energy(self, theta: float) -> float:
        """Converts a fitted phase back to Hartree."""
        return self.h0 + self.h1 * theta


def scale(h: PauliSum, fallback: bool = False) -> ScaledHamiltonian:
    """Shifts and rescales a Hamiltonian for phase estimation.

    h0 is the identity coefficient (equal to Tr H / 2^n) and
    h1 = (4/pi) ||H - h0 I||, so H~ = (H - h0 I)/h1 has its largest
    eigenvalue magnitude at exactly pi/4.

    Args:
        fallback: accept the coefficient 1-norm in place of the dense
            spectral norm on registers too wide to diagonalize; the
            spectrum then sits strictly inside the window.

    Raises:
        ValueError: H is not Hermitian, or is proportional to the
            identity (h1 < 1e-12) and carries no phase to estimate.
    """
    if not h.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    h0 = h.identity_coefficient.real
    shifted = h - PauliSum(h.n_qubits, {PauliString(): h0})
    h1 = 4.0 * shifted.spectral_norm(fallback=fallback) / math.pi
    if h1 < 1e-12:
        raise ValueError("Hamiltonian is proportional to the identity")
    return ScaledHamiltonian(h0=h0, h1=h1, scaled=shifted * (1.0 / h1))


# ----------------------------------------------------------------------
# time grid
# ----------------------------------------------------------------------
def choose_grid(
    sh: ScaledHamiltonian, psi: StateVector, n_points: int = 33
) -> float:
    """Chooses the time step so the series spans two apparent periods.

    The dominant phase is estimated as theta^ = <psi|H~|psi>; the total
    time T = 2 (2 pi / |theta^|) covers two of its periods and
    tau = T / (n_points - 1).  When |theta^| < 0.01 the estimate carries
    no usable period and tau falls back to the maximal-phase choice
    T = 2 (2 pi / (pi/4)) = 16.  The result is capped at ALIAS_SAFE_TAU
    so the fit window stays alias-free.
    """
    if n_points < 2:
        raise ValueError("need at least two time points")
    theta_hat = expectation(psi, sh.scaled).real
    if abs(theta_hat) < 0.01:
        total = 2.0 * (2.0 * math.pi / (math.pi / 4.0))
    else:
        total = 2.0 * (2.0 * math.pi / abs(theta_hat))
    return min(total / (n_points - 1), ALIAS_SAFE_TAU)


# ----------------------------------------------------------------------
# acquisition
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class OverlapSeries:
    """Measured overlaps Z_n at times t_n = n tau.

    ``spc`` is None when the values are exact expectations; otherwise
    each real and imaginary part came from ``spc`` single-shot circuit
    repetitions and carries the matching standard error.
    """

    tau: float
    values: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    spc: int | None
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ValueError(f"unknown acquisition mode {self.mode!r}")
        n = len(self.values)
        if len(self.stderr_re) != n or len(self.stderr_im) != n:
            raise ValueError("standard-error arrays must match the samples")

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.tau

    def to_csv(self) -> str:
        spc = "none" if self.spc is None else str(self.spc)
        lines = [
            f"# tau={self.tau!r} spc={spc} mode={self.mode}",
            "n,t,re,im,stderr_re,stderr_im",
        ]
        for n, z in enumerate(self.values):
            fields = (
                n * self.tau, z.real, z.imag,
                self.stderr_re[n], self.stderr_im[n],
            )
            lines.append(f"{n}," + ",".join(repr(float(x)) for x in fields))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "OverlapSeries":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        match = re.fullmatch(
            r"#\s*tau=(\S+)\s+spc=(\S+)\s+mode=(\w+)", lines[0]
        )
        if match is None:
            raise ValueError("missing overlap-series header line")
        tau = float(match.group(1))
        spc = None if match.group(2) == "none" else int(match.group(2))
        if lines[1] != "n,t,re,im,stderr_re,stderr_im":
            raise ValueError("missing overlap-series column line")
        values, err_re, err_im = [], [], []
        for row in lines[2:]:
            fields = row.split(",")
            if len(fields) != 6:
                raise ValueError(f"bad overlap row {row!r}")
            values.append(complex(float(fields[2]), float(fields[3])))
            err_re.append(float(fields[4]))
            err_im.append(float(fields[5]))
        return cls(
            tau=tau,
            values=np.asarray(values, dtype=complex),
            stderr_re=np.asarray(err_re),
            stderr_im=np.asarray(err_im),
            spc=spc,
            mode=match.group(3),
        )


def std_error(value: float, spc: int) -> float:
    """Sampling error sqrt((1 - value^2)/spc) of a +/-1 shot mean.

    Applied separately to the real and imaginary components of each
    measured overlap.
    """
    return math.sqrt(max(0.0, 1.0 - value * value) / spc)


def hadamard_test_state(
    sh: ScaledHamiltonian, psi: StateVector, t: float
) -> StateVector:
    """(|0>|psi> + |1> exp(-i t H~)|psi>)/sqrt(2), ancilla on qubit 0.

    Measuring X (Y) on the ancilla of this state gives the real
    (imaginary) part of the overlap Z(t).
    """
    evolved = evolve_exact(psi, sh.scaled, t)
    dim = 1 << psi.n_qubits
    amps = np.zeros(2 * dim, dtype=complex)
    even = np.arange(dim) << 1
    amps[even] = psi.amplitudes / math.sqrt(2.0)
    amps[even | 1] = evolved.amplitudes / math.sqrt(2.0)
    return StateVector(psi.n_qubits + 1, amps)


def _ancilla_mean(
    state: StateVector,
    part: str,
    spc: int | None,
    seed: int,
    stream: tuple[int, ...],
) -> float:
    """<X_0> (part="re") or <Y_0> (part="im"), exact or sampled.

    Sampling rotates the ancilla into the Z basis first: H for X, and
    S-dagger then H for Y.
    """
    if spc is None:
        mask = {"re": PauliString(x_mask=1), "im": PauliString(1, 1)}[part]
        return expectation(state, PauliSum(state.n_qubits, {mask: 1.0})).real
    gates = [Gate("h", (0,))]
    if part == "im":
        gates.insert(0, Gate("sdg", (0,)))
    rotated = apply_circuit(state, Circuit(state.n_qubits, gates))
    record = sample_z(rotated, spc, seed, stream)
    return estimate_pauli_z(record, 1)


def acquire(
    sh: ScaledHamiltonian,
    psi: StateVector,
    tau: float,
    n_points: int = 33,
    mode: str = "exact",
    spc: int | None = None,
    seed: int = 0,
    compilation: SeriesCompilation | None = None,
    threads: int = 1,
) -> OverlapSeries:
    """Acquires the overlap series Z_n at times n tau.

    Modes:
        exact: direct inner products with the exactly evolved state.
        shots: two Hadamard-test circuits (real, imaginary) per time,
            each sampled with ``spc`` shots under seeds derived from
            (seed, n, part) so acquisitions are order-independent.
        recompiled: the Hadamard-test states are prepared by the fitted
            ansatz circuits of ``compilation`` (one per time point, in
            order); measurements are exact ancilla expectations when
            ``spc`` is None and sampled otherwise.

    Time points are independent; ``threads > 1`` runs them on a thread
    pool, and assembly in point order keeps the series identical at any
    thread count.

    Raises:
        ValueError: bad mode, missing/mismatched compilation data in
            recompiled mode, or missing spc in shots mode.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown acquisition mode {mode!r}")
    if n_points < 2:
        raise ValueError("need at least two time points")
    if mode == "shots" and (spc is None or spc < 1):
        raise ValueError("shots mode needs spc >= 1")
    if spc is not None and spc < 1:
        raise ValueError("spc must be at least 1 when sampling")
    if threads < 1:
        raise ValueError("need at least one thread")

    if mode == "exact":
        values = np.empty(n_points, dtype=complex)
        for n in range(n_points):
            evolved = evolve_exact(psi, sh.scaled, n * tau)
            values[n] = np.vdot(psi.amplitudes, evolved.amplitudes)
        zeros = np.zeros(n_points)
        return OverlapSeries(tau, values, zeros, zeros.copy(), None, mode)

    if mode == "recompiled":
        if compilation is None:
            raise ValueError("recompiled mode needs a SeriesCompilation")
        if len(compilation.results) != n_points:
            raise ValueError(
                f"compilation covers {len(compilation.results)} time points,"
                f" need {n_points}"
            )
        if compilation.n_qubits != psi.n_qubits + 1:
            raise ValueError("compilation register does not match system+ancilla")
        if compilation.layers is None:
            raise ValueError("compilation lacks the ansatz layer count")
        ansatz, _ = hea_ansatz(compilation.n_qubits, compilation.layers)

    def one_point(n: int) -> tuple[complex, float, float]:
        if mode == "shots":
            state = hadamard_test_state(sh, psi, n * tau)
        else:
            bound = ansatz.bind(compilation.results[n].parameters)
            state = apply_circuit(StateVector.zero_state(ansatz.n_qubits), bound)
        re = _ancilla_mean(state, "re", spc, seed, (n, 0))
        im = _ancilla_mean(state, "im", spc, seed, (n, 1))
        if spc is None:
            return complex(re, im), 0.0, 0.0
        return complex(re, im), std_error(re, spc), std_error(im, spc)

    if threads == 1:
        points = [one_point(n) for n in range(n_points)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(one_point, range(n_points)))
    values = np.array([p[0] for p in points], dtype=complex)
    err_re = np.array([p[1] for p in points])
    err_im = np.array([p[2] for p in points])
    return OverlapSeries(tau, values, err_re, err_im, spc, mode)


# ----------------------------------------------------------------------
# fitting
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class QcelsResult:
    """Fitted phase, its energy, and the objective curve on the grid."""

    theta: float
    energy: float
    peak: float
    grid: np.ndarray
    curve: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "theta": self.theta,
                "energy": self.energy,
                "peak": self.peak,
                "curve": [
                    [float(t), float(f)] for t, f in zip(self.grid, self.curve)
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QcelsResult":
        payload = json.loads(text)
        pairs = np.asarray(payload["curve"], dtype=float)
        return cls(
            theta=float(payload["theta"]),
            energy=float(payload["energy"]),
            peak=float(payload["peak"]),
            grid=pairs[:, 0],
            curve=pairs[:, 1],
        )


def _objective(series: OverlapSeries, thetas: np.ndarray) -> np.ndarray:
    """f(theta) = |sum_n Z_n e^{i n tau theta}|^2, vectorized over theta."""
    steps = np.arange(len(series.values)) * series.tau
    phasors = np.exp(1j * np.outer(thetas, steps))
    return np.abs(phasors @ series.values) ** 2


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, a: float, b: float, tol: float) -> float:
    """Golden-section maximizer on [a, b] for a unimodal f."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit(
    series: OverlapSeries,
    sh: ScaledHamiltonian,
    grid_points: int = GRID_POINTS,
) -> QcelsResult:
    """Maximizes the phase objective and converts the peak to energy.

    The objective is scanned on a uniform grid over [-pi/4, pi/4], then
    the best point is refined by golden-section search to an interval
    below 1e-10.  The returned theta is whichever candidate (refined
    point, grid point, or window edge at the boundary) scores highest,
    so f(theta*) >= f(theta) holds on the whole grid.
    """
    if len(series.values) < 2:
        raise ValueError("need at least two samples to fit")
    if grid_points < 3:
        raise ValueError("grid needs at least three points")
    lo, hi = -math.pi / 4.0, math.pi / 4.0
    grid = np.linspace(lo, hi, grid_points)
    curve = _objective(series, grid)
    best = int(np.argmax(curve))
    spacing = grid[1] - grid[0]
    refined = _golden_max(
        lambda th: float(_objective(series, np.array([th]))[0]),
        max(lo, grid[best] - spacing),
        min(hi, grid[best] + spacing),
        tol=1e-11,
    )
    # the grid point wins ties so boundary maxima stay at exactly +/-pi/4
    candidates = np.array([grid[best], refined])
    scores = _objective(series, candidates)
    theta = float(candidates[np.argmax(scores)])
    return QcelsResult(
        theta=theta,
        energy=sh.energy(theta),
        peak=float(np.max(scores)),
        grid=grid,
        curve=curve,
    )
