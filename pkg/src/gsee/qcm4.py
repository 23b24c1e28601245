"""Fourth-order moment and cumulant energy estimation.

The pipeline expands the Hamiltonian powers H^n for n = 1..4, filters
strings whose ideal expectation vanishes in the input state, groups the
survivors into fully commuting sets, diagonalizes each set with a
Clifford circuit so one Z-basis acquisition serves every member, turns
moments into cumulants

    c_n = <H^n> - sum_{p=0}^{n-2} binom(n-1, p) c_{p+1} <H^{n-p-1}>,

and evaluates the fourth-order energy

    E = c1 - (c2^3 / (c2^3 - c2 c4)) (sqrt(3 c3^2 - 2 c2 c4) - c3),

falling back to c1 on eigenstate-like data where c2 vanishes.  Bootstrap
resampling of the per-circuit shot records supplies error bars.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import Circuit, Gate
from .pauli import CommutingSets, PauliString, PauliSum, sum_multiply
from .simulator import (
    ShotRecord,
    StateVector,
    apply_circuit,
    derived_rng,
    estimate_pauli_z,
    expectation,
    sample_z,
)

__all__ = [
    "TERM_CAP",
    "BootstrapResult",
    "FilterReport",
    "MeasurementPlan",
    "MomentEstimates",
    "MomentOperators",
    "PlanCircuit",
    "PlanTerm",
    "Qcm4Result",
    "bootstrap",
    "build_moments",
    "cumulants",
    "energy",
    "estimate",
    "moment_report",
    "pauli_filter",
    "plan",
]

TERM_CAP = 500_000


# ----------------------------------------------------------------------
# Hamiltonian powers
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class MomentOperators:
    """The operator powers H^n for n = 1..4.

    Attributes:
        powers: the four Pauli sums, index n-1 holding H^n.
        threshold: coefficient magnitude below which terms were cut.
        dropped: per-power coefficient weight removed by the cut.
    """

    powers: tuple[PauliSum, PauliSum, PauliSum, PauliSum]
    threshold: float
    dropped: tuple[float, float, float, float]

    @property
    def n_qubits(self) -> int:
        return self.powers[0].n_qubits

    @property
    def term_counts(self) -> tuple[int, int, int, int]:
        return tuple(len(p) for p in self.powers)


def build_moments(
    h: PauliSum, threshold: float = 0.0, cap: int = TERM_CAP
) -> MomentOperators:
    """Expands H^1..H^4 by repeated products, then prunes small terms.

    All four powers are constructed exactly before any truncation, so a
    nonzero threshold never compounds through the product chain.

    Raises:
        ValueError: H is not Hermitian, or a power exceeds ``cap`` terms.
    """
    if not h.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    full = [h]
    for power in (2, 3, 4):
        nxt = sum_multiply(full[-1], h)
        if len(nxt) > cap:
            raise ValueError(
                f"moment H^{power} exceeded the {cap}-term cap; raise the"
                " cap or truncate the Hamiltonian first"
            )
        full.append(nxt)
    cut = [p.truncate(threshold) for p in full]
    return MomentOperators(
        powers=tuple(p for p, _ in cut),
        threshold=threshold,
        dropped=tuple(w for _, w in cut),
    )


# ----------------------------------------------------------------------
# filtering
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class FilterReport:
    """Outcome of the ideal-expectation filter.

    ``audited`` keeps every dropped string with its classically computed
    expectation; the values (all of magnitude <= tol) were folded into
    the identity coefficients of the filtered powers, so exact moments
    are unchanged.
    """

    tol: float
    evaluated: int
    survivors: tuple[int, int, int, int]
    audited: tuple[tuple[PauliString, float], ...]


def pauli_filter(
    m: MomentOperators, psi: StateVector, tol: float = 1e-12
) -> tuple[MomentOperators, FilterReport]:
    """Removes strings whose ideal expectation in ``psi`` vanishes.

    Every distinct non-identity string is evaluated once; strings with
    |<psi|P|psi>| <= tol leave the measurement workload, and their exact
    contribution (coefficient times recorded expectation) moves into the
    identity term of each affected power.
    """
    if m.n_qubits != psi.n_qubits:
        raise ValueError("moment operators and state widths differ")
    values: dict[PauliString, float] = {}
    for power in m.powers:
        for string, _ in power.terms():
            if string != PauliString() and string not in values:
                probe = PauliSum(m.n_qubits, {string: 1.0})
                values[string] = expectation(psi, probe).real
    dropped = {s: v for s, v in values.items() if abs(v) <= tol}
    filtered = []
    survivors = []
    for power in m.powers:
        kept: dict[PauliString, complex] = {}
        shift = 0.0
        for string, coeff in power.terms():
            if string in dropped:
                shift += coeff.real * dropped[string]
            else:
                kept[string] = coeff
        kept[PauliString()] = kept.get(PauliString(), 0j) + shift
        filtered.append(PauliSum(m.n_qubits, kept))
        survivors.append(
            sum(1 for s in kept if s != PauliString())
        )
    report = FilterReport(
        tol=tol,
        evaluated=len(values),
        survivors=tuple(survivors),
        audited=tuple(
            sorted(dropped.items(), key=lambda t: t[0].sort_key())
        ),
    )
    return (
        MomentOperators(tuple(filtered), m.threshold, m.dropped),
        report,
    )


# ----------------------------------------------------------------------
# measurement planning
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class PlanTerm:
    """One measured string: its diagonalized form and its consumers.

    The set's Clifford U maps the string P to U P U^dag = sign Z(mask);
    ``uses`` lists (power n, coefficient of P in H^n) pairs.
    """

    string: PauliString
    z_mask: int
    sign: int
    uses: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class PlanCircuit:
    clifford: Circuit
    terms: tuple[PlanTerm, ...]


@dataclass(frozen=True)
class MeasurementPlan:
    """Commuting-set measurement circuits covering all four powers."""

    n_qubits: int
    mode: str
    circuits: tuple[PlanCircuit, ...]
    constants: tuple[float, float, float, float]

    @property
    def n_circuits(self) -> int:
        return len(self.circuits)


def _conjugate(
    x: int, z: int, sign: int, op: tuple
) -> tuple[int, int, int]:
    """Pushes one Clifford generator through a Pauli (U P U^dag)."""
    kind = op[0]
    if kind == "h":
        q = 1 << op[1]
        if x & q and z & q:
            sign = -sign
        xq, zq = x & q, z & q
        x = (x & ~q) | zq
        z = (z & ~q) | xq
    elif kind == "s":
        q = 1 << op[1]
        if x & q and z & q:
            sign = -sign
        z ^= x & q
    else:  # cz
        a, b = 1 << op[1], 1 << op[2]
        if x & a and x & b and bool(z & a) != bool(z & b):
            sign = -sign
        if x & a:
            z ^= b
        if x & b:
            z ^= a
    return x, z, sign


def _schema_gates(op: tuple) -> list[Gate]:
    half = math.pi / 2.0
    if op[0] == "h":
        return [Gate("h", (op[1],))]
    if op[0] == "s":
        return [Gate("rz", (op[1],), angle=half)]
    a, b = op[1], op[2]
    return [
        Gate("rz", (a,), angle=half),
        Gate("rz", (b,), angle=half),
        Gate("zzphase", tuple(sorted((a, b))), angle=-half),
    ]


def _independent_basis(strings: Sequence[PauliString], n: int) -> list[list[int]]:
    """GF(2)-independent subset of the symplectic vectors [x | z << n]."""
    basis: list[list[int]] = []
    pivots: dict[int, int] = {}
    for s in strings:
        vec = s.x_mask | (s.z_mask << n)
        reduced = vec
        for pivot, row in pivots.items():
            if reduced >> pivot & 1:
                reduced ^= row
        if reduced:
            pivots[reduced.bit_length() - 1] = reduced
            basis.append([s.x_mask, s.z_mask])
    return basis


def _diagonalizing_ops(rows: list[list[int]], n: int) -> list[tuple]:
    """Clifford generator sequence turning commuting rows into Z strings.

    Gaussian-eliminates the x-block to select pivot qubits, then clears
    each pivot row's x support (cz through a Hadamard pair), its own
    phase bit (s), its z couplings (cz, pairwise couplings cancel on
    both rows at once), and finally hops the lone X onto Z (h).
    """
    ops: list[tuple] = []

    def apply(op: tuple) -> None:
        ops.append(op)
        for row in rows:
            row[0], row[1], _ = _conjugate(row[0], row[1], 1, op)

    # reduced row echelon over the x-block; row ops only redefine the
    # generating set, no gates involved
    pivots: list[int] = []
    rank = 0
    for q in range(n):
        hit = next(
            (i for i in range(rank, len(rows)) if rows[i][0] >> q & 1), None
        )
        if hit is None:
            continue
        rows[rank], rows[hit] = rows[hit], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][0] >> q & 1:
                rows[i][0] ^= rows[rank][0]
                rows[i][1] ^= rows[rank][1]
        pivots.append(q)
        rank += 1

    for i, q in enumerate(pivots):
        for j in range(n):
            if j != q and rows[i][0] >> j & 1:
                apply(("h", j))
                apply(("cz", q, j))
                apply(("h", j))
    for i, q in enumerate(pivots):
        if rows[i][1] >> q & 1:
            apply(("s", q))
    for i, q in enumerate(pivots):
        for j in range(n):
            if j != q and rows[i][1] >> j & 1:
                apply(("cz", q, j))
    for q in pivots:
        apply(("h", q))

    if any(row[0] for row in rows):
        raise ValueError("commuting set failed to diagonalize; grouping bug")
    return ops


def plan(m: MomentOperators, mode: str = "full") -> MeasurementPlan:
    """Builds one measurement circuit per commuting set of strings.

    Identical strings appearing in several powers are deduplicated and
    measured once.  Identity coefficients become per-power constants.

    Raises:
        ValueError: a set member fails to conjugate to a Z string, which
            indicates an inconsistent grouping.
    """
    n = m.n_qubits
    uses: dict[PauliString, list[tuple[int, float]]] = {}
    constants = [0.0, 0.0, 0.0, 0.0]
    for idx, power in enumerate(m.powers):
        for string, coeff in power.terms():
            if string == PauliString():
                constants[idx] += coeff.real
            else:
                uses.setdefault(string, []).append((idx + 1, coeff.real))
    distinct = PauliSum(n, {s: 1.0 for s in uses})
    groups = distinct.group_commuting(mode)

    circuits = []
    for group in groups.sets:
        strings = [s for s, _ in group]
        ops = _diagonalizing_ops(_independent_basis(strings, n), n)
        gates: list[Gate] = []
        for op in ops:
            gates.extend(_schema_gates(op))
        terms = []
        for s in strings:
            x, z, sign = s.x_mask, s.z_mask, 1
            for op in ops:
                x, z, sign = _conjugate(x, z, sign, op)
            if x:
                raise ValueError(
                    f"set member {s.to_label()!r} failed to diagonalize;"
                    " grouping bug"
                )
            terms.append(
                PlanTerm(
                    string=s, z_mask=z, sign=sign, uses=tuple(uses[s])
                )
            )
        circuits.append(
            PlanCircuit(clifford=Circuit(n, gates), terms=tuple(terms))
        )
    return MeasurementPlan(
        n_qubits=n,
        mode=mode,
        circuits=tuple(circuits),
        constants=tuple(constants),
    )


# ----------------------------------------------------------------------
# estimation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class MomentEstimates:
    """Estimated <H^n> with the shot records that produced them."""

    moments: tuple[float, float, float, float]
    plan: MeasurementPlan
    records: tuple[ShotRecord, ...] | None
    spc: int | None
    seed: int

    def __getitem__(self, power: int) -> float:
        if power not in (1, 2, 3, 4):
            raise KeyError("moment powers run from 1 to 4")
        return self.moments[power - 1]


def _shot_allocation(
    measurement_plan: MeasurementPlan, spc: int, allocation: str
) -> list[int]:
    """Per-circuit shot counts summing to spc * n_circuits.

    Uniform allocation repeats ``spc``; weighted allocation splits the
    same total budget proportionally to each circuit's coefficient
    1-norm (a proxy for its contribution to the moment variance), with
    a floor of one shot per circuit.
    """
    n = measurement_plan.n_circuits
    if allocation == "uniform":
        return [spc] * n
    if allocation != "weighted":
        raise ValueError(f"unknown allocation {allocation!r}")
    weights = [
        sum(abs(a) for t in c.terms for _, a in t.uses)
        for c in measurement_plan.circuits
    ]
    total = sum(weights)
    budget = spc * n
    if total == 0.0:
        return [spc] * n
    counts = [max(1, round(budget * w / total)) for w in weights]
    # rounding drift lands on the heaviest circuit
    counts[weights.index(max(weights))] += budget - sum(counts)
    return counts


def _run_circuit(
    circuit: PlanCircuit,
    psi: StateVector,
    spc: int | None,
    seed: int,
    ci: int,
    basis: np.ndarray,
) -> tuple[ShotRecord | None, list[float]]:
    """One circuit's acquisition and per-term values (exact when spc is None)."""
    rotated = apply_circuit(psi, circuit.clifford)
    if spc is None:
        probs = np.abs(rotated.amplitudes) ** 2
        record = None
        values = [
            float(probs @ (1.0 - 2.0 * (np.bitwise_count(basis & t.z_mask) & 1)))
            for t in circuit.terms
        ]
    else:
        record = sample_z(rotated, spc, seed, (ci,))
        values = [estimate_pauli_z(record, t.z_mask) for t in circuit.terms]
    return record, values


def estimate(
    measurement_plan: MeasurementPlan,
    psi: StateVector,
    spc: int | None = None,
    seed: int = 0,
    mode: str = "exact",
    allocation: str = "uniform",
    threads: int = 1,
) -> MomentEstimates:
    """Runs every plan circuit on ``psi`` and assembles the moments.

    Each circuit's Clifford is applied to the state, a single Z-basis
    acquisition (exact distribution or ``spc`` shots under the stream
    (seed, circuit index)) serves all of its member strings, and
    <H^n> = constants_n + sum sign a_{i,n} <Z(mask_i)>.

    Circuits are independent; with ``threads > 1`` they run on a thread
    pool.  Assembly always walks circuits in index order, so the result
    is identical at any thread count.
    """
    if measurement_plan.n_qubits != psi.n_qubits:
        raise ValueError("plan and state widths differ")
    if mode not in ("exact", "shots"):
        raise ValueError(f"unknown estimation mode {mode!r}")
    if mode == "shots" and (spc is None or spc < 1):
        raise ValueError("shots mode needs spc >= 1")
    if threads < 1:
        raise ValueError("need at least one thread")
    if mode == "shots":
        counts = _shot_allocation(measurement_plan, spc, allocation)
    else:
        counts = [None] * measurement_plan.n_circuits
    basis = np.arange(1 << psi.n_qubits)
    jobs = [
        (circuit, psi, counts[ci], seed, ci, basis)
        for ci, circuit in enumerate(measurement_plan.circuits)
    ]
    if threads == 1 or len(jobs) < 2:
        outputs = [_run_circuit(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(lambda job: _run_circuit(*job), jobs))
    moments = list(measurement_plan.constants)
    records: list[ShotRecord] = []
    for circuit, (record, values) in zip(measurement_plan.circuits, outputs):
        if record is not None:
            records.append(record)
        for term, value in zip(circuit.terms, values):
            for power, coeff in term.uses:
                moments[power - 1] += coeff * term.sign * value
    return MomentEstimates(
        moments=tuple(moments),
        plan=measurement_plan,
        records=tuple(records) if mode == "shots" else None,
        spc=spc if mode == "shots" else None,
        seed=seed,
    )


# ----------------------------------------------------------------------
# cumulants and energy
# ----------------------------------------------------------------------
def cumulants(
    moments: MomentEstimates | Sequence[float],
) -> tuple[float, float, float, float]:
    """Connected moments c1..c4 from the raw moments <H^1>..<H^4>."""
    if isinstance(moments, MomentEstimates):
        raw = moments.moments
    else:
        raw = tuple(float(x) for x in moments)
    if len(raw) != 4:
        raise ValueError("need exactly four moments")
    c: list[float] = []
    for n in range(1, 5):
        value = raw[n - 1]
        for p in range(n - 1):
            value -= math.comb(n - 1, p) * c[p] * raw[n - p - 2]
        c.append(value)
    return tuple(c)


def energy(
    cums: Sequence[float], guard: float = 1e-10
) -> float:
    """Fourth-order cumulant energy estimate.

    Eigenstate-like data (|c2| < guard) returns c1, the exact limit of
    the formula.  The discriminant 3 c3^2 - 2 c2 c4 may dip slightly
    negative under shot noise and is clamped within 1e-9; beyond that,
    or on a vanishing denominator c2^3 - c2 c4, the input is treated as
    inconsistent.
    """
    c1, c2, c3, c4 = (float(x) for x in cums)
    if abs(c2) < guard:
        return c1
    disc = 3.0 * c3 * c3 - 2.0 * c2 * c4
    if disc < -1e-9:
        raise ValueError(f"negative discriminant {disc} beyond tolerance")
    disc = max(disc, 0.0)
    denom = c2**3 - c2 * c4
    if denom == 0.0:
        raise ValueError("zero denominator in the energy formula")
    return c1 - (c2**3 / denom) * (math.sqrt(disc) - c3)


# ----------------------------------------------------------------------
# bootstrap
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class BootstrapResult:
    """Resampled energy distribution summary."""

    mean: float
    std: float
    energies: np.ndarray
    seed: int

    @property
    def resamples(self) -> int:
        return len(self.energies)

    def to_csv(self) -> str:
        lines = ["resample,energy"]
        lines.extend(f"{b},{e!r}" for b, e in enumerate(map(float, self.energies)))
        return "\n".join(lines) + "\n"


def bootstrap(
    est: MomentEstimates, resamples: int = 500, seed: int = 0
) -> BootstrapResult:
    """Bootstrap mean and std of the energy over shot-record resamples.

    Each circuit's recorded bitstrings are resampled with replacement
    (multinomial over the observed outcomes, stream (seed, circuit)),
    moments are reassembled, and the energy formula is re-evaluated per
    resample.

    Raises:
        ValueError: exact-mode estimates carry no shot records.
    """
    if est.records is None:
        raise ValueError("bootstrap needs shot records; run estimate in"
                         " shots mode")
    if resamples < 2:
        raise ValueError("need at least two resamples")
    moments = np.tile(np.asarray(est.plan.constants), (resamples, 1))
    for ci, circuit in enumerate(est.plan.circuits):
        record = est.records[ci]
        outcomes, counts = np.unique(record.outcomes, return_counts=True)
        probs = counts / record.spc
        draws = derived_rng(seed, ci).multinomial(
            record.spc, probs, size=resamples
        )
        for term in circuit.terms:
            parity = np.bitwise_count(outcomes & term.z_mask) & 1
            signs = term.sign * (1.0 - 2.0 * parity)
            values = draws @ signs / record.spc
            for power, coeff in term.uses:
                moments[:, power - 1] += coeff * values
    energies = np.array([energy(cumulants(row)) for row in moments])
    # variance of shifted data; exact zero when every resample agrees
    return BootstrapResult(
        mean=float(np.mean(energies)),
        std=float(np.std(energies - energies[0], ddof=1)),
        energies=energies,
        seed=seed,
    )


# ----------------------------------------------------------------------
# reporting
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Qcm4Result:
    """Cumulants, energy, and (when available) bootstrap statistics."""

    cumulants: tuple[float, float, float, float]
    energy: float
    bootstrap_mean: float | None
    bootstrap_std: float | None
    resamples: int

    @classmethod
    def from_estimates(
        cls,
        est: MomentEstimates,
        bootstrap_result: BootstrapResult | None = None,
    ) -> "Qcm4Result":
        cums = cumulants(est)
        return cls(
            cumulants=cums,
            energy=energy(cums),
            bootstrap_mean=(
                None if bootstrap_result is None else bootstrap_result.mean
            ),
            bootstrap_std=(
                None if bootstrap_result is None else bootstrap_result.std
            ),
            resamples=(
                0 if bootstrap_result is None else bootstrap_result.resamples
            ),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "cumulants": list(self.cumulants),
                "energy": self.energy,
                "bootstrap_mean": self.bootstrap_mean,
                "bootstrap_std": self.bootstrap_std,
                "resamples": self.resamples,
            },
            indent=1,
        )


def moment_report(
    m: MomentOperators,
    measurement_plan: MeasurementPlan,
    filter_report: FilterReport | None = None,
) -> str:
    """JSON summary: term counts, circuit count, cut and filter sizes."""
    payload = {
        "term_counts": list(m.term_counts),
        "threshold": m.threshold,
        "dropped_weights": list(m.dropped),
        "n_circuits": measurement_plan.n_circuits,
        "grouping_mode": measurement_plan.mode,
    }
    if filter_report is not None:
        payload["filter"] = {
            "tol": filter_report.tol,
            "evaluated": filter_report.evaluated,
            "survivors": list(filter_report.survivors),
            "dropped": len(filter_report.audited),
        }
    return json.dumps(payload, indent=1)
