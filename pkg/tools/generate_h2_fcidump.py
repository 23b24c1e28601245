"""Regenerates the bundled H2/STO-3G fixtures from closed-form integrals.

All quantities are computed with the standard s-orbital Gaussian integral
formulas (overlap, kinetic, nuclear attraction, repulsion; see Szabo &
Ostlund, Modern Quantum Chemistry, Appendix A) over the STO-3G hydrogen
contraction.  For a symmetric diatomic the molecular orbitals are fixed
by symmetry (gerade/ungerade combinations), so no self-consistent field
loop is needed; the same script cross-checks the dump against the exact
two-determinant configuration-interaction matrix before writing it.

Usage: python3 tools/generate_h2_fcidump.py
"""

import pathlib

import numpy as np
from scipy.special import erf

# STO-3G hydrogen 1s contraction
EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
WEIGHTS = np.array([0.15432897, 0.53532814, 0.44463454])

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "src" / "gsee" / "fixtures"

BONDS_BOHR = {"h2_eq": 1.4011, "h2_stretched": 2.8}


def boys0(t: float) -> float:
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * np.sqrt(np.pi / t) * erf(np.sqrt(t))


def contracted_pairs():
    norms = (2.0 * EXPONENTS / np.pi) ** 0.75
    return list(zip(EXPONENTS, WEIGHTS * norms))


def ao_integrals(r: float):
    """Returns (S, Hcore, ERI) in the two-center s-orbital AO basis."""
    prims = contracted_pairs()
    centers = np.array([0.0, r])
    n = 2
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            rab2 = (centers[a] - centers[b]) ** 2
            for alpha, ca in prims:
                for beta, cb in prims:
                    p = alpha + beta
                    mu = alpha * beta / p
                    pref = ca * cb * np.exp(-mu * rab2)
                    s[a, b] += pref * (np.pi / p) ** 1.5
                    t[a, b] += pref * mu * (3.0 - 2.0 * mu * rab2) * (np.pi / p) ** 1.5
                    com = (alpha * centers[a] + beta * centers[b]) / p
                    for nuc in centers:
                        v[a, b] -= pref * (2.0 * np.pi / p) * boys0(p * (com - nuc) ** 2)
    eri = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    rab2 = (centers[a] - centers[b]) ** 2
                    rcd2 = (centers[c] - centers[d]) ** 2
                    acc = 0.0
                    for alpha, ca in prims:
                        for beta, cb in prims:
                            p = alpha + beta
                            pc = (alpha * centers[a] + beta * centers[b]) / p
                            ekab = np.exp(-alpha * beta / p * rab2)
                            for gamma, cc in prims:
                                for delta, cd in prims:
                                    q = gamma + delta
                                    qc = (gamma * centers[c] + delta * centers[d]) / q
                                    ekcd = np.exp(-gamma * delta / q * rcd2)
                                    acc += (
                                        ca * cb * cc * cd * ekab * ekcd
                                        * 2.0 * np.pi ** 2.5
                                        / (p * q * np.sqrt(p + q))
                                        * boys0(p * q / (p + q) * (pc - qc) ** 2)
                                    )
                    eri[a, b, c, d] = acc
    return s, t + v, eri


def mo_integrals(r: float):
    s, hcore, eri = ao_integrals(r)
    overlap = s[0, 1]
    c = np.array(
        [
            [1.0 / np.sqrt(2.0 * (1.0 + overlap)), 1.0 / np.sqrt(2.0 * (1.0 - overlap))],
            [1.0 / np.sqrt(2.0 * (1.0 + overlap)), -1.0 / np.sqrt(2.0 * (1.0 - overlap))],
        ]
    )
    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", c, c, c, c, eri, optimize=True)
    e_nuc = 1.0 / r
    return h_mo, eri_mo, e_nuc


def ci_oracle(h_mo, eri_mo, e_nuc):
    """Exact singlet CI over {gerade^2, ungerade^2}: matrix, energy, vector."""
    h11 = 2.0 * h_mo[0, 0] + eri_mo[0, 0, 0, 0] + e_nuc
    h22 = 2.0 * h_mo[1, 1] + eri_mo[1, 1, 1, 1] + e_nuc
    h12 = eri_mo[0, 1, 0, 1]
    mat = np.array([[h11, h12], [h12, h22]])
    vals, vecs = np.linalg.eigh(mat)
    vec = vecs[:, 0]
    if vec[0] < 0:
        vec = -vec
    return mat, float(vals[0]), vec


def write_fcidump(path: pathlib.Path, h_mo, eri_mo, e_nuc):
    lines = ["&FCI NORB=2,NELEC=2,MS2=0,", " ORBSYM=1,1,", " ISYM=1,", "&END"]

    def fmt(value, i, j, k, l):
        return f"{value: .16E} {i:3d} {j:3d} {k:3d} {l:3d}"

    seen = set()
    for p in range(2):
        for q in range(p + 1):
            for r in range(2):
                for s in range(r + 1):
                    if (p, q) < (r, s):
                        continue
                    val = eri_mo[p, q, r, s]
                    if abs(val) < 1e-12 or (p, q, r, s) in seen:
                        continue
                    seen.add((p, q, r, s))
                    lines.append(fmt(val, p + 1, q + 1, r + 1, s + 1))
    for p in range(2):
        for q in range(p + 1):
            if abs(h_mo[p, q]) >= 1e-12:
                lines.append(fmt(h_mo[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(e_nuc, 0, 0, 0, 0))
    path.write_text("\n".join(lines) + "\n")


def write_ci_json(path: pathlib.Path, vec):
    import json

    payload = {
        "norb": 2,
        "dets": [
            {"mask": "0b0011", "coeff": float(vec[0])},
            {"mask": "0b1100", "coeff": float(vec[1])},
        ],
    }
    path.write_text(json.dumps(payload, indent=1) + "\n")


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for stem, r in BONDS_BOHR.items():
        h_mo, eri_mo, e_nuc = mo_integrals(r)
        mat, e_fci, vec = ci_oracle(h_mo, eri_mo, e_nuc)
        e_hf = mat[0, 0]
        write_fcidump(FIXTURES / f"{stem}.fcidump", h_mo, eri_mo, e_nuc)
        write_ci_json(FIXTURES / f"{stem}_ci.json", vec)
        print(f"{stem}: R = {r} bohr")
        print(f"  h11 = {h_mo[0, 0]: .6f}  h22 = {h_mo[1, 1]: .6f}")
        print(
            f"  (11|11) = {eri_mo[0, 0, 0, 0]: .6f}  (22|22) = {eri_mo[1, 1, 1, 1]: .6f}"
        )
        print(
            f"  (11|22) = {eri_mo[0, 0, 1, 1]: .6f}  (12|12) = {eri_mo[0, 1, 0, 1]: .6f}"
        )
        print(f"  E_nuc = {e_nuc: .6f}  E_HF = {e_hf: .6f}  E_FCI = {e_fci: .6f}")
        print(f"  CI vector = {vec}")
    # sanity pins for the equilibrium geometry (literature ballpark)
    h_mo, eri_mo, e_nuc = mo_integrals(BONDS_BOHR["h2_eq"])
    _, e_fci, _ = ci_oracle(h_mo, eri_mo, e_nuc)
    assert abs(e_fci - (-1.1373)) < 2e-3, e_fci
    assert abs(h_mo[0, 0] - (-1.2525)) < 2e-3, h_mo[0, 0]


if __name__ == "__main__":
    main()
