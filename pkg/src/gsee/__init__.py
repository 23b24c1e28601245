"""Ground-state energy estimation toolkit.

Two estimation pipelines over an exact dense state-vector simulator:

* statistical phase estimation — overlap time series fitted with the
  QCELS objective, acquired exactly, from sampled Hadamard-test circuits,
  or from variationally recompiled shallow circuits;
* a fourth-order Hamiltonian-moment/cumulant energy estimate with Pauli
  filtering, coefficient truncation, commuting-set measurement, and
  bootstrap error bars.

Supporting layers: Pauli algebra (:mod:`gsee.pauli`), molecular-integral
ingestion and qubit reduction (:mod:`gsee.chem`), the simulator
(:mod:`gsee.simulator`), circuit builders (:mod:`gsee.circuits`), and
variational recompilation (:mod:`gsee.recompile`).
"""

__version__ = "0.1.0"
