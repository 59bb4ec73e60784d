"""Partial equivalence checking of quantum circuits.

Two circuits over the same data/measured/ancilla qubit layout are partially
equivalent when, for every input state of the data qubits, measuring the
designated qubit prefix yields identical outcome distributions.  This
package decides that relation exactly: implicitly with bit-sliced algebraic
matrices over binary decision diagrams, and explicitly with an exact dense
oracle for cross-validation at small sizes.
"""

from .algrep import (
    AlgebraicMatrix,
    MatrixVariableMap,
    apply_circuit,
    apply_gate,
    apply_inverse_circuit,
    equal_matrices,
    identity,
    multiply_sqrt2,
    to_dense,
)
from .bdd import Bdd, BddError, BddManager
from .benchgen import (
    GenConfig,
    decompose_ccx,
    find_pe_subcircuit_pairs,
    gen_pe_pair,
    gen_te_pair,
)
from .checker import (
    check,
    pec_general,
    pec_zero_ancilla,
    strip_inert_ancillas,
    total_equivalence,
)
from .circuit import Circuit, CircuitError, Gate, ParseError, invert, pad_ancillas, parse, serialize
from .oracle import (
    AlgebraicComplex,
    ColumnSegment,
    DenseMatrix,
    SizeLimitError,
    dense_pe_check,
    dense_pe_check_zero_ancilla,
    dense_unitary,
    extract_column_segments,
    masked_pipeline_check,
    monte_carlo_falsify,
    outcome_probability,
    permutation_unitary,
    totally_equivalent_dense,
)
from .verdict import Counterexample, Verdict

__version__ = "0.1.0"

__all__ = [
    "AlgebraicComplex",
    "AlgebraicMatrix",
    "Bdd",
    "BddError",
    "BddManager",
    "Circuit",
    "CircuitError",
    "ColumnSegment",
    "Counterexample",
    "DenseMatrix",
    "Gate",
    "GenConfig",
    "MatrixVariableMap",
    "ParseError",
    "SizeLimitError",
    "Verdict",
    "apply_circuit",
    "apply_gate",
    "apply_inverse_circuit",
    "check",
    "decompose_ccx",
    "dense_pe_check",
    "dense_pe_check_zero_ancilla",
    "dense_unitary",
    "equal_matrices",
    "extract_column_segments",
    "find_pe_subcircuit_pairs",
    "gen_pe_pair",
    "gen_te_pair",
    "identity",
    "invert",
    "masked_pipeline_check",
    "monte_carlo_falsify",
    "multiply_sqrt2",
    "outcome_probability",
    "pad_ancillas",
    "parse",
    "pec_general",
    "pec_zero_ancilla",
    "permutation_unitary",
    "serialize",
    "strip_inert_ancillas",
    "to_dense",
    "total_equivalence",
    "totally_equivalent_dense",
]
