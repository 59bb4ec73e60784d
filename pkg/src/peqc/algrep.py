"""Implicit bit-sliced algebraic representation of circuit unitaries.

A 2^n x 2^n matrix over Z[w, 1/sqrt(2)] (w = exp(i*pi/4)) is stored as one
shared sqrt(2) exponent plus four coefficient channels, one per power of w.
Each channel is a two's-complement bit vector of BDDs over 2n Boolean
variables: variable 2q encodes row bit q (x_q), variable 2q+1 column bit q
(y_q), interleaved in that order, with qubit 0 the most significant index
bit.  Entry (i, j) of channel c is the integer read from its slice BDDs
under the assignment X = binary(i), Y = binary(j).

Gates act as entry-wise row transformations (left multiplication by the
gate unitary) or column transformations (right multiplication): basis
permutations exchange cofactors, phases rotate the four channels through
the powers of w (negating on wrap-around, since w^4 = -1), and the Hadamard
replaces the two cofactors on its qubit by their bit-sliced sum and
difference while incrementing the sqrt(2) exponent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bdd import FALSE, TRUE, BddManager
from .circuit import Circuit, CircuitError, Gate, invert
from .oracle import DenseMatrix, SizeLimitError

DEFAULT_TO_DENSE_BOUND = 10

_PHASE_POWER = {"z": 4, "s": 2, "sdg": 6, "t": 1, "tdg": 7}


@dataclass(frozen=True)
class MatrixVariableMap:
    """Variable indices used for row and column bits, per qubit."""

    row_vars: tuple
    col_vars: tuple

    @classmethod
    def interleaved(cls, n: int) -> "MatrixVariableMap":
        return cls(
            row_vars=tuple(2 * q for q in range(n)),
            col_vars=tuple(2 * q + 1 for q in range(n)),
        )


def _ripple_add(mgr: BddManager, xs, ys, carry):
    out = []
    for x, y in zip(xs, ys):
        if x == FALSE and y == FALSE and carry == FALSE:
            out.append(FALSE)
            continue
        xy = mgr.apply_xor(x, y)
        out.append(mgr.apply_xor(xy, carry))
        carry = mgr.apply_or(mgr.apply_and(x, y), mgr.apply_and(carry, xy))
    return out


def _ripple_sub(mgr: BddManager, xs, ys):
    # xs - ys = xs + ~ys + 1
    return _ripple_add(mgr, xs, [-y for y in ys], TRUE)


def _negate(mgr: BddManager, xs):
    # two's complement; the caller guarantees one spare high bit
    out = []
    carry = TRUE
    for x in xs:
        nx = -x
        out.append(mgr.apply_xor(nx, carry))
        carry = mgr.apply_and(nx, carry)
    return out


class AlgebraicMatrix:
    __slots__ = (
        "manager", "n", "sqrt2_exponent", "bits", "varmap",
        "max_width_seen", "__weakref__",
    )

    def __init__(self, manager, n, sqrt2_exponent, bits, varmap):
        self.manager = manager
        self.n = n
        self.sqrt2_exponent = sqrt2_exponent
        self.bits = bits  # bits[p][i]: handle of bit i of the w^p channel
        self.varmap = varmap
        self.max_width_seen = len(bits[0])
        manager.register(self)

    # -- manager integration ------------------------------------------------

    def gc_roots(self):
        for ch in self.bits:
            yield from ch

    @property
    def width(self) -> int:
        return len(self.bits[0])

    def copy(self) -> "AlgebraicMatrix":
        m = AlgebraicMatrix(
            self.manager, self.n, self.sqrt2_exponent,
            [ch[:] for ch in self.bits], self.varmap,
        )
        m.max_width_seen = self.max_width_seen
        return m

    # -- entry decoding -----------------------------------------------------

    def _assignment(self, i: int, j: int):
        values = [0] * (2 * self.n)
        for q in range(self.n):
            values[self.varmap.row_vars[q]] = (i >> (self.n - 1 - q)) & 1
            values[self.varmap.col_vars[q]] = (j >> (self.n - 1 - q)) & 1
        return values

    def coefficient(self, channel: int, i: int, j: int) -> int:
        values = self._assignment(i, j)
        mgr = self.manager
        ch = self.bits[channel]
        coeff = 0
        for s, b in enumerate(ch[:-1]):
            if mgr.evaluate(b, values):
                coeff += 1 << s
        if mgr.evaluate(ch[-1], values):
            coeff -= 1 << (len(ch) - 1)
        return coeff

    def entry(self, i: int, j: int):
        from .oracle import AlgebraicComplex

        return AlgebraicComplex(
            self.sqrt2_exponent,
            self.coefficient(0, i, j),
            self.coefficient(1, i, j),
            self.coefficient(2, i, j),
            self.coefficient(3, i, j),
        )

    # -- normalization ------------------------------------------------------

    def _extend(self, amount: int = 1):
        for ch in self.bits:
            top = ch[-1]
            ch.extend([top] * amount)

    def _shrink(self):
        bits = self.bits
        while len(bits[0]) >= 2 and all(ch[-1] == ch[-2] for ch in bits):
            for ch in bits:
                ch.pop()

    def _normalize(self):
        self._shrink()
        bits = self.bits
        while (
            self.sqrt2_exponent >= 2
            and len(bits[0]) >= 2
            and all(ch[0] == FALSE for ch in bits)
        ):
            for ch in bits:
                ch.pop(0)
            self.sqrt2_exponent -= 2
        if self.width > self.max_width_seen:
            self.max_width_seen = self.width

    # -- gate primitives ----------------------------------------------------

    def _swap_all(self, var: int):
        mgr = self.manager
        self.bits = [[mgr.swap_branches(b, var) for b in ch] for ch in self.bits]

    def _guarded_swap(self, var: int, guard: int):
        mgr = self.manager
        self.bits = [
            [mgr.ite(guard, mgr.swap_branches(b, var), b) for b in ch]
            for ch in self.bits
        ]

    def _phase(self, j: int, guard: int):
        """Multiply the entries selected by guard by w**j (TRUE = all)."""
        j %= 8
        if j == 0:
            return
        mgr = self.manager
        self._extend(1)
        w = self.width
        src = self.bits
        negated = {}
        rotated = []
        for q in range(4):
            p = (q - j) % 4
            if ((p + j) // 4) % 2:
                if p not in negated:
                    negated[p] = _negate(mgr, src[p])
                rotated.append(negated[p])
            else:
                rotated.append(src[p])
        if guard == TRUE:
            self.bits = [list(r) for r in rotated]
        else:
            self.bits = [
                [mgr.ite(guard, rotated[q][i], src[q][i]) for i in range(w)]
                for q in range(4)
            ]
        self._normalize()

    def _hadamard(self, var: int):
        mgr = self.manager
        self._extend(1)
        w = self.width
        v = mgr.var(var)
        new_bits = []
        for ch in self.bits:
            lo = [mgr.cofactor(b, var, 0) for b in ch]
            hi = [mgr.cofactor(b, var, 1) for b in ch]
            total = _ripple_add(mgr, lo, hi, FALSE)
            diff = _ripple_sub(mgr, lo, hi)
            new_bits.append([mgr.ite(v, diff[i], total[i]) for i in range(w)])
        self.bits = new_bits
        self.sqrt2_exponent += 1
        self._normalize()

    def _multiply_sqrt2(self):
        # sqrt(2) = w - w^3: channels (c0,c1,c2,c3) -> (c1-c3, c0+c2, c1+c3, c2-c0)
        mgr = self.manager
        self._extend(1)
        c0, c1, c2, c3 = self.bits
        self.bits = [
            _ripple_sub(mgr, c1, c3),
            _ripple_add(mgr, c0, c2, FALSE),
            _ripple_add(mgr, c1, c3, FALSE),
            _ripple_sub(mgr, c2, c0),
        ]
        self.sqrt2_exponent += 1
        self._shrink()
        if self.width > self.max_width_seen:
            self.max_width_seen = self.width

    # -- gate dispatch ------------------------------------------------------

    def _gate_var(self, qubit: int, side: str) -> int:
        if side == "left":
            return self.varmap.row_vars[qubit]
        return self.varmap.col_vars[qubit]

    def _apply_gate(self, gate: Gate, side: str = "left"):
        if max(gate.qubits) >= self.n:
            raise CircuitError(f"gate {gate.kind} {gate.qubits} exceeds n={self.n}")
        mgr = self.manager
        kind = gate.kind
        if kind == "h":
            self._hadamard(self._gate_var(gate.qubits[0], side))
        elif kind == "x":
            self._swap_all(self._gate_var(gate.qubits[0], side))
        elif kind in _PHASE_POWER:
            guard = mgr.var(self._gate_var(gate.qubits[0], side))
            self._phase(_PHASE_POWER[kind], guard)
        elif kind == "y":
            var = self._gate_var(gate.qubits[0], side)
            guard = mgr.var(var)
            if side == "left":
                self._phase(4, guard)
                self._swap_all(var)
            else:
                self._swap_all(var)
                self._phase(4, guard)
            self._phase(2, TRUE)
        elif kind in ("cx", "ccx", "mcx"):
            guard = TRUE
            for c in gate.controls:
                guard = mgr.apply_and(guard, mgr.var(self._gate_var(c, side)))
            self._guarded_swap(self._gate_var(gate.target, side), guard)
        elif kind == "cz":
            a, b = gate.qubits
            guard = mgr.apply_and(
                mgr.var(self._gate_var(a, side)), mgr.var(self._gate_var(b, side))
            )
            self._phase(4, guard)
        elif kind == "swap":
            a, b = gate.qubits
            for ctrl, tgt in ((a, b), (b, a), (a, b)):
                guard = mgr.var(self._gate_var(ctrl, side))
                self._guarded_swap(self._gate_var(tgt, side), guard)
        else:
            raise CircuitError(f"unsupported gate kind {kind!r}")


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def identity(n: int, manager: BddManager | None = None) -> AlgebraicMatrix:
    """The 2^n x 2^n identity: channel w^0 is the row=column indicator."""
    if n < 1:
        raise CircuitError("n must be at least 1")
    if manager is None:
        manager = BddManager(2 * n)
    elif manager.num_vars < 2 * n:
        raise CircuitError("manager has too few variables")
    varmap = MatrixVariableMap.interleaved(n)
    diag = TRUE
    for q in reversed(range(n)):
        vx = manager.var(varmap.row_vars[q])
        vy = manager.var(varmap.col_vars[q])
        diag = manager.apply_and(-manager.apply_xor(vx, vy), diag)
    bits = [[diag, FALSE], [FALSE, FALSE], [FALSE, FALSE], [FALSE, FALSE]]
    return AlgebraicMatrix(manager, n, 0, bits, varmap)


def apply_gate(matrix: AlgebraicMatrix, gate: Gate, side: str = "left") -> AlgebraicMatrix:
    """New matrix U_g * M (side='left') or M * U_g (side='right')."""
    out = matrix.copy()
    out._apply_gate(gate, side)
    return out


def apply_circuit(matrix: AlgebraicMatrix, circuit: Circuit,
                  side: str = "left") -> AlgebraicMatrix:
    """New matrix U_C * M (side='left') or M * U_C (side='right')."""
    out = matrix.copy()
    gates = circuit.gates if side == "left" else tuple(reversed(circuit.gates))
    for gate in gates:
        out._apply_gate(gate, side)
        matrix.manager.maybe_collect()
    return out


def apply_inverse_circuit(matrix: AlgebraicMatrix, circuit: Circuit,
                          side: str = "left") -> AlgebraicMatrix:
    """New matrix U_C^dagger * M (side='left') or M * U_C^dagger."""
    return apply_circuit(matrix, invert(circuit), side)


def multiply_sqrt2(matrix: AlgebraicMatrix) -> AlgebraicMatrix:
    """Value-preserving rewrite: coefficients times sqrt(2), exponent + 1."""
    out = matrix.copy()
    out._multiply_sqrt2()
    return out


def equal_matrices(m1: AlgebraicMatrix, m2: AlgebraicMatrix) -> bool:
    """Exact equality of the represented complex matrices.

    Equalizes the sqrt(2) exponents by multiplying the smaller side by
    sqrt(2), divides out common factors of 2 shared by both sides, aligns
    the slice widths by sign extension, and then requires every slice BDD
    to coincide (canonicity turns function equality into handle equality).
    """
    if m1.manager is not m2.manager:
        raise CircuitError("matrices belong to different managers")
    if m1.n != m2.n:
        raise CircuitError("matrix sizes differ")
    a = m1.copy()
    b = m2.copy()
    while a.sqrt2_exponent < b.sqrt2_exponent:
        a._multiply_sqrt2()
    while b.sqrt2_exponent < a.sqrt2_exponent:
        b._multiply_sqrt2()
    while (
        a.sqrt2_exponent >= 2
        and a.width >= 2
        and b.width >= 2
        and all(ch[0] == FALSE for ch in a.bits)
        and all(ch[0] == FALSE for ch in b.bits)
    ):
        for ch in a.bits:
            ch.pop(0)
        for ch in b.bits:
            ch.pop(0)
        a.sqrt2_exponent -= 2
        b.sqrt2_exponent -= 2
    if a.width < b.width:
        a._extend(b.width - a.width)
    elif b.width < a.width:
        b._extend(a.width - b.width)
    return all(ca == cb for cha, chb in zip(a.bits, b.bits)
               for ca, cb in zip(cha, chb))


def to_dense(matrix: AlgebraicMatrix, bound: int = DEFAULT_TO_DENSE_BOUND) -> DenseMatrix:
    """Explicit matrix of exact scalars (small n only)."""
    if matrix.n > bound:
        raise SizeLimitError(f"to_dense limited to {bound} qubits, have {matrix.n}")
    size = 1 << matrix.n
    coeffs = np.zeros((4, size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            for p in range(4):
                coeffs[p][i, j] = matrix.coefficient(p, i, j)
    try:
        coeffs = coeffs.astype(np.int64)
    except OverflowError:
        pass
    return DenseMatrix(matrix.n, matrix.sqrt2_exponent, coeffs)
