"""Exact dense-matrix ground truth for partial equivalence checking.

Everything here is exact integer arithmetic in the ring Z[w, 1/sqrt(2)],
w = exp(i*pi/4): a scalar is (c3*w^3 + c2*w^2 + c1*w + c0) / sqrt(2)**e.
Matrices carry one shared sqrt(2) exponent and four integer coefficient
matrices, one per power of w.  This covers every gate in the supported set,
so all comparisons are exact with zero tolerance.

The module provides the direct decision procedures used as oracles for the
decision-diagram checkers: the column-segment inner-product criterion for
general partial equivalence, the block-diagonal miter criterion for the
zero-ancilla case, a literal masked-matrix pipeline realization of the
former, and a Monte-Carlo falsifier (which can only ever refute, never
prove, equivalence).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, CircuitError, Gate
from .verdict import Counterexample, Verdict

DEFAULT_DENSE_BOUND = 12

_INT64_SAFE = 1 << 40


class SizeLimitError(Exception):
    """A dense computation would exceed the configured qubit bound."""


# ---------------------------------------------------------------------------
# exact scalars
# ---------------------------------------------------------------------------

def _sqrt2_times(c0, c1, c2, c3):
    # multiply the coefficient vector by sqrt(2) = w - w^3
    return c1 - c3, c0 + c2, c1 + c3, c2 - c0


class AlgebraicComplex:
    """Exact element of Z[w, 1/sqrt(2)] in canonical form.

    Canonical form uses the smallest even sqrt(2) exponent: odd exponents
    are lifted by one sqrt(2) multiplication, then common factors of 2 are
    divided out (each removes 2 from the exponent).  Equal values therefore
    compare equal structurally.
    """

    __slots__ = ("sqrt2_exponent", "c0", "c1", "c2", "c3")

    def __init__(self, sqrt2_exponent, c0, c1, c2, c3):
        if sqrt2_exponent < 0:
            raise ValueError("sqrt2 exponent must be non-negative")
        k = int(sqrt2_exponent)
        c0, c1, c2, c3 = int(c0), int(c1), int(c2), int(c3)
        if k % 2:
            c0, c1, c2, c3 = _sqrt2_times(c0, c1, c2, c3)
            k += 1
        if c0 == c1 == c2 == c3 == 0:
            k = 0
        else:
            while k >= 2 and not (c0 | c1 | c2 | c3) & 1:
                c0 >>= 1
                c1 >>= 1
                c2 >>= 1
                c3 >>= 1
                k -= 2
        self.sqrt2_exponent = k
        self.c0 = c0
        self.c1 = c1
        self.c2 = c2
        self.c3 = c3

    @classmethod
    def zero(cls):
        return cls(0, 0, 0, 0, 0)

    @classmethod
    def one(cls):
        return cls(0, 1, 0, 0, 0)

    @classmethod
    def from_int(cls, v):
        return cls(0, v, 0, 0, 0)

    @classmethod
    def omega(cls, power=1):
        coeffs = [0, 0, 0, 0]
        sign = -1 if (power % 8) >= 4 else 1
        coeffs[power % 4] = sign
        return cls(0, *coeffs)

    def _coeffs(self):
        return (self.c0, self.c1, self.c2, self.c3)

    def _lifted(self, k):
        """Coefficients of this value expressed at exponent k >= current."""
        c = self._coeffs()
        for _ in range(k - self.sqrt2_exponent):
            c = _sqrt2_times(*c)
        return c

    def __add__(self, other):
        k = max(self.sqrt2_exponent, other.sqrt2_exponent)
        a = self._lifted(k)
        b = other._lifted(k)
        return AlgebraicComplex(k, *(x + y for x, y in zip(a, b)))

    def __neg__(self):
        return AlgebraicComplex(self.sqrt2_exponent, -self.c0, -self.c1, -self.c2, -self.c3)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        a = self._coeffs()
        b = other._coeffs()
        out = [0, 0, 0, 0]
        for p in range(4):
            if not a[p]:
                continue
            for q in range(4):
                if not b[q]:
                    continue
                r = p + q
                if r >= 4:
                    out[r - 4] -= a[p] * b[q]
                else:
                    out[r] += a[p] * b[q]
        return AlgebraicComplex(self.sqrt2_exponent + other.sqrt2_exponent, *out)

    def conj(self):
        return AlgebraicComplex(
            self.sqrt2_exponent, self.c0, -self.c3, -self.c2, -self.c1
        )

    def abs2(self):
        return self * self.conj()

    def is_zero(self):
        return self.c0 == self.c1 == self.c2 == self.c3 == 0

    def __eq__(self, other):
        if not isinstance(other, AlgebraicComplex):
            return NotImplemented
        return (
            self.sqrt2_exponent == other.sqrt2_exponent
            and self._coeffs() == other._coeffs()
        )

    def __hash__(self):
        return hash((self.sqrt2_exponent,) + self._coeffs())

    def to_complex(self) -> complex:
        w = complex(math.sqrt(0.5), math.sqrt(0.5))
        val = self.c0 + self.c1 * w + self.c2 * (w * w) + self.c3 * (w * w * w)
        return val * (0.5 ** (self.sqrt2_exponent / 2.0))

    def __repr__(self):
        return (
            f"AlgebraicComplex(e={self.sqrt2_exponent}, "
            f"{self.c3}w3+{self.c2}w2+{self.c1}w+{self.c0})"
        )


# ---------------------------------------------------------------------------
# dense matrices
# ---------------------------------------------------------------------------

def _rotate_channels(co, j):
    """Multiply a (4, ...) coefficient stack by w**j."""
    out = np.empty_like(co)
    for q in range(4):
        p = (q - j) % 4
        if ((p + j) // 4) % 2:
            out[q] = -co[p]
        else:
            out[q] = co[p]
    return out


def _widen_if_needed(co):
    if co.dtype == np.int64 and abs(co).max(initial=0) > _INT64_SAFE:
        return co.astype(object)
    return co


class DenseMatrix:
    """Explicit 2^n x 2^n matrix of exact scalars with one shared exponent."""

    __slots__ = ("n", "sqrt2_exponent", "coeffs")

    def __init__(self, n, sqrt2_exponent, coeffs):
        self.n = n
        self.sqrt2_exponent = sqrt2_exponent
        self.coeffs = coeffs  # shape (4, 2^n, 2^n), power-of-w channels

    @classmethod
    def identity(cls, n):
        size = 1 << n
        co = np.zeros((4, size, size), dtype=np.int64)
        co[0] = np.eye(size, dtype=np.int64)
        return cls(n, 0, co)

    @property
    def size(self):
        return 1 << self.n

    def copy(self):
        return DenseMatrix(self.n, self.sqrt2_exponent, self.coeffs.copy())

    def entry(self, i, j) -> AlgebraicComplex:
        return AlgebraicComplex(
            self.sqrt2_exponent,
            self.coeffs[0][i, j],
            self.coeffs[1][i, j],
            self.coeffs[2][i, j],
            self.coeffs[3][i, j],
        )

    def adjoint(self) -> "DenseMatrix":
        co = np.empty_like(self.coeffs)
        co[0] = self.coeffs[0].T
        co[1] = -self.coeffs[3].T
        co[2] = -self.coeffs[2].T
        co[3] = -self.coeffs[1].T
        return DenseMatrix(self.n, self.sqrt2_exponent, co)

    def mul(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.n != other.n:
            raise CircuitError("dimension mismatch")
        co = _matmul_channels(self.coeffs, other.coeffs)
        return DenseMatrix(self.n, self.sqrt2_exponent + other.sqrt2_exponent, co)

    def kron_identity(self, extra: int) -> "DenseMatrix":
        if extra == 0:
            return self.copy()
        eye = np.eye(1 << extra, dtype=self.coeffs.dtype)
        co = np.stack([np.kron(self.coeffs[p], eye) for p in range(4)])
        return DenseMatrix(self.n + extra, self.sqrt2_exponent, co)

    def reduced(self) -> "DenseMatrix":
        """Canonical form: divide out common factors of 2 (exponent -2 each)."""
        co = self.coeffs.copy()
        k = self.sqrt2_exponent
        if (co != 0).any():
            while k >= 2 and not (co & 1).any():
                co >>= 1
                k -= 2
        else:
            k = 0
        return DenseMatrix(self.n, k, co)

    def equal_value(self, other: "DenseMatrix") -> bool:
        if self.n != other.n:
            return False
        a = self.reduced()
        b = other.reduced()
        while a.sqrt2_exponent < b.sqrt2_exponent:
            a = DenseMatrix(a.n, a.sqrt2_exponent + 1, _sqrt2_times_stack(a.coeffs))
        while b.sqrt2_exponent < a.sqrt2_exponent:
            b = DenseMatrix(b.n, b.sqrt2_exponent + 1, _sqrt2_times_stack(b.coeffs))
        return np.array_equal(a.coeffs, b.coeffs)

    def canonical_key(self):
        r = self.reduced()
        co = r.coeffs
        if co.dtype == object:
            payload = tuple(int(v) for v in co.reshape(-1))
        else:
            payload = co.tobytes()
        return (r.n, r.sqrt2_exponent, payload)

    def to_complex(self) -> np.ndarray:
        w = complex(math.sqrt(0.5), math.sqrt(0.5))
        acc = np.zeros((self.size, self.size), dtype=complex)
        for p in range(4):
            acc += self.coeffs[p].astype(complex) * w**p
        return acc * (0.5 ** (self.sqrt2_exponent / 2.0))

    def is_unitary(self) -> bool:
        prod = self.adjoint().mul(self).reduced()
        ident = DenseMatrix.identity(self.n)
        return prod.equal_value(ident)


def _sqrt2_times_stack(co):
    out = np.empty_like(co)
    out[0] = co[1] - co[3]
    out[1] = co[0] + co[2]
    out[2] = co[1] + co[3]
    out[3] = co[2] - co[0]
    return out


def _matmul_channels(a, b):
    inner = a.shape[2]
    if a.dtype == np.int64 and b.dtype == np.int64:
        bound = int(abs(a).max(initial=0)) * int(abs(b).max(initial=0)) * inner * 4
        if bound >= (1 << 62):
            a = a.astype(object)
            b = b.astype(object)
    elif a.dtype != b.dtype:
        a = a.astype(object)
        b = b.astype(object)
    shape = (4, a.shape[1], b.shape[2])
    out = np.zeros(shape, dtype=a.dtype)
    for p in range(4):
        if not (a[p] != 0).any():
            continue
        for q in range(4):
            if not (b[q] != 0).any():
                continue
            r = p + q
            prod = a[p] @ b[q]
            if r >= 4:
                out[r - 4] -= prod
            else:
                out[r] += prod
    return out


# ---------------------------------------------------------------------------
# gate application (rows, i.e. left multiplication by the gate unitary)
# ---------------------------------------------------------------------------

def _bit_position(n, qubit):
    # qubit 0 is the most significant bit of a basis index
    return n - 1 - qubit


def _row_perm_apply(dm: DenseMatrix, perm: np.ndarray):
    # U <- P U with P|x> = |pi(x)>: row i of the result is row pi^-1(i).
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    dm.coeffs = dm.coeffs[:, inv, :]


def _row_phase_apply(dm: DenseMatrix, j: int, mask: np.ndarray):
    rot = _rotate_channels(dm.coeffs[:, mask, :], j)
    dm.coeffs[:, mask, :] = rot


def _row_h_apply(dm: DenseMatrix, qubit: int):
    pos = _bit_position(dm.n, qubit)
    idx = np.arange(dm.size)
    i0 = idx[(idx >> pos) & 1 == 0]
    i1 = i0 | (1 << pos)
    a = dm.coeffs[:, i0, :]
    b = dm.coeffs[:, i1, :]
    dm.coeffs = _widen_if_needed(dm.coeffs)
    dm.coeffs[:, i0, :] = a + b
    dm.coeffs[:, i1, :] = a - b
    dm.sqrt2_exponent += 1
    if (dm.coeffs != 0).any():
        while dm.sqrt2_exponent >= 2 and not (dm.coeffs & 1).any():
            dm.coeffs >>= 1
            dm.sqrt2_exponent -= 2


def _apply_gate_dense(dm: DenseMatrix, gate: Gate):
    n = dm.n
    idx = np.arange(dm.size)
    kind = gate.kind
    if kind == "h":
        _row_h_apply(dm, gate.qubits[0])
        return
    if kind in ("x", "cx", "ccx", "mcx"):
        tpos = _bit_position(n, gate.target)
        flip = np.ones(dm.size, dtype=np.int64)
        for c in gate.controls:
            flip &= (idx >> _bit_position(n, c)) & 1
        _row_perm_apply(dm, idx ^ (flip << tpos))
        return
    if kind == "swap":
        a = _bit_position(n, gate.qubits[0])
        b = _bit_position(n, gate.qubits[1])
        bits_a = (idx >> a) & 1
        bits_b = (idx >> b) & 1
        perm = idx ^ ((bits_a ^ bits_b) << a) ^ ((bits_a ^ bits_b) << b)
        _row_perm_apply(dm, perm)
        return
    if kind in ("z", "s", "sdg", "t", "tdg"):
        j = {"z": 4, "s": 2, "sdg": 6, "t": 1, "tdg": 7}[kind]
        mask = ((idx >> _bit_position(n, gate.qubits[0])) & 1) == 1
        _row_phase_apply(dm, j, mask)
        return
    if kind == "cz":
        a = _bit_position(n, gate.qubits[0])
        b = _bit_position(n, gate.qubits[1])
        mask = (((idx >> a) & 1) & ((idx >> b) & 1)) == 1
        _row_phase_apply(dm, 4, mask)
        return
    if kind == "y":
        pos = _bit_position(n, gate.qubits[0])
        mask = ((idx >> pos) & 1) == 1
        _row_phase_apply(dm, 4, mask)          # phase -1 on the 1-rows
        _row_perm_apply(dm, idx ^ (1 << pos))  # row exchange
        dm.coeffs = _rotate_channels(dm.coeffs, 2)  # global factor i
        return
    raise CircuitError(f"unsupported gate kind {kind!r}")


def dense_unitary(circuit: Circuit, bound: int = DEFAULT_DENSE_BOUND) -> DenseMatrix:
    """Exact unitary of a circuit as the ordered product of its gate matrices."""
    if circuit.n > bound:
        raise SizeLimitError(
            f"dense path limited to {bound} qubits, circuit has {circuit.n}"
        )
    dm = DenseMatrix.identity(circuit.n)
    for gate in circuit.gates:
        _apply_gate_dense(dm, gate)
    return dm


def permutation_unitary(perm) -> DenseMatrix:
    """0/1 matrix sending basis column x to row perm[x]."""
    perm = list(perm)
    size = len(perm)
    n = size.bit_length() - 1
    if 1 << n != size:
        raise CircuitError("permutation length must be a power of two")
    if sorted(perm) != list(range(size)):
        raise CircuitError("input is not a bijection on 0..2^n-1")
    co = np.zeros((4, size, size), dtype=np.int64)
    co[0][perm, np.arange(size)] = 1
    return DenseMatrix(n, 0, co)


# ---------------------------------------------------------------------------
# headers and operand coercion
# ---------------------------------------------------------------------------

def _coerce(circ_or_matrix, d, m, k, bound):
    if isinstance(circ_or_matrix, Circuit):
        c = circ_or_matrix
        if d is None:
            d, m, k = c.header()
        U = dense_unitary(c, bound)
    elif isinstance(circ_or_matrix, DenseMatrix):
        U = circ_or_matrix
        if U.n > bound:
            raise SizeLimitError(f"matrix on {U.n} qubits exceeds bound {bound}")
        if d is None:
            raise CircuitError("d, m, k must be given for a raw matrix operand")
    else:
        raise TypeError(f"expected Circuit or DenseMatrix, got {type(circ_or_matrix)}")
    if k is None:
        k = U.n - d
    if d + k != U.n:
        raise CircuitError(f"header (d={d}, k={k}) inconsistent with n={U.n}")
    if not 1 <= m <= U.n:
        raise CircuitError(f"m={m} out of range")
    return U, d, m, k


def _pair(c1, c2, d, m, k, bound):
    U1, d1, m1, k1 = _coerce(c1, d, m, k, bound)
    U2, d2, m2, k2 = _coerce(c2, d, m, k, bound)
    if (d1, m1, k1) != (d2, m2, k2):
        raise CircuitError(
            f"operands disagree on header: {(d1, m1, k1)} vs {(d2, m2, k2)}"
        )
    return U1, U2, d1, m1, k1


# ---------------------------------------------------------------------------
# measurement statistics
# ---------------------------------------------------------------------------

def outcome_probability(circ_or_matrix, psi, t, d=None, m=None, k=None,
                        bound: int = DEFAULT_DENSE_BOUND) -> float:
    """Probability of outcome t on the measured prefix for data input psi.

    psi is a complex vector over the 2^d data basis states; ancillas start
    in |0>, so only every 2^k-th column of the unitary participates.
    """
    U, d, m, k = _coerce(circ_or_matrix, d, m, k, bound)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (1 << d,):
        raise CircuitError(f"psi must have length 2^d = {1 << d}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise CircuitError("psi must be normalized")
    if not 0 <= t < (1 << m):
        raise CircuitError(f"outcome {t} out of range for m={m}")
    cols = U.to_complex()[:, :: 1 << k]
    amps = cols @ psi
    g = 1 << (d + k - m)
    block = amps[g * t : g * (t + 1)]
    return float(np.sum(np.abs(block) ** 2))


@dataclass
class ColumnSegment:
    """Length-g column segment of U at outcome block ``outcome`` and data
    column ``column`` (column index 2^k * column of the full matrix)."""

    outcome: int
    column: int
    entries: list

    def inner(self, other: "ColumnSegment") -> AlgebraicComplex:
        acc = AlgebraicComplex.zero()
        for a, b in zip(self.entries, other.entries):
            acc = acc + a.conj() * b
        return acc


def extract_column_segments(circ_or_matrix, d=None, m=None, k=None,
                            bound: int = DEFAULT_DENSE_BOUND):
    """All 2^m * 2^d column segments of the unitary, exact entries."""
    U, d, m, k = _coerce(circ_or_matrix, d, m, k, bound)
    g = 1 << (d + k - m)
    segments = []
    for t in range(1 << m):
        for j in range(1 << d):
            entries = [U.entry(g * t + s, (1 << k) * j) for s in range(g)]
            segments.append(ColumnSegment(t, j, entries))
    return segments


# ---------------------------------------------------------------------------
# decision procedures
# ---------------------------------------------------------------------------

def _pe_signature(U: DenseMatrix, d, m, k):
    """Stack of all pairwise segment inner products, canonically reduced.

    Two circuits are partially equivalent exactly when these stacks agree:
    the probability of every outcome under every input is a bilinear form
    in the input amplitudes whose coefficients are these inner products.
    """
    g = 1 << (d + k - m)
    cols = U.coeffs[:, :, :: 1 << k]
    conj_map = [(0, 1), (3, -1), (2, -1), (1, -1)]  # channel p of conj(V)
    grams = np.zeros((4, 1 << m, 1 << d, 1 << d), dtype=object)
    use_int = cols.dtype == np.int64
    if use_int:
        mx = int(abs(cols).max(initial=0))
        if mx * mx * g * 4 < (1 << 62):
            grams = np.zeros((4, 1 << m, 1 << d, 1 << d), dtype=np.int64)
        else:
            cols = cols.astype(object)
    for t in range(1 << m):
        V = cols[:, g * t : g * (t + 1), :]
        for p in range(4):
            src, sgn = conj_map[p]
            W = V[src].T * sgn
            if not (W != 0).any():
                continue
            for q in range(4):
                if not (V[q] != 0).any():
                    continue
                r = p + q
                prod = W @ V[q]
                if r >= 4:
                    grams[r - 4][t] -= prod
                else:
                    grams[r][t] += prod
    kappa = 2 * U.sqrt2_exponent
    if (grams != 0).any():
        while kappa >= 2 and not (grams & 1).any():
            grams >>= 1
            kappa -= 2
    else:
        kappa = 0
    return kappa, grams


def dense_pe_check(c1, c2, d=None, m=None, k=None,
                   bound: int = DEFAULT_DENSE_BOUND) -> Verdict:
    """Partial equivalence via exact column-segment inner products."""
    start = time.perf_counter()
    U1, U2, d, m, k = _pair(c1, c2, d, m, k, bound)
    k1, s1 = _pe_signature(U1, d, m, k)
    k2, s2 = _pe_signature(U2, d, m, k)
    eq = k1 == k2 and np.array_equal(s1, s2)
    return Verdict(
        equivalent=eq,
        algorithm="dense",
        seconds=time.perf_counter() - start,
        details={"d": d, "m": m, "k": k},
    )


def dense_pe_check_zero_ancilla(c1, c2, d=None, m=None, k=None,
                                bound: int = DEFAULT_DENSE_BOUND) -> Verdict:
    """Zero-ancilla partial equivalence: the miter U1 U2^-1 must be
    block-diagonal with 2^m diagonal blocks of size 2^(d-m)."""
    start = time.perf_counter()
    U1, U2, d, m, k = _pair(c1, c2, d, m, k, bound)
    if k != 0:
        raise CircuitError("zero-ancilla check requires k = 0")
    miter = U1.mul(U2.adjoint())
    blk = np.arange(miter.size) >> (d - m)
    off = blk[:, None] != blk[None, :]
    eq = not (miter.coeffs[:, off] != 0).any()
    return Verdict(
        equivalent=bool(eq),
        algorithm="dense_zero_ancilla",
        seconds=time.perf_counter() - start,
        details={"d": d, "m": m, "k": k},
    )


def masked_pipeline_check(c1, c2, d=None, m=None, k=None,
                          bound: int = DEFAULT_DENSE_BOUND,
                          return_intermediates: bool = False):
    """Literal masked-matrix pipeline for partial equivalence.

    Pads ancillas so every outcome block has room for its own column offset,
    keeps one column per column block, shifts row block t right by t, forms
    U^dagger * U', and masks all but the top row of each row block.  The two
    resulting matrices are value-equal exactly when the circuits are
    partially equivalent; this must and does agree with dense_pe_check.
    """
    start = time.perf_counter()
    U1, U2, d, m, k = _pair(c1, c2, d, m, k, bound)
    extra = max(m - k, 0)
    k = k + extra
    if U1.n + extra > bound:
        raise SizeLimitError(f"padded size {U1.n + extra} exceeds bound {bound}")
    intermediates = {}

    def transform(U, tag):
        U = U.kron_identity(extra)
        size = U.size
        Up = U.copy()
        col_block = 1 << k
        cols = np.arange(size)
        Up.coeffs[:, :, cols % col_block != 0] = 0
        row_part = size >> m
        shifted = np.zeros_like(Up.coeffs)
        for t in range(1 << m):
            rows = slice(t * row_part, (t + 1) * row_part)
            if t == 0:
                shifted[:, rows, :] = Up.coeffs[:, rows, :]
            elif t < size:
                shifted[:, rows, t:] = Up.coeffs[:, rows, : size - t]
        Up.coeffs = shifted
        if return_intermediates:
            intermediates[f"masked_{tag}"] = Up.copy()
        prod = U.adjoint().mul(Up)
        rows = np.arange(size)
        prod.coeffs[:, rows % col_block != 0, :] = 0
        if return_intermediates:
            intermediates[f"product_{tag}"] = prod.copy()
        return prod.reduced()

    P1 = transform(U1, 1)
    P2 = transform(U2, 2)
    eq = P1.equal_value(P2)
    verdict = Verdict(
        equivalent=eq,
        algorithm="dense_pipeline",
        seconds=time.perf_counter() - start,
        details={"d": d, "m": m, "k": k, "extra": extra},
    )
    if return_intermediates:
        return verdict, intermediates
    return verdict


def _scale_stack(co, scalar_coeffs):
    """Multiply a (4, ...) coefficient stack by a raw coefficient 4-tuple."""
    if co.dtype == np.int64:
        mx = int(abs(co).max(initial=0)) * max(abs(int(c)) for c in scalar_coeffs)
        if mx * 4 >= (1 << 62):
            co = co.astype(object)
    out = np.zeros_like(co)
    for p in range(4):
        for q in range(4):
            c = scalar_coeffs[q]
            if not c:
                continue
            r = p + q
            if r >= 4:
                out[r - 4] -= co[p] * c
            else:
                out[r] += co[p] * c
    return out


def totally_equivalent_dense(u1, u2, bound: int = DEFAULT_DENSE_BOUND) -> bool:
    """True when the two unitaries are equal up to one global unit factor.

    Cross-multiplies both matrices by the other's reference entry, which
    aligns the sqrt(2) exponents automatically, and additionally requires
    the reference entries to have equal modulus (so the factor is unit).
    """
    U1 = dense_unitary(u1, bound) if isinstance(u1, Circuit) else u1
    U2 = dense_unitary(u2, bound) if isinstance(u2, Circuit) else u2
    if U1.n != U2.n:
        return False
    nz = np.argwhere((U2.coeffs != 0).any(axis=0))
    if nz.size == 0:
        return not (U1.coeffs != 0).any()
    i, j = (int(v) for v in nz[0])
    r1 = tuple(int(U1.coeffs[p][i, j]) for p in range(4))
    r2 = tuple(int(U2.coeffs[p][i, j]) for p in range(4))
    if all(c == 0 for c in r1):
        return False
    if U1.entry(i, j).abs2() != U2.entry(i, j).abs2():
        return False
    return np.array_equal(_scale_stack(U1.coeffs, r2), _scale_stack(U2.coeffs, r1))


def monte_carlo_falsify(c1, c2, samples: int = 100, seed: int = 0,
                        tol: float = 1e-9, d=None, m=None, k=None,
                        bound: int = DEFAULT_DENSE_BOUND):
    """Search for an input state with differing outcome distributions.

    Draws Haar-random data states (normalized complex Gaussians) and
    compares the full outcome distributions numerically.  Returns the first
    counterexample found, or None.  A None result is NOT a proof of
    equivalence: outcome probabilities are quadratic in the amplitudes, so
    agreement on sampled states does not extend to superpositions.
    """
    U1, U2, d, m, k = _pair(c1, c2, d, m, k, bound)
    cols1 = U1.to_complex()[:, :: 1 << k]
    cols2 = U2.to_complex()[:, :: 1 << k]
    g = 1 << (d + k - m)
    rng = np.random.default_rng(seed)
    dim = 1 << d
    for _ in range(samples):
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi = z / np.linalg.norm(z)
        p1 = np.abs(cols1 @ psi) ** 2
        p2 = np.abs(cols2 @ psi) ** 2
        dist1 = p1.reshape(1 << m, g).sum(axis=1)
        dist2 = p2.reshape(1 << m, g).sum(axis=1)
        gap = np.abs(dist1 - dist2)
        t = int(np.argmax(gap))
        if gap[t] > tol:
            return Counterexample(
                psi=[complex(a) for a in psi],
                outcome=t,
                probability_1=float(dist1[t]),
                probability_2=float(dist2[t]),
            )
    return None


# ---------------------------------------------------------------------------
# period-finding instance built densely
# ---------------------------------------------------------------------------

def modmul_permutation(a: int, modulus: int, bits: int):
    """x -> a*x mod modulus for x < modulus, identity elsewhere."""
    return [
        (a * x) % modulus if x < modulus else x for x in range(1 << bits)
    ]


def modmul_shifted_permutation(a: int, modulus: int, bits: int):
    """x -> a*(x+1) - 1 mod modulus for x < modulus, identity elsewhere."""
    return [
        (a * (x + 1) - 1) % modulus if x < modulus else x for x in range(1 << bits)
    ]


def orbit_period(perm, start: int) -> int:
    x = perm[start]
    steps = 1
    while x != start:
        x = perm[x]
        steps += 1
    return steps


def _perm_power(perm, power):
    out = list(range(len(perm)))
    for _ in range(power):
        out = [perm[v] for v in out]
    return out


def build_period_finding_unitary(oracle_perm, counting: int = 3) -> DenseMatrix:
    """Dense unitary of a period-finding circuit instance.

    Layout: ``counting`` data qubits on top, the oracle register below as
    ancillas prepared to |1> by an X gate.  H layer on the counting register,
    then each counting qubit controls the oracle permutation raised to its
    binary weight, then the exact inverse Fourier transform on the counting
    register.  Exactness restricts counting to at most 3 qubits (all Fourier
    phases are then powers of w).
    """
    if counting > 3:
        raise CircuitError("exact Fourier phases require counting <= 3")
    tq = (len(oracle_perm)).bit_length() - 1
    if 1 << tq != len(oracle_perm):
        raise CircuitError("oracle permutation length must be a power of two")
    n = counting + tq
    dm = DenseMatrix.identity(n)
    idx = np.arange(1 << n)

    for q in range(counting):
        _row_h_apply(dm, q)

    # prepare |1> on the oracle register (X on the least significant qubit)
    _row_perm_apply(dm, idx ^ 1)

    # controlled powers: counting qubit q carries binary weight 2^(counting-1-q)
    t_mask = (1 << tq) - 1
    for q in range(counting):
        power = 1 << (counting - 1 - q)
        pperm = _perm_power(list(oracle_perm), power)
        cpos = _bit_position(n, q)
        full = np.array(
            [
                (v & ~t_mask) | pperm[v & t_mask] if (v >> cpos) & 1 else v
                for v in range(1 << n)
            ]
        )
        _row_perm_apply(dm, full)

    # inverse Fourier transform on the counting register
    def cphase(a, b, j):
        pa = _bit_position(n, a)
        pb = _bit_position(n, b)
        mask = (((idx >> pa) & 1) & ((idx >> pb) & 1)) == 1
        _row_phase_apply(dm, j, mask)

    forward = []  # (op, args) of the forward transform in application order
    for i in range(counting):
        forward.append(("h", i))
        for j in range(i + 1, counting):
            # controlled phase 2*pi / 2^(j-i+1): w power 4 >> (j-i)
            forward.append(("cp", j, i, 4 >> (j - i)))
    for i in range(counting // 2):
        forward.append(("swap", i, counting - 1 - i))

    for op in reversed(forward):
        if op[0] == "h":
            _row_h_apply(dm, op[1])
        elif op[0] == "cp":
            cphase(op[1], op[2], 8 - op[3])  # inverse phase
        else:
            a = _bit_position(n, op[1])
            b = _bit_position(n, op[2])
            bits_a = (idx >> a) & 1
            bits_b = (idx >> b) & 1
            diff = bits_a ^ bits_b
            _row_perm_apply(dm, idx ^ (diff << a) ^ (diff << b))
    return dm
