"""Circuit intermediate representation and the external text format.

A circuit is a gate list plus a qubit-role header (d data qubits, m measured
qubits, k ancilla qubits, n = d + k total).  Data qubits are q0..q(d-1),
measured qubits q0..q(m-1), ancillas trail and start in |0>.  Qubit q0 is
the most significant bit of basis-state indices.

The accepted file format is a small OpenQASM-2.0 subset: an optional
``OPENQASM 2.0;`` header, an optional ``include`` line, exactly one ``qreg``,
and gate statements drawn from x, y, z, h, s, sdg, t, tdg, cx, cz, swap,
ccx, mcx.  No measure, creg, custom gates or classical control.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


GATE_ARITY = {
    "x": 1, "y": 1, "z": 1, "h": 1, "s": 1, "sdg": 1, "t": 1, "tdg": 1,
    "cx": 2, "cz": 2, "swap": 2, "ccx": 3,
    # mcx: one or more controls then the target (arity checked separately)
}

_INVERSE_KIND = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}

SUPPORTED_KINDS = tuple(sorted(GATE_ARITY)) + ("mcx",)


class CircuitError(ValueError):
    """Invalid circuit or header data."""


class ParseError(ValueError):
    """Syntax or validation error in circuit text, with position info."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.kind == "mcx":
            if len(self.qubits) < 2:
                raise CircuitError("mcx needs at least one control and a target")
        elif self.kind in GATE_ARITY:
            if len(self.qubits) != GATE_ARITY[self.kind]:
                raise CircuitError(
                    f"{self.kind} expects {GATE_ARITY[self.kind]} operands, "
                    f"got {len(self.qubits)}"
                )
        else:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"duplicate operand in {self.kind} {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError("negative qubit index")

    def inverse(self) -> "Gate":
        return Gate(_INVERSE_KIND.get(self.kind, self.kind), self.qubits)

    @property
    def controls(self) -> tuple:
        if self.kind in ("cx", "cz"):
            return self.qubits[:1]
        if self.kind == "ccx":
            return self.qubits[:2]
        if self.kind == "mcx":
            return self.qubits[:-1]
        return ()

    @property
    def target(self) -> int:
        return self.qubits[-1]


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple
    d: int
    m: int
    k: int = -1  # derived as n - d when not given

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.k == -1:
            object.__setattr__(self, "k", self.n - self.d)
        if self.n < 1:
            raise CircuitError("circuit needs at least one qubit")
        if not 0 <= self.d <= self.n:
            raise CircuitError(f"d={self.d} out of range for n={self.n}")
        if self.k != self.n - self.d:
            raise CircuitError(f"k={self.k} inconsistent with n={self.n}, d={self.d}")
        if not 1 <= self.m <= self.n:
            raise CircuitError(f"m={self.m} out of range for n={self.n}")
        for g in self.gates:
            if max(g.qubits) >= self.n:
                raise CircuitError(
                    f"gate {g.kind} {g.qubits} references qubit >= n={self.n}"
                )

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def header(self) -> tuple:
        return (self.d, self.m, self.k)


def invert(circuit: Circuit) -> Circuit:
    """The inverse circuit: gates reversed, each replaced by its inverse."""
    gates = tuple(g.inverse() for g in reversed(circuit.gates))
    return Circuit(circuit.n, gates, circuit.d, circuit.m, circuit.k)


def pad_ancillas(circuit: Circuit, extra: int) -> Circuit:
    """Append ``extra`` trailing ancilla qubits; gates are unchanged."""
    if extra < 0:
        raise CircuitError("extra must be non-negative")
    if extra == 0:
        return circuit
    return Circuit(
        circuit.n + extra, circuit.gates, circuit.d, circuit.m, circuit.k + extra
    )


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>//[^\n]*)
      | (?P<string>"[^"\n]*")
      | (?P<real>\d+\.\d+)
      | (?P<int>\d+)
      | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<sym>[\[\],;()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    line = 1
    line_start = 0
    tokens = []
    while pos < len(text):
        mo = _TOKEN_RE.match(text, pos)
        if mo is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = mo.lastgroup
        value = mo.group()
        if kind not in ("ws", "comment"):
            tokens.append((kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rfind("\n") + 1
        pos = mo.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, got {tok[1] or tok[0]!r}", tok[2], tok[3])
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok[2], tok[3])


def parse(text: str, d: int, m: int) -> Circuit:
    """Parse circuit text; d and m are supplied out of band, k = n - d."""
    p = _Parser(text)
    reg_name = None
    n = None
    gates = []

    # optional header lines
    if p.peek()[:2] == ("id", "OPENQASM"):
        p.next()
        p.expect("real")
        p.expect("sym", ";")
    while p.peek()[:2] == ("id", "include"):
        p.next()
        p.expect("string")
        p.expect("sym", ";")

    while p.peek()[0] != "eof":
        tok = p.next()
        if tok[0] != "id":
            p.error(f"expected a statement, got {tok[1]!r}", tok)
        name = tok[1]
        if name == "qreg":
            if n is not None:
                p.error("only one qreg is allowed", tok)
            reg_tok = p.expect("id")
            reg_name = reg_tok[1]
            p.expect("sym", "[")
            n = int(p.expect("int")[1])
            p.expect("sym", "]")
            p.expect("sym", ";")
            if n < 1:
                raise ParseError("register size must be positive", reg_tok[2], reg_tok[3])
            continue
        if name not in SUPPORTED_KINDS:
            p.error(f"unknown gate {name!r} (supported: {', '.join(SUPPORTED_KINDS)})", tok)
        if n is None:
            p.error("gate statement before qreg declaration", tok)
        qubits = []
        while True:
            q_tok = p.expect("id")
            if q_tok[1] != reg_name:
                p.error(f"unknown register {q_tok[1]!r}", q_tok)
            p.expect("sym", "[")
            idx_tok = p.expect("int")
            p.expect("sym", "]")
            idx = int(idx_tok[1])
            if idx >= n:
                p.error(f"qubit index {idx} out of range (n={n})", idx_tok)
            qubits.append(idx)
            nxt = p.next()
            if nxt[:2] == ("sym", ";"):
                break
            if nxt[:2] != ("sym", ","):
                p.error("expected ',' or ';'", nxt)
        try:
            gates.append(Gate(name, tuple(qubits)))
        except CircuitError as exc:
            raise ParseError(str(exc), tok[2], tok[3]) from exc

    if n is None:
        raise ParseError("missing qreg declaration", 1, 1)
    if not 0 <= d <= n:
        raise ParseError(f"d={d} out of range for n={n}", 1, 1)
    if not 1 <= m <= n:
        raise ParseError(f"m={m} out of range for n={n}", 1, 1)
    return Circuit(n, tuple(gates), d, m)


def serialize(circuit: Circuit) -> str:
    lines = ["OPENQASM 2.0;", f"qreg q[{circuit.n}];"]
    for g in circuit.gates:
        ops = ",".join(f"q[{q}]" for q in g.qubits)
        lines.append(f"{g.kind} {ops};")
    return "\n".join(lines) + "\n"
