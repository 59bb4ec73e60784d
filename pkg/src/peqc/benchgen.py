"""Seeded generators for partially- and totally-equivalent circuit pairs.

A generated pair is assembled from up to five parts: H (a Hadamard on
every data qubit), T (one random subcircuit applied to both sides, with
every Toffoli on the second side replaced by its exact 15-gate
decomposition), P (per qubit group, a pre-searched pair of subcircuits
that are partially equivalent when fully measured), A (independent random
subcircuits on the non-measured data qubits, which cannot influence the
measured prefix), and C (CNOTs controlled by the |0>-initialized ancillas,
which never fire).  Totally equivalent pairs use parts H and T only.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .circuit import Circuit, CircuitError, Gate, serialize
from .oracle import DenseMatrix, _apply_gate_dense, _pe_signature

# exact Clifford+T network for the 2-control Toffoli: (control, control, target)
_CCX_TEMPLATE = (
    ("h", (2,)),
    ("cx", (1, 2)),
    ("tdg", (2,)),
    ("cx", (0, 2)),
    ("t", (2,)),
    ("cx", (1, 2)),
    ("tdg", (2,)),
    ("cx", (0, 2)),
    ("t", (1,)),
    ("t", (2,)),
    ("h", (2,)),
    ("cx", (0, 1)),
    ("t", (0,)),
    ("tdg", (1,)),
    ("cx", (0, 1)),
)


def decompose_ccx(gate: Gate):
    """The standard 15-gate Clifford+T realization, exactly equal to ccx."""
    if gate.kind != "ccx":
        raise CircuitError("decompose_ccx expects a ccx gate")
    a, b, t = gate.qubits
    lookup = {0: a, 1: b, 2: t}
    return [
        Gate(kind, tuple(lookup[q] for q in qubits))
        for kind, qubits in _CCX_TEMPLATE
    ]


# ---------------------------------------------------------------------------
# exhaustive search for small partially-equivalent subcircuit pairs
# ---------------------------------------------------------------------------

_SEARCH_KINDS_1Q = ("h", "s", "sdg", "t", "tdg", "x", "y", "z")
_SEARCH_KINDS_2Q = ("h", "s", "t", "x", "z", "cx")


def _search_atoms(num_qubits: int, kinds):
    atoms = []
    for kind in sorted(kinds):
        if kind in ("cx", "cz", "swap"):
            if num_qubits < 2:
                continue
            for a in range(num_qubits):
                for b in range(num_qubits):
                    if a != b and (kind != "cz" or a < b):
                        atoms.append(Gate(kind, (a, b)))
        else:
            for q in range(num_qubits):
                atoms.append(Gate(kind, (q,)))
    return atoms


def _signature_key(U: DenseMatrix, d, m, k):
    kappa, grams = _pe_signature(U, d, m, k)
    if grams.dtype == object:
        payload = tuple(int(v) for v in grams.reshape(-1))
    else:
        payload = grams.tobytes()
    return (kappa, payload)


def find_pe_subcircuit_pairs(num_qubits: int, max_total_gates: int = 5,
                             kinds=None, max_pairs=None):
    """All deduplicated subcircuit pairs (X1, X2) with X1 != X2 as gate
    lists that are partially equivalent when every qubit is both data and
    measured.

    Sequences over the search gate set are enumerated breadth-first and
    grouped by their exact measurement signature; pairs are deduplicated by
    the ordered pair of unitaries they realize, keeping the two earliest
    gate lists per unitary so that distinct realizations of one unitary
    (e.g. s;s versus z) still form a pair.
    """
    if num_qubits < 1 or num_qubits > 2:
        raise CircuitError("subcircuit search supports 1 or 2 qubits")
    if kinds is None:
        kinds = _SEARCH_KINDS_1Q if num_qubits == 1 else _SEARCH_KINDS_2Q
    atoms = _search_atoms(num_qubits, kinds)

    ident = DenseMatrix.identity(num_qubits)
    reps = {ident.canonical_key(): (ident, [()])}
    frontier = [((), ident)]
    for _ in range(max_total_gates):
        new_frontier = []
        for seq, U in frontier:
            for atom in atoms:
                U2 = U.copy()
                _apply_gate_dense(U2, atom)
                seq2 = seq + (atom,)
                key = U2.canonical_key()
                entry = reps.get(key)
                if entry is None:
                    reps[key] = (U2, [seq2])
                    new_frontier.append((seq2, U2))
                elif len(entry[1]) == 1:
                    entry[1].append(seq2)
        frontier = new_frontier

    groups = {}
    for key, (U, seqs) in reps.items():
        sig = _signature_key(U, num_qubits, num_qubits, 0)
        groups.setdefault(sig, []).append(key)

    pairs = []
    for sig, keys in groups.items():
        for k1 in keys:
            for k2 in keys:
                if k1 == k2:
                    seqs = reps[k1][1]
                    if len(seqs) < 2:
                        continue
                    x1, x2 = seqs[1], seqs[0]
                else:
                    x1 = reps[k1][1][0]
                    x2 = reps[k2][1][0]
                if len(x1) + len(x2) > max_total_gates or x1 == x2:
                    continue
                pairs.append((x1, x2))
                if max_pairs is not None and len(pairs) >= max_pairs:
                    return pairs
    return pairs


@lru_cache(maxsize=8)
def _pair_library(num_qubits: int):
    return tuple(find_pe_subcircuit_pairs(num_qubits, max_total_gates=4,
                                          max_pairs=4000))


# ---------------------------------------------------------------------------
# pair generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenConfig:
    d: int
    m: int | None = None          # default: floor(0.5 d), at least 1
    with_ancilla: bool = False
    k: int | None = None          # default when enabled: max(1, ceil(d/10))
    seed: int = 0
    t_part_gates: int | None = None   # default 3 d
    a_part_gates: int | None = None   # default d - m

    def resolve(self, total_measure_default=False):
        if self.d < 1:
            raise CircuitError("d must be at least 1")
        m = self.m
        if m is None:
            m = self.d if total_measure_default else max(1, self.d // 2)
        if not 1 <= m <= self.d:
            raise CircuitError(f"m={m} out of range for d={self.d}")
        k = 0
        if self.with_ancilla:
            k = self.k if self.k is not None else max(1, math.ceil(self.d / 10))
            if k < 1:
                raise CircuitError("with_ancilla requires k >= 1")
        t_gates = self.t_part_gates if self.t_part_gates is not None else 3 * self.d
        a_gates = self.a_part_gates if self.a_part_gates is not None else self.d - m
        return m, k, t_gates, a_gates


@dataclass
class PairRecord:
    kind: str
    c1: Circuit
    c2: Circuit
    seed: int
    parts_1: dict = field(default_factory=dict)
    parts_2: dict = field(default_factory=dict)

    def manifest(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.c1.d,
            "m": self.c1.m,
            "k": self.c1.k,
            "seed": self.seed,
            "expected_verdict": "equivalent",
            "gates_c1": self.c1.gate_count,
            "gates_c2": self.c2.gate_count,
            "parts_c1": self.parts_1,
            "parts_c2": self.parts_2,
        }


def _random_subcircuit(rng, qubits, count, allow_ccx=True):
    kinds = ["h", "s", "t"]
    if len(qubits) >= 2:
        kinds.append("cx")
    if len(qubits) >= 3 and allow_ccx:
        kinds.append("ccx")
    gates = []
    for _ in range(count):
        kind = rng.choice(kinds)
        arity = {"h": 1, "s": 1, "t": 1, "cx": 2, "ccx": 3}[kind]
        gates.append(Gate(kind, tuple(rng.sample(qubits, arity))))
    return gates


def _mark(parts, name, start, end):
    parts[name] = [start, end]


def build_pe_record(cfg: GenConfig) -> PairRecord:
    m, k, t_gates, a_gates = cfg.resolve()
    d = cfg.d
    n = d + k
    rng = random.Random(cfg.seed)
    g1, g2 = [], []
    parts1, parts2 = {}, {}

    # part H: superposition on every data qubit
    for q in range(d):
        g1.append(Gate("h", (q,)))
        g2.append(Gate("h", (q,)))
    _mark(parts1, "h", 0, len(g1))
    _mark(parts2, "h", 0, len(g2))

    # part T: common subcircuit; second side gets Toffolis decomposed
    s1, s2 = len(g1), len(g2)
    for gate in _random_subcircuit(rng, list(range(d)), t_gates):
        g1.append(gate)
        if gate.kind == "ccx":
            g2.extend(decompose_ccx(gate))
        else:
            g2.append(gate)
    _mark(parts1, "t", s1, len(g1))
    _mark(parts2, "t", s2, len(g2))

    # part P: per-group partially equivalent subcircuit pairs
    s1, s2 = len(g1), len(g2)
    q = 0
    while q < d:
        size = 2 if q + 1 < d and rng.random() < 0.5 else 1
        library = _pair_library(size)
        x1, x2 = library[rng.randrange(len(library))]
        for gate in x1:
            g1.append(Gate(gate.kind, tuple(v + q for v in gate.qubits)))
        for gate in x2:
            g2.append(Gate(gate.kind, tuple(v + q for v in gate.qubits)))
        q += size
    _mark(parts1, "p", s1, len(g1))
    _mark(parts2, "p", s2, len(g2))

    # part A: independent subcircuits on the non-measured data qubits
    s1, s2 = len(g1), len(g2)
    free = list(range(m, d))
    if free and a_gates > 0:
        g1.extend(_random_subcircuit(rng, free, a_gates))
        g2.extend(_random_subcircuit(rng, free, a_gates))
    _mark(parts1, "a", s1, len(g1))
    _mark(parts2, "a", s2, len(g2))

    # part C: CNOTs controlled by the |0> ancillas (never fire)
    s1, s2 = len(g1), len(g2)
    for a in range(d, n):
        g1.append(Gate("cx", (a, rng.randrange(d))))
        g2.append(Gate("cx", (a, rng.randrange(d))))
    _mark(parts1, "c", s1, len(g1))
    _mark(parts2, "c", s2, len(g2))

    c1 = Circuit(n, tuple(g1), d, m)
    c2 = Circuit(n, tuple(g2), d, m)
    return PairRecord("pe", c1, c2, cfg.seed, parts1, parts2)


def build_te_record(cfg: GenConfig) -> PairRecord:
    m, _, t_gates, _ = cfg.resolve(total_measure_default=True)
    d = cfg.d
    rng = random.Random(cfg.seed)
    g1, g2 = [], []
    parts1, parts2 = {}, {}
    for q in range(d):
        g1.append(Gate("h", (q,)))
        g2.append(Gate("h", (q,)))
    _mark(parts1, "h", 0, len(g1))
    _mark(parts2, "h", 0, len(g2))
    s1, s2 = len(g1), len(g2)
    for gate in _random_subcircuit(rng, list(range(d)), t_gates):
        g1.append(gate)
        if gate.kind == "ccx":
            g2.extend(decompose_ccx(gate))
        else:
            g2.append(gate)
    _mark(parts1, "t", s1, len(g1))
    _mark(parts2, "t", s2, len(g2))
    c1 = Circuit(d, tuple(g1), d, m)
    c2 = Circuit(d, tuple(g2), d, m)
    record = PairRecord("te", c1, c2, cfg.seed, parts1, parts2)
    return record


def gen_pe_pair(cfg: GenConfig):
    record = build_pe_record(cfg)
    return record.c1, record.c2


def gen_te_pair(cfg: GenConfig):
    record = build_te_record(cfg)
    return record.c1, record.c2


def write_record(record: PairRecord, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "c1.qasm").write_text(serialize(record.c1))
    (out / "c2.qasm").write_text(serialize(record.c2))
    manifest = record.manifest()
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
