"""Result types shared by the dense and decision-diagram checkers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Counterexample:
    """A concrete input state on which the two circuits disagree."""

    psi: list            # amplitudes of the data-qubit input state
    outcome: int         # measured-prefix outcome index
    probability_1: float
    probability_2: float


@dataclass
class Verdict:
    """Outcome of one equivalence check.

    ``equivalent`` is True/False for decision procedures and None when the
    method is inconclusive (sampling found no counterexample, which proves
    nothing).  Verdicts are deterministic for fixed inputs and variable
    order; ``seconds`` is the only field that varies between runs.
    """

    equivalent: bool | None
    algorithm: str
    seconds: float = 0.0
    peak_nodes: int = 0
    slice_width: int = 0
    details: dict = field(default_factory=dict)
    counterexample: Counterexample | None = None

    def __bool__(self) -> bool:
        return self.equivalent is True
