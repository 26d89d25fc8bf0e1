"""Experiment parameter bundle shared by all drivers."""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass
class ExperimentParams:
    """Knobs of the verification experiments.

    The constants N1, delta, eps and M mirror the existential constants of
    the good-lambda machinery; experiments measure empirical surrogates for
    them and test refinement stability rather than absolute values.
    eps1 is always 10^n * eps.
    """

    dim: int = 1
    s: float = 0.25
    p: float = 4.0
    lam: float = 2.0
    big_lambda: float = 1.0
    N1: float = 2.0
    delta: float = 0.1
    eps: float = 0.02
    M: float = 1.0
    gamma: float = 0.05
    refinements: tuple = (1 / 16, 1 / 32)
    seed: int = 7
    instances: int = 5
    p_values: tuple = (3.0, 4.0, 6.0)
    alpha_fractions: tuple = (0.45, 0.9)
    deltas: tuple = (1e-1, 1e-2, 1e-3)
    chain_length: int = 8
    box_radius: float = 8.0
    data_cell: float = 0.5
    kernel_cell: float = 0.5
    m_data: int = 1
    b_floor: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if not 0.0 < self.s < 1.0:
            raise ValueError("s must lie in (0, 1)")
        if self.dim <= 2.0 * self.s:
            raise ValueError(f"need n > 2s, got n={self.dim}, s={self.s}")
        if self.p <= 2.0:
            raise ValueError("p must exceed 2")
        if self.lam < 1.0:
            raise ValueError("lambda must be >= 1")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.chain_length > 8:
            raise ValueError("level-set chains are capped at K = 8")
        self.refinements = tuple(float(h) for h in self.refinements)
        self.p_values = tuple(float(q) for q in self.p_values)
        self.alpha_fractions = tuple(float(a) for a in self.alpha_fractions)
        self.deltas = tuple(float(d) for d in self.deltas)

    @property
    def eps1(self) -> float:
        return 10.0 ** self.dim * self.eps

    def instance_seed(self, i: int) -> int:
        return int(self.seed) + 1000 * int(i)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps1"] = self.eps1
        # execution knob, not a semantic parameter: identical (seed, config)
        # runs must produce byte-identical reports at any worker count
        d.pop("workers")
        for key in ("refinements", "p_values", "alpha_fractions", "deltas"):
            d[key] = list(d[key])
        return d
