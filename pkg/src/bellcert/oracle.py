"""Brute-force cross-checks: measurement search and local-bound enumeration.

The search maximizes the Bell functional over trusted measurements by direct
Born-rule evaluation (projective grid over the sphere, golden-section
refinement, random POVM samples, optional injection of the closed-form
candidate).  Because the functional splits over trusted inputs, each input
is searched independently; the returned value is recomputed end to end from
the chosen measurements through ``distribution_from`` and ``bell_value`` so
that it never relies on the closed-form expression being checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import pi, prod, sqrt

import numpy as np

from .assemblages import Assemblage
from .criterion import DichotomicPOVM, distribution_from, evaluate
from .inequalities import BellInequality, bell_value
from .sampling import random_dichotomic_povm

_INV_PHI = (sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the measurement search; identical configs give identical results."""

    grid_resolution: int = 180
    povm_samples: int = 20
    refine_iterations: int = 24
    seed: int = 0
    inject_closed_form: bool = True

    def __post_init__(self) -> None:
        if self.grid_resolution < 1:
            raise ValueError("grid_resolution must be positive")
        if self.povm_samples < 0:
            raise ValueError("povm_samples must be nonnegative")
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be nonnegative")

    @property
    def angular_step(self) -> float:
        """Grid spacing per angle; the documented linear error bound is
        (lhs - constant term) * angular_step."""
        return pi / self.grid_resolution


@dataclass(eq=False)
class OracleResult:
    value: float
    measurements: list[DichotomicPOVM]
    config: SearchConfig
    per_input: np.ndarray
    candidates_evaluated: int

    def to_jsonable(self) -> dict:
        return {
            "value": float(self.value),
            "per_input": [float(v) for v in self.per_input],
            "candidates_evaluated": int(self.candidates_evaluated),
            "config": {
                "grid_resolution": self.config.grid_resolution,
                "povm_samples": self.config.povm_samples,
                "refine_iterations": self.config.refine_iterations,
                "seed": self.config.seed,
                "inject_closed_form": self.config.inject_closed_form,
                "angular_step": self.config.angular_step,
            },
        }


def _direction(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def _per_input_operators(
    assemblage: Assemblage, inequality: BellInequality
) -> list[tuple[np.ndarray, np.ndarray]]:
    """For each x, the pair D_a = sum_{b,y} beta[a,b,x,y] sigma_{b|y}.

    The search contribution of a measurement (M0, M1) at input x is
    Re(Tr[M0 D0] + Tr[M1 D1]); this is the Born-rule contraction with the
    sums over members carried out once up front.
    """
    shape = inequality.shape
    beta = inequality.coefficients.reshape(
        2, shape.n_output_strings, shape.trusted_inputs, shape.n_input_strings
    )
    members = assemblage.stacked_members()
    stacked = np.einsum("abxy,byij->xaij", beta, members)
    return [(stacked[x, 0], stacked[x, 1]) for x in range(shape.trusted_inputs)]


def _contribution(effects, operators) -> float:
    d0, d1 = operators
    m0, m1 = effects
    return float((np.einsum("ij,ji->", m0, d0) + np.einsum("ij,ji->", m1, d1)).real)


def _projective_contribution(theta, phi, operators) -> np.ndarray:
    """Vectorized contribution of the projective pair along (theta, phi)."""
    d0, d1 = operators
    e = d0 - d1
    c2 = np.cos(theta / 2.0) ** 2
    s2 = np.sin(theta / 2.0) ** 2
    cross = np.cos(theta / 2.0) * np.sin(theta / 2.0)
    phase = np.exp(1j * phi)
    value = (
        c2 * e[0, 0]
        + s2 * e[1, 1]
        + cross * (np.conj(phase) * e[1, 0] + phase * e[0, 1])
    )
    return (value + np.trace(d1)).real


def _golden_max(f, lo: float, hi: float, iterations: int) -> float:
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return c if fc >= fd else d


def max_violation_search(
    assemblage: Assemblage,
    inequality: BellInequality,
    config: SearchConfig | None = None,
) -> OracleResult:
    """Directly search trusted measurements maximizing the Bell functional.

    Candidates per trusted input: a uniform (theta, phi) grid of projective
    measurements, golden-section refinement around the best grid cell,
    ``povm_samples`` random dichotomic POVMs (random eigenvalues and random
    projectors, exercising the full POVM space), and optionally the
    closed-form direction as a seed candidate so the search attains the
    certified value exactly rather than up to grid resolution.  Ties keep
    the earliest candidate, so results are reproducible for a fixed config.
    """
    cfg = config or SearchConfig()
    if assemblage.shape != inequality.shape:
        raise ValueError("assemblage and inequality shapes differ")
    rng = np.random.default_rng(cfg.seed)
    operators = _per_input_operators(assemblage, inequality)

    thetas = np.linspace(0.0, pi, cfg.grid_resolution + 1)
    phis = np.arange(2 * cfg.grid_resolution) * (pi / cfg.grid_resolution)
    theta_grid = thetas[:, None]
    phi_grid = phis[None, :]

    closed_form = evaluate(assemblage, inequality) if cfg.inject_closed_form else None

    best_measurements: list[DichotomicPOVM] = []
    per_input = np.zeros(inequality.shape.trusted_inputs)
    candidates = 0

    for x, ops in enumerate(operators):
        values = _projective_contribution(theta_grid, phi_grid, ops)
        candidates += values.size
        flat_best = int(np.argmax(values))
        ti, pi_idx = np.unravel_index(flat_best, values.shape)
        best_theta = float(thetas[ti])
        best_phi = float(phis[pi_idx])
        best_value = float(values[ti, pi_idx])

        step = cfg.angular_step
        if cfg.refine_iterations > 0:
            fine_theta = _golden_max(
                lambda t: _projective_contribution(t, best_phi, ops),
                max(best_theta - step, 0.0),
                min(best_theta + step, pi),
                cfg.refine_iterations,
            )
            fine_phi = _golden_max(
                lambda p: _projective_contribution(fine_theta, p, ops),
                best_phi - step,
                best_phi + step,
                cfg.refine_iterations,
            )
            candidates += 2 * (cfg.refine_iterations + 2)
            refined = float(_projective_contribution(fine_theta, fine_phi, ops))
            if refined > best_value:  # keep the grid point if refinement regressed
                best_theta, best_phi, best_value = fine_theta, fine_phi, refined
        best = DichotomicPOVM.from_direction(_direction(best_theta, best_phi))

        for _ in range(cfg.povm_samples):
            povm = random_dichotomic_povm(rng)
            candidates += 1
            value = _contribution(povm.effects, ops)
            if value > best_value:
                best_value = value
                best = povm

        if closed_form is not None:
            candidate = closed_form.optimal_measurements[x]
            candidates += 1
            value = _contribution(candidate.effects, ops)
            if value > best_value:
                best_value = value
                best = candidate

        per_input[x] = best_value
        best_measurements.append(best)

    value = bell_value(inequality, distribution_from(assemblage, best_measurements))
    return OracleResult(value, best_measurements, cfg, per_input, candidates)


# ---------------------------------------------------------------------------
# Exact local bound by deterministic-strategy enumeration
# ---------------------------------------------------------------------------


def strategy_count(shape) -> int:
    """Number of local deterministic strategies for a scenario shape."""
    untrusted = prod(
        o**m for o, m in zip(shape.outputs_per_party, shape.inputs_per_party)
    )
    return (shape.trusted_outputs**shape.trusted_inputs) * untrusted


def local_bound_enumerate(
    inequality: BellInequality, cap: int = 100_000_000
) -> float:
    """Exact maximum of beta . P over all local deterministic strategies.

    Untrusted response functions are enumerated exhaustively; for each, the
    trusted party's best response decomposes per input, so her optimum is
    taken in closed form instead of looping over her 2**m functions (the
    result is identical).  Sums of integer coefficients are exact in floats
    at these sizes.
    """
    shape = inequality.shape
    total = strategy_count(shape)
    if total > cap:
        raise ValueError(
            f"{total} deterministic strategies exceed the enumeration cap {cap}"
        )
    beta = inequality.coefficients
    parties = shape.untrusted_parties
    response_sets = [
        list(product(range(o), repeat=m))
        for o, m in zip(shape.outputs_per_party, shape.inputs_per_party)
    ]
    all_inputs = list(shape.input_strings())
    best = -np.inf
    for responses in product(*response_sets):
        per_x = np.zeros((2, shape.trusted_inputs))
        for y in all_inputs:
            b = tuple(responses[i][y[i]] for i in range(parties))
            per_x += beta[(slice(None), *b, slice(None), *y)]
        value = float(per_x.max(axis=0).sum())
        if value > best:
            best = value
    return best
