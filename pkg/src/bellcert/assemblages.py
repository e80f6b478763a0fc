"""Assemblages: indexed families of steered (subnormalized) qubit states.

An assemblage collects, for every untrusted input string y and output string
b, the operator sigma_{b|y} = P(b|y) * rho_{b|y} on the trusted qubit.  This
module provides the data model, physical validation, Born-rule generation
from an explicit global state, and a handful of canonical built-ins.

Index convention: output/input strings are tuples with party 1 first (most
significant when flattened row-major).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product
from math import prod

import numpy as np

from . import qubit
from .tolerances import (
    HERMITICITY,
    NO_SIGNALING,
    NORMALIZATION,
    POSITIVITY,
    RECONSTRUCTION,
)

MemberKey = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class ScenarioShape:
    """Input/output counts for one trusted qubit plus N-1 untrusted parties."""

    untrusted_parties: int
    inputs_per_party: tuple[int, ...]
    outputs_per_party: tuple[int, ...]
    trusted_inputs: int
    trusted_outputs: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "inputs_per_party", tuple(int(v) for v in self.inputs_per_party)
        )
        object.__setattr__(
            self, "outputs_per_party", tuple(int(v) for v in self.outputs_per_party)
        )
        if self.untrusted_parties < 1:
            raise ValueError("at least one untrusted party is required")
        if len(self.inputs_per_party) != self.untrusted_parties:
            raise ValueError("inputs_per_party length must match untrusted_parties")
        if len(self.outputs_per_party) != self.untrusted_parties:
            raise ValueError("outputs_per_party length must match untrusted_parties")
        if any(m < 1 for m in self.inputs_per_party):
            raise ValueError("every party needs at least one input")
        if any(o < 1 for o in self.outputs_per_party):
            raise ValueError("every party needs at least one output")
        if self.trusted_inputs < 1:
            raise ValueError("the trusted party needs at least one input")
        if self.trusted_outputs != 2:
            raise ValueError("the trusted party is dichotomic (exactly 2 outputs)")

    def output_strings(self):
        return product(*(range(o) for o in self.outputs_per_party))

    def input_strings(self):
        return product(*(range(m) for m in self.inputs_per_party))

    @property
    def n_output_strings(self) -> int:
        return prod(self.outputs_per_party)

    @property
    def n_input_strings(self) -> int:
        return prod(self.inputs_per_party)

    @property
    def distribution_dims(self) -> tuple[int, ...]:
        return (
            self.trusted_outputs,
            *self.outputs_per_party,
            self.trusted_inputs,
            *self.inputs_per_party,
        )


@dataclass(frozen=True)
class Violation:
    """One validation finding: which invariant failed, where, and by how much."""

    kind: str
    b: tuple[int, ...] | None
    y: tuple[int, ...] | None
    magnitude: float

    def __str__(self) -> str:
        where = []
        if self.b is not None:
            where.append("b=" + ",".join(map(str, self.b)))
        if self.y is not None:
            where.append("y=" + ",".join(map(str, self.y)))
        loc = f" at {'|'.join(where)}" if where else ""
        return f"{self.kind}{loc}: magnitude {self.magnitude:.3e}"


@dataclass(eq=False)
class Assemblage:
    """Immutable map from (output string, input string) to a 2x2 operator.

    The constructor enforces structure only (complete key set, 2x2 finite
    complex entries); physical invariants are reported by :func:`validate`
    so that defective assemblages can be held and diagnosed.
    """

    shape: ScenarioShape
    members: dict[MemberKey, np.ndarray]

    def __post_init__(self) -> None:
        expected = {
            (b, y)
            for b in self.shape.output_strings()
            for y in self.shape.input_strings()
        }
        got = set(self.members)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValueError(
                f"member keys do not match shape (missing {missing[:3]}, extra {extra[:3]})"
            )
        frozen: dict[MemberKey, np.ndarray] = {}
        for key, op in self.members.items():
            arr = np.array(op, dtype=complex)
            if arr.shape != (2, 2):
                raise ValueError(f"member {key} is not a 2x2 operator")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"member {key} has non-finite entries")
            arr.setflags(write=False)
            frozen[key] = arr
        self.members = frozen

    def member(self, b, y) -> np.ndarray:
        key = (tuple(int(v) for v in b), tuple(int(v) for v in y))
        try:
            return self.members[key]
        except KeyError:
            raise IndexError(f"no member for b={key[0]}, y={key[1]}") from None

    def conditional_probability(self, b, y) -> float:
        """P(b|y) = Tr[sigma_{b|y}]."""
        return float(np.trace(self.member(b, y)).real)

    def stacked_members(self) -> np.ndarray:
        """Members as a dense array of shape (#b strings, #y strings, 2, 2)."""
        out = np.empty(
            (self.shape.n_output_strings, self.shape.n_input_strings, 2, 2),
            dtype=complex,
        )
        for i, b in enumerate(self.shape.output_strings()):
            for j, y in enumerate(self.shape.input_strings()):
                out[i, j] = self.members[(b, y)]
        return out

    def trace_table(self) -> np.ndarray:
        """P(b|y) for every member, shaped (#b strings, #y strings)."""
        return np.einsum("byii->by", self.stacked_members()).real

    def reduced_state(self, y) -> np.ndarray:
        """Trusted-side operator sum_b sigma_{b|y} for one input string."""
        yt = tuple(int(v) for v in y)
        return sum(self.members[(b, yt)] for b in self.shape.output_strings())

    def scaled(self, factor: float) -> "Assemblage":
        return Assemblage(
            self.shape, {k: factor * v for k, v in self.members.items()}
        )


def validate(
    assemblage: Assemblage,
    strict_no_signaling: bool = False,
    *,
    hermiticity_tol: float = HERMITICITY,
    positivity_tol: float = POSITIVITY,
    normalization_tol: float = NORMALIZATION,
    no_signaling_tol: float = NO_SIGNALING,
) -> list[Violation]:
    """Diagnose physical invariants; returns an empty list iff all hold.

    No-signaling findings are included only under ``strict_no_signaling``;
    the certification formulas are well defined without that property, so by
    default it is surfaced separately (the CLI prints it as a warning).
    """
    findings: list[Violation] = []
    shape = assemblage.shape
    for b in shape.output_strings():
        for y in shape.input_strings():
            op = assemblage.members[(b, y)]
            defect = qubit.hermiticity_defect(op)
            if defect > hermiticity_tol:
                findings.append(Violation("hermiticity", b, y, defect))
                continue
            (_, lmin), _ = qubit.eig2(0.5 * (op + op.conj().T))
            if lmin < -positivity_tol:
                findings.append(Violation("positivity", b, y, -lmin))
    for y in shape.input_strings():
        total = sum(
            assemblage.conditional_probability(b, y) for b in shape.output_strings()
        )
        if abs(total - 1.0) > normalization_tol:
            findings.append(Violation("normalization", None, y, abs(total - 1.0)))
    if strict_no_signaling:
        inputs = list(shape.input_strings())
        reference = assemblage.reduced_state(inputs[0])
        for y in inputs[1:]:
            deviation = float(
                np.abs(assemblage.reduced_state(y) - reference).max()
            )
            if deviation > no_signaling_tol:
                findings.append(Violation("no-signaling", None, y, deviation))
    return findings


def no_signaling_deviation(assemblage: Assemblage) -> float:
    """Largest entrywise spread of sum_b sigma_{b|y} across input strings."""
    inputs = list(assemblage.shape.input_strings())
    reference = assemblage.reduced_state(inputs[0])
    worst = 0.0
    for y in inputs[1:]:
        worst = max(worst, float(np.abs(assemblage.reduced_state(y) - reference).max()))
    return worst


@dataclass(eq=False)
class UntrustedMeasurementSet:
    """Per party and per input, a complete list of PSD effects.

    ``effects[party][input][outcome]`` is a d_party x d_party matrix; for a
    fixed party every input must have the same number of outcomes and the
    effects must sum to that party's identity.
    """

    effects: tuple[tuple[tuple[np.ndarray, ...], ...], ...]

    def __post_init__(self) -> None:
        parties = []
        for p, per_input in enumerate(self.effects):
            if not per_input:
                raise ValueError(f"party {p} has no inputs")
            coerced_inputs = []
            dim = None
            n_out = None
            for yi, effect_list in enumerate(per_input):
                ops = tuple(np.array(e, dtype=complex) for e in effect_list)
                if not ops:
                    raise ValueError(f"party {p} input {yi} has no effects")
                for op in ops:
                    if op.ndim != 2 or op.shape[0] != op.shape[1]:
                        raise ValueError(f"party {p} input {yi}: effects must be square")
                    if dim is None:
                        dim = op.shape[0]
                    if op.shape[0] != dim:
                        raise ValueError(f"party {p}: inconsistent effect dimensions")
                    if qubit.hermiticity_defect(op) > HERMITICITY:
                        raise ValueError(f"party {p} input {yi}: non-Hermitian effect")
                    lmin = float(np.linalg.eigvalsh(op).min())
                    if lmin < -POSITIVITY:
                        raise ValueError(
                            f"party {p} input {yi}: effect has eigenvalue {lmin:.3e}"
                        )
                if n_out is None:
                    n_out = len(ops)
                elif len(ops) != n_out:
                    raise ValueError(
                        f"party {p}: outcome count differs between inputs"
                    )
                total = sum(ops)
                if float(np.abs(total - np.eye(dim)).max()) > RECONSTRUCTION:
                    raise ValueError(
                        f"party {p} input {yi}: effects do not sum to the identity"
                    )
                for op in ops:
                    op.setflags(write=False)
                coerced_inputs.append(ops)
            parties.append(tuple(coerced_inputs))
        self.effects = tuple(parties)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(per_input[0][0].shape[0] for per_input in self.effects)

    @property
    def inputs_per_party(self) -> tuple[int, ...]:
        return tuple(len(per_input) for per_input in self.effects)

    @property
    def outputs_per_party(self) -> tuple[int, ...]:
        return tuple(len(per_input[0]) for per_input in self.effects)

    @classmethod
    def from_directions(cls, directions) -> "UntrustedMeasurementSet":
        """Projective qubit measurements from unit Bloch directions.

        ``directions[party][input]`` is a 3-vector; each becomes the +/-
        projector pair along that axis.
        """
        effects = tuple(
            tuple(qubit.direction_projectors(d) for d in per_party)
            for per_party in directions
        )
        return cls(effects)


def generate_from_state(
    state,
    measurements: UntrustedMeasurementSet,
    trusted_inputs: int = 2,
) -> Assemblage:
    """Born-rule assemblage from an explicit global state.

    ``state`` lives on trusted qubit (first factor) tensor the untrusted
    parties in order; member (b, y) is the partial trace over the untrusted
    parties of (I (x) M^1_{b1|y1} (x) ...) applied to the state.

    Parameters
    ----------
    state : array
        Density matrix of dimension 2 * prod(party dims); must be Hermitian,
        unit trace, and PSD within tolerance.
    measurements : UntrustedMeasurementSet
        One complete measurement per untrusted party and input.
    trusted_inputs : int
        Number of trusted-side settings recorded in the shape metadata.
    """
    rho = np.asarray(state, dtype=complex)
    dims = measurements.dims
    total_dim = 2 * prod(dims)
    if rho.shape != (total_dim, total_dim):
        raise ValueError(
            f"state has shape {rho.shape}, expected ({total_dim}, {total_dim}) "
            f"for untrusted dimensions {dims}"
        )
    if qubit.hermiticity_defect(rho) > 1e-9:
        raise ValueError("state is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > NORMALIZATION:
        raise ValueError(f"state trace is {np.trace(rho).real!r}, expected 1")
    if float(np.linalg.eigvalsh(rho).min()) < -POSITIVITY:
        raise ValueError("state is not positive semidefinite")

    untrusted_dim = prod(dims)
    rho4 = rho.reshape(2, untrusted_dim, 2, untrusted_dim)
    shape = ScenarioShape(
        untrusted_parties=len(dims),
        inputs_per_party=measurements.inputs_per_party,
        outputs_per_party=measurements.outputs_per_party,
        trusted_inputs=trusted_inputs,
    )
    members: dict[MemberKey, np.ndarray] = {}
    for y in shape.input_strings():
        for b in shape.output_strings():
            joint = reduce(
                np.kron,
                (measurements.effects[p][y[p]][b[p]] for p in range(len(dims))),
            )
            members[(b, y)] = np.einsum("iajb,ba->ij", rho4, joint)
    return Assemblage(shape, members)


# ---------------------------------------------------------------------------
# Canonical states and built-in assemblages
# ---------------------------------------------------------------------------

Z_DIRECTION = (0.0, 0.0, 1.0)
X_DIRECTION = (1.0, 0.0, 0.0)


def singlet_state() -> np.ndarray:
    """Two-qubit singlet (|01> - |10>)/sqrt(2) as an exact density matrix."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = rho[2, 2] = 0.5
    rho[1, 2] = rho[2, 1] = -0.5
    return rho


def ghz_state(n_parties: int) -> np.ndarray:
    """n-qubit GHZ state (|0...0> + |1...1>)/sqrt(2) as a density matrix."""
    if n_parties < 2:
        raise ValueError("a GHZ state needs at least 2 parties")
    dim = 2**n_parties
    rho = np.zeros((dim, dim), dtype=complex)
    for i in (0, dim - 1):
        for j in (0, dim - 1):
            rho[i, j] = 0.5
    return rho


def werner_state(visibility: float) -> np.ndarray:
    """Convex mixture v * singlet + (1 - v) * I/4."""
    v = float(visibility)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    return v * singlet_state() + (1.0 - v) * np.eye(4, dtype=complex) / 4.0


def zx_measurements(n_parties: int = 1) -> UntrustedMeasurementSet:
    """Each untrusted party measures Z on input 0 and X on input 1."""
    return UntrustedMeasurementSet.from_directions(
        [[Z_DIRECTION, X_DIRECTION]] * n_parties
    )


def xy_plane_measurements(angles_per_party) -> UntrustedMeasurementSet:
    """Projective measurements along (cos a, sin a, 0) for given angles.

    ``angles_per_party[party]`` is the list of equator angles (radians), one
    per input of that party.
    """
    directions = [
        [(float(np.cos(a)), float(np.sin(a)), 0.0) for a in angles]
        for angles in angles_per_party
    ]
    return UntrustedMeasurementSet.from_directions(directions)


BUILTIN_ASSEMBLAGE_NAMES = ("uniform-noise", "singlet-ZX", "werner-ZX", "ghz-N")


def builtin_assemblage(name: str, **params) -> Assemblage:
    """Canonical test assemblages addressable by name.

    Supported names: ``uniform-noise``, ``singlet-ZX``, ``werner-ZX``
    (needs ``visibility``), and ``ghz-<N>`` (GHZ state of N parties total,
    every untrusted party measuring Z on input 0 and X on input 1).
    """
    if name == "uniform-noise":
        _reject_params(name, params)
        shape = ScenarioShape(1, (2,), (2,), 2)
        members = {
            ((b,), (y,)): np.eye(2, dtype=complex) / 4.0
            for b in range(2)
            for y in range(2)
        }
        return Assemblage(shape, members)
    if name == "singlet-ZX":
        _reject_params(name, params)
        return generate_from_state(singlet_state(), zx_measurements())
    if name == "werner-ZX":
        visibility = params.pop("visibility", None)
        _reject_params(name, params)
        if visibility is None:
            raise ValueError("werner-ZX needs a visibility parameter")
        return generate_from_state(werner_state(visibility), zx_measurements())
    if name.startswith("ghz-"):
        _reject_params(name, params)
        try:
            n = int(name[len("ghz-") :])
        except ValueError:
            raise ValueError(f"malformed GHZ assemblage name {name!r}") from None
        if n < 3:
            raise ValueError("ghz-N needs at least 3 parties (2 untrusted)")
        return generate_from_state(ghz_state(n), zx_measurements(n - 1))
    raise ValueError(
        f"unknown built-in assemblage {name!r}; expected one of "
        f"{', '.join(BUILTIN_ASSEMBLAGE_NAMES)}"
    )


def _reject_params(name: str, params: dict) -> None:
    if params:
        raise ValueError(f"unexpected parameters for {name!r}: {sorted(params)}")
