"""Complex-amplitude algebra for the AOM-dressed Mach-Zehnder interferometer.

Two representations live here:

* closed forms for the two output ports (``mzi_output_fields``) and their
  projection onto a rotated polarizer (``polarizer_project``);
* an explicit element chain (``propagate_chain``) that pushes a source field
  through beam splitters, wave plates, AOMs, delay lines and a PZT.

The chain is an independent route to the same output and is what the tests
use to check the closed forms.

Conventions
-----------
Time dependence is ``exp(-i w t)``, so a delay ``tau`` multiplies a mode of
frequency offset ``w`` by ``exp(+i w tau)``.  The common carrier phase of a
delay is absorbed into the PZT phase ``phi``.  Angles are radians.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ChainError, DomainError

SQRT_HALF = 1.0 / math.sqrt(2.0)

# 50/50 beam splitter with an i on reflection.
BS_MATRIX = SQRT_HALF * np.array([[1.0, 1.0j], [1.0j, 1.0]])


def _finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite input: {v!r}")


# ---------------------------------------------------------------------------
# Mode bookkeeping
# ---------------------------------------------------------------------------

class ModeLabel(enum.Enum):
    """The four single-photon basis modes: polarization x AOM detuning sign."""

    H_MINUS = ("H", -1)
    H_PLUS = ("H", +1)
    V_MINUS = ("V", -1)
    V_PLUS = ("V", +1)

    @property
    def polarization(self) -> str:
        return self.value[0]

    @property
    def sign(self) -> int:
        return self.value[1]

    @property
    def symbol(self) -> str:
        return self.polarization + ("-" if self.sign < 0 else "+")

    @classmethod
    def of(cls, polarization: str, sign: int) -> "ModeLabel":
        return cls((polarization, sign))

    def inner(self, other: "ModeLabel") -> float:
        return 1.0 if self is other else 0.0


MODE_ORDER = (ModeLabel.H_MINUS, ModeLabel.H_PLUS, ModeLabel.V_MINUS, ModeLabel.V_PLUS)


@dataclass(frozen=True)
class ModeAmplitudes:
    """Field at one output port, as amplitudes over the four basis modes."""

    port: str
    amps: Mapping[ModeLabel, complex]

    def __post_init__(self):
        if self.port not in ("A", "B"):
            raise DomainError(f"port must be 'A' or 'B', got {self.port!r}")
        full = {m: complex(self.amps.get(m, 0.0)) for m in MODE_ORDER}
        _finite(*full.values())
        object.__setattr__(self, "amps", full)

    def __getitem__(self, mode: ModeLabel) -> complex:
        return self.amps[mode]

    def as_array(self) -> np.ndarray:
        return np.array([self.amps[m] for m in MODE_ORDER])

    def intensity(self) -> float:
        return float(np.sum(np.abs(self.as_array()) ** 2))


@dataclass(frozen=True)
class OpticsParams:
    """Experiment knobs. ``tau`` is in inverse units of ``delta_f``."""

    xi: float = math.pi / 4
    theta: float = math.pi / 4
    phi: float = 0.0
    tau: float = 0.0
    delta_f: float = 0.0

    def __post_init__(self):
        _finite(self.xi, self.theta, self.phi, self.tau, self.delta_f)


# ---------------------------------------------------------------------------
# Two-component primitives
# ---------------------------------------------------------------------------

def bs_apply(amps: Sequence[complex]) -> np.ndarray:
    """Apply the symmetric beam splitter to a two-port amplitude pair."""
    vec = np.asarray(amps, dtype=complex)
    if vec.shape != (2,):
        raise DomainError(f"expected two amplitudes, got shape {vec.shape}")
    _finite(vec)
    return BS_MATRIX @ vec


def hwp_matrix(alpha: float) -> np.ndarray:
    c, s = math.cos(2 * alpha), math.sin(2 * alpha)
    return np.array([[c, s], [s, -c]], dtype=complex)


def hwp_apply(alpha: float, amps: Sequence[complex]) -> np.ndarray:
    """Half-wave plate with fast axis at ``alpha`` acting on (H, V)."""
    vec = np.asarray(amps, dtype=complex)
    if vec.shape != (2,):
        raise DomainError(f"expected (h, v) amplitudes, got shape {vec.shape}")
    _finite(alpha, vec)
    return hwp_matrix(alpha) @ vec


def polarizer_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c * c, c * s], [c * s, s * s]], dtype=complex)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def mzi_output_fields(p: OpticsParams, E0: complex = 1.0) -> tuple[ModeAmplitudes, ModeAmplitudes]:
    """Output fields of both MZI ports for one photon pair of detuning ``p.delta_f``.

    Port A carries H- and V+, port B carries V- and H+; the overall
    ``exp(-i delta_f tau)`` prefactor is kept.
    """
    _finite(E0)
    pre = np.exp(-1j * p.delta_f * p.tau)
    beat = np.exp(1j * (2 * p.delta_f * p.tau + p.phi))
    a = E0 / 2 * pre
    b = 1j * E0 / 2 * pre
    port_a = ModeAmplitudes("A", {ModeLabel.H_MINUS: a, ModeLabel.V_PLUS: -a * beat})
    port_b = ModeAmplitudes("B", {ModeLabel.V_MINUS: b, ModeLabel.H_PLUS: b * beat})
    return port_a, port_b


def polarizer_project(angle: float, fld: ModeAmplitudes) -> dict[int, complex]:
    """Scalar coefficients along the polarizer axis, keyed by detuning sign (-1, +1).

    The axis is ``(cos angle, sin angle)`` in the (H, V) basis, angle measured
    counter-clockwise from horizontal.
    """
    _finite(angle)
    c, s = math.cos(angle), math.sin(angle)
    return {
        sign: c * fld[ModeLabel.of("H", sign)] + s * fld[ModeLabel.of("V", sign)]
        for sign in (-1, +1)
    }


def project_field(angle: float, fld: ModeAmplitudes) -> ModeAmplitudes:
    """Vector form of the projection: coefficient times the polarizer axis."""
    coeffs = polarizer_project(angle, fld)
    c, s = math.cos(angle), math.sin(angle)
    amps = {}
    for sign, k in coeffs.items():
        amps[ModeLabel.of("H", sign)] = c * k
        amps[ModeLabel.of("V", sign)] = s * k
    return ModeAmplitudes(fld.port, amps)


# ---------------------------------------------------------------------------
# Element chain
# ---------------------------------------------------------------------------
# State array axes: (arm 0/1, polarization H/V, tag carrier/minus/plus).
# After the PBS the arm index doubles as the output port (0 -> A, 1 -> B).

POL_INDEX = {"H": 0, "V": 1}
TAG_INDEX = {0: 0, -1: 1, +1: 2}


@dataclass(frozen=True)
class FieldState:
    amps: np.ndarray
    offsets: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def intensity(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def to_ports(self) -> tuple[ModeAmplitudes, ModeAmplitudes]:
        """Read the two spatial outputs as ModeAmplitudes at ports A and B.

        Fails if light remains at the unshifted carrier, which has no label
        in the four-mode basis.
        """
        if np.any(np.abs(self.amps[:, :, 0]) > 0):
            raise ChainError("carrier-frequency light left at output; chain lacks AOMs")
        ports = []
        for arm, name in enumerate("AB"):
            amps = {
                m: self.amps[arm, POL_INDEX[m.polarization], TAG_INDEX[m.sign]]
                for m in MODE_ORDER
            }
            ports.append(ModeAmplitudes(name, amps))
        return ports[0], ports[1]


def source_field(E0: complex = 1.0, polarization: str = "H", arm: int = 0) -> FieldState:
    """Single-photon input of amplitude ``E0`` in one spatial mode."""
    _finite(E0)
    amps = np.zeros((2, 2, 3), dtype=complex)
    amps[arm, POL_INDEX[polarization], 0] = E0
    return FieldState(amps)


def _check_arm(arm) -> int:
    if arm not in (0, 1) or isinstance(arm, bool):
        raise ChainError(f"element addressed to nonexistent arm {arm!r}")
    return arm


class Element:
    """Base optical element. ``apply`` maps a FieldState to a new one."""

    unitary = True

    def apply(self, state: FieldState) -> FieldState:
        raise NotImplementedError


@dataclass(frozen=True)
class BeamSplitter(Element):
    adjoint: bool = False

    def apply(self, state):
        m = BS_MATRIX.conj().T if self.adjoint else BS_MATRIX
        return FieldState(np.einsum("ij,jpt->ipt", m, state.amps), state.offsets)


@dataclass(frozen=True)
class PolarizingBeamSplitter(Element):
    """Transmits H straight through, swaps V between arms with an i."""

    def apply(self, state):
        out = state.amps.copy()
        out[:, 1, :] = 1j * state.amps[::-1, 1, :]
        return FieldState(out, state.offsets)


@dataclass(frozen=True)
class HalfWavePlate(Element):
    alpha: float
    arm: int

    def apply(self, state):
        arm = _check_arm(self.arm)
        out = state.amps.copy()
        out[arm] = hwp_matrix(self.alpha) @ state.amps[arm]
        return FieldState(out, state.offsets)


@dataclass(frozen=True)
class AOMShift(Element):
    """Frequency shift by ``sign * delta_f``: swaps the carrier tag with the signed tag."""

    sign: int
    delta_f: float
    arm: int

    def apply(self, state):
        arm = _check_arm(self.arm)
        if self.sign not in (-1, 1):
            raise ChainError(f"AOM sign must be -1 or +1, got {self.sign!r}")
        tag = TAG_INDEX[self.sign]
        offsets = list(state.offsets)
        shift = self.sign * self.delta_f
        if offsets[tag] not in (0.0, shift):
            raise ChainError("AOMs disagree on the detuning of one tag")
        offsets[tag] = shift
        out = state.amps.copy()
        out[arm, :, 0], out[arm, :, tag] = state.amps[arm, :, tag], state.amps[arm, :, 0]
        return FieldState(out, tuple(offsets))


@dataclass(frozen=True)
class Delay(Element):
    tau: float
    arm: int

    def apply(self, state):
        arm = _check_arm(self.arm)
        out = state.amps.copy()
        out[arm] = out[arm] * np.exp(1j * np.asarray(state.offsets) * self.tau)
        return FieldState(out, state.offsets)


@dataclass(frozen=True)
class PhaseShift(Element):
    phi: float
    arm: int

    def apply(self, state):
        arm = _check_arm(self.arm)
        out = state.amps.copy()
        out[arm] = out[arm] * np.exp(1j * self.phi)
        return FieldState(out, state.offsets)


@dataclass(frozen=True)
class Polarizer(Element):
    angle: float
    arm: int
    unitary = False

    def apply(self, state):
        arm = _check_arm(self.arm)
        out = state.amps.copy()
        out[arm] = polarizer_matrix(self.angle) @ state.amps[arm]
        return FieldState(out, state.offsets)


def propagate_chain(chain: Sequence[Element], source: FieldState) -> FieldState:
    """Apply ``chain`` element by element to ``source``."""
    state = source
    for el in chain:
        if not isinstance(el, Element):
            raise ChainError(f"not an optical element: {el!r}")
        state = el.apply(state)
    return state


def canonical_chain(delta_f: float, tau: float, phi: float) -> list[Element]:
    """The reference MZI layout whose output reproduces ``mzi_output_fields``.

    Input is H-polarized in arm 0.  Arm 0 (BS transmission) is the "-" arm,
    arm 1 (BS reflection) the "+" arm.  Both arms carry a 22.5 deg HWP, their
    AOM and a delay line of length ``tau``; the PZT sits in the "+" arm.
    """
    _finite(delta_f, tau, phi)
    hwp = math.pi / 8
    return [
        BeamSplitter(),
        AOMShift(-1, delta_f, arm=0),
        HalfWavePlate(hwp, arm=0),
        Delay(tau, arm=0),
        AOMShift(+1, delta_f, arm=1),
        HalfWavePlate(hwp, arm=1),
        Delay(tau, arm=1),
        PhaseShift(phi, arm=1),
        PolarizingBeamSplitter(),
    ]


def chain_output_fields(p: OpticsParams, E0: complex = 1.0) -> tuple[ModeAmplitudes, ModeAmplitudes]:
    """Output ports obtained by propagating through ``canonical_chain``."""
    state = propagate_chain(canonical_chain(p.delta_f, p.tau, p.phi), source_field(E0, "H", 0))
    return state.to_ports()


def transfer_matrix(element: Element, delta_f: float = 1.0) -> np.ndarray:
    """12x12 matrix of ``element`` acting on the flattened state, all tags live."""
    offsets = (0.0, -delta_f, delta_f)
    cols = []
    for k in range(12):
        basis = np.zeros(12, dtype=complex)
        basis[k] = 1.0
        out = element.apply(FieldState(basis.reshape(2, 2, 3), offsets))
        cols.append(out.amps.reshape(12))
    return np.column_stack(cols)
