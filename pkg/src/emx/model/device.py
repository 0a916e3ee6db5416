"""A complete device description plus its derived operating quantities."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property

from emx.constants import CODATA, PhysicalConstants
from emx.model import circuit, mechanics
from emx.model.types import CapacitorStack, MechanicalMode, MicrowaveCavity, OperatingPoint


@dataclass(frozen=True)
class Transducer:
    """One mechanical mode coupled to the LC resonator at an operating point.

    Parameters
    ----------
    g0 : float, optional
        Calibrated vacuum coupling in rad/s. When given it replaces the
        parallel-plate estimate of the frequency pull.
    chain_gain : float
        Conversion from displacement variance to the power measured at the
        analyser, in V^2/m^2. Used only for sideband areas.
    """

    mode: MechanicalMode
    stack: CapacitorStack
    cavity: MicrowaveCavity
    op: OperatingPoint = field(default_factory=OperatingPoint)
    g0: float | None = None
    chain_gain: float = 1.0
    constants: PhysicalConstants = CODATA

    def with_op(self, **changes) -> Transducer:
        return dataclasses.replace(self, op=dataclasses.replace(self.op, **changes))

    def replace(self, **changes) -> Transducer:
        return dataclasses.replace(self, **changes)

    @property
    def effective_bias(self) -> float:
        return self.op.effective_bias

    @cached_property
    def c_eq(self) -> float:
        return circuit.equivalent_capacitance(self.stack, 0.0, self.constants)

    @cached_property
    def dcdx(self) -> float:
        return circuit.equivalent_dcdx(self.stack, 0.0, self.constants)

    @cached_property
    def d2cdx2(self) -> float:
        return circuit.equivalent_d2cdx2(self.stack, 0.0, self.constants)

    @cached_property
    def omega_m(self) -> float:
        return mechanics.anti_spring_frequency(self.mode, self.stack, self.op, constants=self.constants)

    @cached_property
    def gamma_m(self) -> float:
        return mechanics.bias_damping(self.mode, self.stack, self.op, constants=self.constants)

    @cached_property
    def omega_c(self) -> float:
        return circuit.cavity_frequency(self.cavity, self.stack, 0.0, self.constants)

    @cached_property
    def x_zpf(self) -> float:
        """Zero-point motion at the bias-softened frequency."""
        return circuit.zero_point_fluctuation(self.mode.m_eff, self.omega_m, self.constants)

    @cached_property
    def coupling(self) -> float:
        """``|d omega_c / dx|`` in rad/s/m.

        A calibrated ``g0`` is taken as measured at zero bias, so it is
        converted with the unbiased zero-point motion.
        """
        if self.g0 is not None:
            return self.g0 / circuit.zero_point_fluctuation(self.mode.m_eff, self.mode.omega_m0, self.constants)
        return abs(circuit.frequency_pull(self.cavity, self.stack, 0.0, self.constants))

    @cached_property
    def vacuum_coupling(self) -> float:
        return self.coupling * self.x_zpf

    @cached_property
    def photon_number(self) -> float:
        return circuit.photon_number(self.cavity, self.omega_c, self.op, self.constants)

    @cached_property
    def optical_damping(self) -> float:
        """Extra linewidth from the red-detuned pump, ``4 g0^2 n / kappa``."""
        return 4.0 * self.vacuum_coupling**2 * self.photon_number / self.cavity.kappa

    @cached_property
    def cooperativity(self) -> float:
        return circuit.cooperativity(self.vacuum_coupling, self.photon_number, self.cavity.kappa, self.gamma_m)

    @cached_property
    def gamma_em(self) -> float:
        """Total linewidth, intrinsic (bias dependent) plus cold damping."""
        return self.gamma_m + self.optical_damping

    @property
    def sideband_resolution(self) -> float:
        return self.omega_m / self.cavity.kappa
