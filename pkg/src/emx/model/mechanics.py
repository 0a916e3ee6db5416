"""Membrane mechanics: plate modes, motional mass, bias-dependent frequency and damping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from emx.constants import CODATA, PhysicalConstants
from emx.errors import DomainError, PullInError
from emx.model.circuit import equivalent_d2cdx2, equivalent_dcdx
from emx.model.types import CapacitorStack, MechanicalMode, MembraneGeometry, OperatingPoint


def plate_mode_frequency(geom: MembraneGeometry, p: int, q: int) -> float:
    """Angular frequency of the (p, q) drum mode of a stress-dominated membrane.

    ``pi sqrt((sigma / rho) (p^2 / l_y^2 + q^2 / l_z^2))``
    """
    if p < 1 or q < 1:
        raise DomainError("plate_mode_frequency", "mode indices must be >= 1")
    return math.pi * math.sqrt(geom.stress / geom.density * (p**2 / geom.length_y**2 + q**2 / geom.length_z**2))


@dataclass(frozen=True)
class EffectiveMass:
    physical_mass: float
    quarter_mass: float
    dilution_factor: float
    m_eff: float


def _mode_shape_sq_integral(p, q, ly, lz, y0, y1, z0, z1, order):
    # Tensor Gauss-Legendre over the rectangle [y0, y1] x [z0, z1].
    nodes, weights = np.polynomial.legendre.leggauss(order)
    y = 0.5 * (y1 - y0) * nodes + 0.5 * (y1 + y0)
    z = 0.5 * (z1 - z0) * nodes + 0.5 * (z1 + z0)
    wy = 0.5 * (y1 - y0) * weights
    wz = 0.5 * (z1 - z0) * weights
    u2 = np.sin(p * np.pi * y / ly)[:, None] ** 2 * np.sin(q * np.pi * z / lz)[None, :] ** 2
    return float(wy @ u2 @ wz)


def effective_mass(geom: MembraneGeometry, p: int, q: int) -> EffectiveMass:
    """Motional mass of mode (p, q) as read out through the electrode.

    The motional mass of a stressed membrane is a quarter of its physical
    mass, independent of mode indices. The electrode only samples part of
    the mode, so the quarter mass is divided by the ratio of the squared
    mode shape integrated over the electrode to that over the membrane.
    """
    if p < 1 or q < 1:
        raise DomainError("effective_mass", "mode indices must be >= 1")
    region = geom.electrode_region
    y0, y1, z0, z1 = region.bounds
    membrane = geom.length_y * geom.length_z * geom.thickness * geom.density
    metal = region.size_y * region.size_z * geom.metal_thickness * geom.metal_density
    physical = membrane + metal

    order = max(64, 8 * max(p, q))
    inside = _mode_shape_sq_integral(p, q, geom.length_y, geom.length_z, y0, y1, z0, z1, order)
    total = _mode_shape_sq_integral(p, q, geom.length_y, geom.length_z,
                                    0.0, geom.length_y, 0.0, geom.length_z, order)
    dilution = inside / total
    if dilution <= 0:
        raise DomainError("effective_mass", "electrode does not overlap the mode")
    quarter = physical / 4.0
    return EffectiveMass(physical, quarter, dilution, quarter / dilution)


def anti_spring_frequency(mode: MechanicalMode, stack: CapacitorStack, op: OperatingPoint,
                          x: float = 0.0, constants: PhysicalConstants = CODATA) -> float:
    """Bias-softened mode frequency in rad/s.

    ``Omega^2(V) = Omega^2(0) - (V - V0)^2 C_eq'' / (2 m_eff)``

    Raises
    ------
    PullInError
        If the electrostatic spring cancels the mechanical one.
    """
    v = op.effective_bias
    omega2 = mode.omega_m0**2 - v**2 * equivalent_d2cdx2(stack, x, constants) / (2.0 * mode.m_eff)
    if omega2 <= 0:
        raise PullInError("anti_spring_frequency", f"bias {v:.3g} V beyond pull-in")
    return math.sqrt(omega2)


def pull_in_voltage(mode: MechanicalMode, stack: CapacitorStack,
                    constants: PhysicalConstants = CODATA) -> float:
    """Effective bias at which the softened frequency reaches zero."""
    return math.sqrt(2.0 * mode.m_eff * mode.omega_m0**2 / equivalent_d2cdx2(stack, 0.0, constants))


def bias_damping(mode: MechanicalMode, stack: CapacitorStack, op: OperatingPoint,
                 x: float = 0.0, constants: PhysicalConstants = CODATA) -> float:
    """Mechanical linewidth including motion-induced currents in the bias resistance.

    ``Gamma(V) = Gamma0 + (V - V0)^2 (dC_eq/dx)^2 R / m_eff``
    """
    v = op.effective_bias
    return mode.gamma_m0 + v**2 * equivalent_dcdx(stack, x, constants) ** 2 * stack.bias_resistance / mode.m_eff


def mechanical_susceptibility(mode: MechanicalMode, stack: CapacitorStack, op: OperatingPoint,
                              omega, linewidth: float | None = None,
                              constants: PhysicalConstants = CODATA):
    """Complex susceptibility ``1 / (m (Omega^2 - w^2 - i w Gamma))`` in m/N.

    ``linewidth`` replaces the bias-dependent intrinsic damping, e.g. with a
    cold-damped value.
    """
    omega_m = anti_spring_frequency(mode, stack, op, constants=constants)
    gamma = bias_damping(mode, stack, op, constants=constants) if linewidth is None else linewidth
    w = np.asarray(omega, dtype=float)
    chi = 1.0 / (mode.m_eff * (omega_m**2 - w**2 - 1j * w * gamma))
    return complex(chi) if chi.ndim == 0 else chi


def cold_damped_linewidth(gamma_m: float, cooperativity: float) -> float:
    """Linewidth under red-detuned sideband cooling, ``Gamma (1 + C)``."""
    if cooperativity < 0:
        raise DomainError("cold_damped_linewidth", "cooperativity must be >= 0")
    return gamma_m * (1.0 + cooperativity)
