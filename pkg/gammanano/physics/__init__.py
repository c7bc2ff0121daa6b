"""
Analytic kernel: wave packets, resonant transmission and integrated count rates.

All times are in units of T1 (the 141 ns lifetime); convert at the boundaries with
PhysicsUnits.to_natural / to_ns.
"""

from gammanano.physics.params import PhysicsUnits, AbsorberParams, QuadratureSpec, coupling
from gammanano.physics.special import (
    bessel_j0,
    bessel_j1,
    bessel_i0,
    sigma0,
    sigma1,
    baseline_nb,
)
from gammanano.physics.phase import PhaseProfile, displacement_profile
from gammanano.physics.envelopes import (
    ComplexEnvelope,
    source_envelope,
    source_field,
    pi_step_field,
    modulated_field,
    resonant_envelope,
    pi_shift_envelope,
    response_kernel,
    convolve_response,
    frequency_domain_envelope,
    transmitted_norm,
)
from gammanano.physics.rates import (
    integrated_rate_step,
    rate_general_phase,
    observed_rate,
    rate_table,
    period_mean_rate,
    emission_cells,
    photon_amplitude,
    photon_transmission,
)

__all__ = [
    "PhysicsUnits",
    "AbsorberParams",
    "QuadratureSpec",
    "coupling",
    "bessel_j0",
    "bessel_j1",
    "bessel_i0",
    "sigma0",
    "sigma1",
    "baseline_nb",
    "PhaseProfile",
    "displacement_profile",
    "ComplexEnvelope",
    "source_envelope",
    "source_field",
    "pi_step_field",
    "modulated_field",
    "resonant_envelope",
    "pi_shift_envelope",
    "response_kernel",
    "convolve_response",
    "frequency_domain_envelope",
    "transmitted_norm",
    "integrated_rate_step",
    "rate_general_phase",
    "observed_rate",
    "rate_table",
    "period_mean_rate",
    "emission_cells",
    "photon_amplitude",
    "photon_transmission",
]
