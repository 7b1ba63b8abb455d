"""hypershift: phase shifts, X-ray transforms and trace-formula checks on H^{n+1}.

Library layout:

* ``geometry``   -- ball model, geodesic charts, scattering relation
* ``potentials`` -- radial/ambient potentials and decay bookkeeping
* ``xray``       -- geodesic X-ray transform, classical profile, nu-measure
* ``specfun``    -- complex log-Gamma, free spectral data, resolvent series
* ``radial``     -- radial mode solver, relative phase shifts, Born oracle
* ``trace``      -- mu_h pairings and quantum/classical moment reports
* ``inversion``  -- measure -> profile -> potential reconstruction
* ``cli``        -- configuration-driven command line front end
"""

from .geometry import (BallPoint, GeodesicChart, SpectralParameter,
                       boundary_defining_x, geodesic_point, geodesic_speed,
                       hyperbolic_distance, scattering_relation)
from .potentials import (AmbientPotential, RadialPotential, make_potential,
                         radial_to_ambient, tabulated_from_csv, weighted_norm)
from .specfun import (FreeEigenvalue, c_of_s, complex_log_gamma, digamma,
                      free_connection_ratio, free_eigenvalue_mu_k,
                      harmonic_dimension, resolvent_series_G)
from .xray import (ClassicalProfile, classical_nu_integral, xray_general,
                   xray_radial_profile)
from .radial import (ConnectionCoefficients, PhaseShiftSpectrum,
                     born_eigenvalue_h2, connection_coefficients, liouville_Q,
                     phase_spectrum, regular_solution, relative_phase_shift,
                     suggest_kmax)
from .trace import (SampledFunction, TraceReport, TraceRow, convergence_study,
                    moment_compare, mu_h_pairing)
from .inversion import (MonotoneProfile, potential_from_profile,
                        profile_from_measure)

__version__ = "0.1.0"
