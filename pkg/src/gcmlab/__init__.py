"""gcmlab: quantum and classical chaos laboratory for the J=0 collective model."""

__version__ = "0.1.0"

from .model import (ModelParams, ShapeCoords, CartesianCoords, potential,
                    potential_xy, to_polar, to_cartesian, potential_extrema,
                    accessible_boundary, rescale_to_canonical)
from .basis import (QuantScheme, BasisState, BasisSpec, oscillator_energy,
                    enumerate_basis, radial_wavefunction, angular_wavefunction,
                    wavefunction)
from .hamiltonian import (BandedSymmetricMatrix, radial_element, angular_element,
                          assemble, assemble_m_block, optimize_a_osc)
from .eigensolver import (Spectrum, EigvecSet, solve, certify_convergence,
                          certify_by_dimension, stability_prefix)
from .spectral_stats import (LevelBin, UnfoldedSpacings, BrodyFit, BrodyCurve,
                             bin_levels, unfold, brody_pdf, brody_cdf,
                             brody_alpha, brody_sample, fit_brody, bias_study,
                             omega_vs_energy, nns_histogram, one_over_f_alpha)
from .classical import (PhasePoint, TrajectoryResult, RegularFractionPoint,
                        hamiltonian_value, integrate, sali_classify,
                        classify_batch, sample_energy_shell, regular_fraction,
                        freg_map)
from .density import DensityGrid, density_at, density_grid
