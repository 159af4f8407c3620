"""Infinite convolutions generated by admissible pairs in Z^d.

Builds the finite-depth convolutions exactly, searches and verifies
Hadamard spectra through cyclotomic arithmetic, constructs candidate
spectra (canonical and corrected towers), and certifies spectrality via
cube containment, diagonal digit isolation, zero-set scans and
equi-positivity estimates.
"""

from .core import (AdmissiblePair, ConvolutionSystem, DigitSet, DiscreteMeasure,
                   ExpandingMatrix, build_mu_n, canonical_residue, check_Dd_membership,
                   check_expanding, contraction_norms, convolve_discrete, residues,
                   sample)
from .criteria import (CubeSpec, EquiPositivityCertificate, EquiPositivityFailure,
                       IsolationCheck, SupportCover, check_cube_conditions,
                       check_isolation_witness, estimate_equipositivity,
                       find_isolating_digit, scan_zero_set, truncated_support_cover)
from .fourier import (MaskProductEvaluator, Q_function, TruncationBound, grid_eval,
                      mask_eval, mu_n_hat, nu_gt_n_hat, q_values, tail_evaluator)
from .gram import GramReport, empirical_cf, gram_matrix
from .hadamard import (AdmissibilityReport, CyclotomicSum, check_admissible,
                       compose_pairs, find_spectra, mask_phase_matrix,
                       pushforward_spectrum, translate_digits, translate_spectrum)
from .pipeline import (CertificationReport, CertifyParams, certify_spectrality,
                       hypothesis_matrix)
from .spectrum import (SpectrumCandidate, canonical_spectrum, corrected_spectrum,
                       verify_level)

__version__ = "0.1.0"
