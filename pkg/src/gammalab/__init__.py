"""Numerical experiments on the symmetrized polydisc.

Modules
-------
numerics
    Dense complex kernels: Schur form, norms, numerical radius, roots.
gamma_geom
    Symmetrization and membership classification.
joint_spectrum
    Joint eigenvalues of commuting matrix tuples.
variety
    Distinguished varieties cut out by commuting matrix pencils.
op_theory
    Fundamental operator tuples, Toeplitz models and compressions.
vn_check
    Randomized von Neumann inequality experiments.
interplay
    The projection from three to two variables and its counterexample.
"""

from .errors import (BoundaryRegimeError, CommutationError, ConvergenceError,
                     GammaLabError, HypothesesNotMet, IsometryDefectError,
                     JointSpectrumError, NotPSDError)
from .gamma_geom import (GammaPoint, Label, PointClass, ay_criterion, canonical_c,
                         classify_coords,
                         classify_point, desymmetrize, symmetrize)
from .joint_spectrum import (JointSpectrum, MatrixTuple, joint_eigs, joint_eigs_oracle,
                             verify_commuting)

__version__ = "0.1.0"
