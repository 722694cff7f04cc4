"""Error correction of real-valued linear codes by l1 minimization."""
from .errors import (BracketError, DimensionError, EnumerationCapError, L1CodecError,
                     NoSolutionError, RankError, SingularityError, SolverError)
from .l1 import (BasisPursuitResult, DecodeResult, basis_pursuit, basis_pursuit_full,
                 decode_equivalence_check, decode_l1)
from .linalg import (annihilator, extremal_eigs_gram, sample_gaussian_matrix,
                     solve_gram_system, submatrix_columns)
from .lp import LinearProgram, LpSolution, LpStatus, ToleranceSettings, solve_lp
from .rng import SeededRng, derive_seed

__version__ = "0.1.0"
