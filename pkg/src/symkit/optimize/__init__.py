"""Semidefinite programming and see-saw optimizers."""

from .haar import haar_random_state, haar_random_unitary, make_rng
from .sdp import SDPProblem, SDPSolution, hermitian_basis, lambda_max_sdp, sdp_solve

__all__ = [
    "SDPProblem",
    "SDPSolution",
    "haar_random_state",
    "haar_random_unitary",
    "hermitian_basis",
    "lambda_max_sdp",
    "make_rng",
    "sdp_solve",
]
