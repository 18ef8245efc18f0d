"""Conic programs, the interior-point solver and SDPA interop."""
from .hsd import SolverOptions, solve, verify_certificate
from .lp import lp_solve
from .program import (DUAL_INFEASIBLE, OPTIMAL, PRIMAL_INFEASIBLE, UNKNOWN,
                      ConicProgram, ConicSolution, ProgramBuilder)
from .sdpa import export_sdpa, parse_sdpa

__all__ = ["ConicProgram", "ConicSolution", "ProgramBuilder", "SolverOptions", "solve",
           "lp_solve", "export_sdpa", "parse_sdpa", "verify_certificate",
           "OPTIMAL", "PRIMAL_INFEASIBLE", "DUAL_INFEASIBLE", "UNKNOWN"]
