"""Reflection groups, sign characters and chamber heat kernels.

Build a root system, generate its reflection group, pick a sign character
and evaluate the image-sum heat kernel of the positive Weyl chamber::

    >>> from reflect_kernel import dihedral_roots, generate_group, find_character, heat_symmetrized
    >>> W = generate_group(dihedral_roots(4))
    >>> K = heat_symmetrized(W, find_character(W, "sgn"), t=0.5)
    >>> round(float(K([1.0, 0.3], [1.0, 0.3])), 10)
    0.0028207198
"""
from .characters import (TwoCharacter, character_kernel, enumerate_characters, find_character,
                         sgn_character, trivial_character)
from .coxeter import (GroupElement, ReflectionGroup, RootSystem, build_root_system, chamber_contains,
                      dihedral_roots, fold_to_chamber, generate_group, orthogonal_roots, reflect,
                      simple_roots, trivial_roots)
from .errors import (ConfigError, InvalidArgumentError, OnWallError, ReflectKernelError, RootSystemError,
                     SeriesConvergenceWarning, SingularityError, UnsupportedCharacterError)
from .ibvp import (BoundaryPartition, boundary_check, chapman_kolmogorov, heat_residual, mass,
                   outside_ball_mass, solution_boundary_check, solve_heat, solve_heat_unfolded)
from .kernels import (BaseKernel, GridField, SymmetrizedKernel, dihedral_heat, extend_function, heat_base,
                      heat_symmetrized, orthant_heat_product, symmetrize_function, symmetrized_eval)
from .oracles import (McEstimate, SeriesSpec, bessel_I, carslaw_jaeger, check_derivative_intertwining,
                      check_extension_pairing, mc_folded_density, mc_killed_mass)

__version__ = "0.1.0"
