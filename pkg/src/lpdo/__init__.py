"""Symbolic toolkit for linear partial differential operators in ``Dx, Dy``."""

from .calculus import exp_symbol, integrate
from .expr import (
    DivisionByZeroError,
    Expr,
    NormalForm,
    SideConditions,
    SubstitutionError,
    collect_side_conditions,
    defined,
    depends_on,
    differentiate,
    func,
    is_zero,
    normalize,
    param,
    substitute,
    var,
    x,
    y,
)
from .families import (
    FamilyTemplate,
    VerificationReport,
    epsilon_expand,
    is_reducible,
    landau_family,
    linearized_residual,
    linearized_system,
    quartic_xx_family,
    quartic_xy_family,
    regroup,
    second_order_family,
    verify_family,
)
from .operator import LPDO, Dx, Dy, adjoint, apply, compose, equals, gauge, is_hyperbolic, subtract, symbol
from .solver import CoeffSystem, NotFactorable, SolveOutcome, solve_triangular, unique_factorization
from .symbols import (
    FactorizationType,
    LinearForm,
    NeedsHint,
    SymFactorization,
    SymPoly,
    enumerate_types,
    factor_symbol,
    is_coprime,
    verify_hint,
)

__all__ = [name for name in dir() if not name.startswith("_")]
