"""Seeded random generators for expressions and operators."""

import random

from lpdo import LPDO, Expr, func, x, y

A = func("a")
B = func("b", "x")


def random_poly(rng: random.Random, degree: int = 2, atoms=(x, y)):
    total = Expr.const(0)
    for _ in range(rng.randint(1, 3)):
        term = Expr.const(rng.randint(-3, 3))
        for _ in range(rng.randint(0, degree)):
            term = term * rng.choice(atoms)
        total = total + term
    return total


# Denominators come from a small pool in x, y so that sums of many
# coefficients keep a bounded common denominator.  Function symbols only enter
# numerators: their derivatives would otherwise swell every denominator.
DENOMINATORS = (x + 1, y - 2, x * y + 3, x**2 + y)


def random_expr(rng: random.Random, degree: int = 2, with_functions: bool = True, den=None):
    atoms = (x, y, A, B) if with_functions else (x, y)
    num = random_poly(rng, degree, atoms)
    if rng.random() < 0.5:
        return num
    return num / (den if den is not None else rng.choice(DENOMINATORS))


def random_lpdo(rng: random.Random, order: int = 2, degree: int = 2, with_functions: bool = True):
    """Random operator whose coefficients share one denominator from the pool."""
    den = rng.choice(DENOMINATORS)
    coeffs = {}
    for i in range(order + 1):
        for j in range(order + 1 - i):
            if i + j == order or rng.random() < 0.6:
                coeffs[(i, j)] = random_expr(rng, degree, with_functions, den)
    L = LPDO(coeffs)
    if L.order < order:
        coeffs[(order, 0)] = Expr.const(1)
        L = LPDO(coeffs)
    return L
