"""Real-coefficient univariate polynomials: arithmetic, complex evaluation,
and root finding.

Coefficients are stored in ascending degree order, so ``coeffs[i]`` multiplies
``z**i``.  The zero polynomial is represented by the single coefficient 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

# Trailing (high-order) coefficients below this fraction of the largest
# coefficient magnitude are trimmed: exact cancellations in transfer-function
# algebra come back perturbed by rounding, so the trim must be relative.
TRIM_RTOL = 1e-12


@dataclass(frozen=True)
class Polynomial:
    """Immutable real polynomial, trimmed so the stored leading coefficient
    is nonzero (the zero polynomial keeps a single 0.0)."""

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        raw = tuple(float(c) for c in self.coeffs) or (0.0,)
        scale = max(abs(c) for c in raw)
        cut = len(raw)
        while cut > 1 and abs(raw[cut - 1]) <= TRIM_RTOL * scale:
            cut -= 1
        object.__setattr__(self, "coeffs", raw[:cut])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)


ZERO = Polynomial((0.0,))
ONE = Polynomial((1.0,))


def poly_eval(p: Polynomial, z: complex) -> complex:
    """Evaluate ``p`` at a (possibly complex) point, Horner order from the
    highest degree down."""
    acc: complex = 0j
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    out = [0.0] * max(len(a.coeffs), len(b.coeffs))
    for i, c in enumerate(a.coeffs):
        out[i] += c
    for i, c in enumerate(b.coeffs):
        out[i] += c
    return Polynomial(tuple(out))


def poly_sub(a: Polynomial, b: Polynomial) -> Polynomial:
    return poly_add(a, poly_scale(b, -1.0))


def poly_scale(a: Polynomial, c: float) -> Polynomial:
    return Polynomial(tuple(c * x for x in a.coeffs))


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return Polynomial(tuple(np.convolve(a.coeffs, b.coeffs)))


def poly_arg_scale(p: Polynomial, rho: float) -> Polynomial:
    """Substitute ``z -> rho*z``: returns q with q(z) = p(rho*z), i.e. each
    coefficient is multiplied by rho**i."""
    if not (math.isfinite(rho) and rho > 0.0):
        raise InvalidParameterError(f"argument scale must be positive, got {rho}")
    out, power = [], 1.0
    for c in p.coeffs:
        out.append(c * power)
        power *= rho
    return Polynomial(tuple(out))


def _derivative(p: Polynomial) -> Polynomial:
    if p.degree == 0:
        return ZERO
    return Polynomial(tuple(i * c for i, c in enumerate(p.coeffs) if i > 0))


def _quadratic_roots(a: float, b: float, c: float) -> list[complex]:
    # Stable form: avoid cancellation between -b and the discriminant root.
    disc = b * b - 4.0 * a * c
    if disc >= 0.0:
        sq = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else -0.5 * sq
        if q == 0.0:
            # b == 0 and disc == 0 force c == 0: double root at the origin.
            return [0j, 0j]
        return [complex(q / a), complex(c / q)]
    im = math.sqrt(-disc) / (2.0 * a)
    re = -b / (2.0 * a)
    return [complex(re, -im), complex(re, im)]


def poly_roots(p: Polynomial) -> list[complex]:
    """All complex roots of ``p`` with multiplicity.

    Degrees 1 and 2 are solved in closed form; higher degrees go through the
    companion-matrix eigenvalues followed by one Newton polish per root, which
    is needed when pole moduli are compared against tight rate brackets.
    """
    if p.is_zero:
        raise InvalidParameterError("the zero polynomial has no root set")
    if p.degree == 0:
        raise InvalidParameterError("a nonzero constant has no roots")
    c = p.coeffs
    if p.degree == 1:
        return [complex(-c[0] / c[1])]
    if p.degree == 2:
        return _quadratic_roots(c[2], c[1], c[0])
    monic = np.asarray(c, dtype=float) / c[-1]
    n = p.degree
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic[:-1]
    dp = _derivative(p)
    polished = []
    for r in np.linalg.eigvals(comp):
        d = poly_eval(dp, r)
        if d != 0:
            r = r - poly_eval(p, r) / d
        polished.append(complex(r))
    return polished


def poly_from_roots(roots, leading: float = 1.0) -> Polynomial:
    """Real polynomial ``leading * prod(z - r)``; imaginary residue left by a
    conjugate-closed root set is discarded."""
    acc = np.array([1.0 + 0.0j])
    for r in roots:
        acc = np.convolve(acc, np.array([-r, 1.0 + 0.0j]))
    return Polynomial(tuple((leading * acc).real))
