"""
Wilson polynomials, their weight and the Wilson Sturm-Liouville operator.

W_n(x; a, b, c, d) = (a+b)_n (a+c)_n (a+d)_n
    * 4F3(-n, n+a+b+c+d-1, a-iz, a+iz; a+b, a+c, a+d; 1),   z^2 = x.

The weighted differences are evaluated on the exact square-root stencil
z, z +- c/2, z +- c with the weight omega(z) = mu(z) / (2z), which is odd
in z; the Sturm-Liouville form is odd in z as a whole, so it does not
depend on the root chosen.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from wilsonnev.errors import ParameterError
from wilsonnev.logger import get_logger
from wilsonnev.specfun import gamma, hyp4f3_terminating, pochhammer
from wilsonnev.wilson_core import (
    DEFAULT_SHIFT,
    Evaluator,
    LatticeCoord,
    apply_DW,
    apply_DW_lattice,
    apply_DW_origin,
)

log = get_logger(__name__)

PHYSICS_PARAMS = (0.5, -0.5, 0.5, 1.5)
PHYSICS_POLY_PARAMS = (0.5, 0.5, 1.5, 1.5)
# both have a pairwise sum 0; they are exempt from the pairwise-sum check
PHYSICS_WEIGHTS = (PHYSICS_PARAMS, (1.0, 0.0, 1.0, 2.0))


@dataclass(frozen=True)
class WilsonParams:
    """Parameters (a, b, c, d) of a Wilson polynomial or weight."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def of(cls, params: WilsonParams | Iterable[complex]) -> WilsonParams:
        if isinstance(params, WilsonParams):
            return params
        values = [complex(p) for p in params]
        if len(values) != 4:
            msg = f"Wilson parameters need 4 values, got {len(values)}"
            raise ParameterError(msg)
        return cls(*values)

    @property
    def values(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    @property
    def total(self) -> complex:
        return self.a + self.b + self.c + self.d

    def shifted(self, h: float = 0.5) -> WilsonParams:
        return replace(self, a=self.a + h, b=self.b + h, c=self.c + h, d=self.d + h)

    @property
    def is_physics_weight(self) -> bool:
        """Parameters of the unit-shift physics weight or its half shift."""
        return any(self.values == tuple(map(complex, w)) for w in PHYSICS_WEIGHTS)

    def check_weight(self) -> None:
        """
        Raises
        ------
        ParameterError
            If a pairwise sum (repetition allowed) is a nonpositive integer
            and the parameters are not one of `PHYSICS_WEIGHTS`.
        """
        if self.is_physics_weight:
            return
        values = self.values
        for i, p in enumerate(values):
            for q in values[i:]:
                s = p + q
                if abs(s.imag) < 1e-13 and s.real < 0.5 and (
                    abs(s.real - round(s.real)) < 1e-13
                ):
                    msg = f"parameter sum {p} + {q} is a nonpositive integer"
                    raise ParameterError(msg)


def eigenvalue(n: int, params: WilsonParams | Iterable[complex]) -> complex:
    """lambda_n = -n (n + a + b + c + d - 1)."""
    return -n * (n + WilsonParams.of(params).total - 1)


def wilson_poly(
    n: int,
    params: WilsonParams | Iterable[complex],
    x: complex | np.ndarray,
) -> complex | np.ndarray:
    """
    Wilson polynomial W_n(x; a, b, c, d) as an (n+1)-term sum.

    Only a^2 + x enters, so the value does not depend on the root of x.

    Raises
    ------
    ParameterError
        If n < 0 or a lower parameter a+b, a+c, a+d degenerates.
    """
    p = WilsonParams.of(params)
    if n < 0:
        msg = f"Wilson polynomial degree must be nonnegative, got {n}"
        raise ParameterError(msg)
    if n == 0:
        return np.ones(np.shape(x), complex) if np.ndim(x) else 1.0 + 0j
    x = np.asarray(x, dtype=complex)
    z = np.sqrt(x)
    prefactor = (
        pochhammer(p.a + p.b, n) * pochhammer(p.a + p.c, n) * pochhammer(p.a + p.d, n)
    )
    series = hyp4f3_terminating(
        n,
        (n + p.total - 1, p.a - 1j * z, p.a + 1j * z),
        (p.a + p.b, p.a + p.c, p.a + p.d),
    )
    value = prefactor * np.asarray(series)
    return complex(value) if value.ndim == 0 else value


def _polynomial(n: int, params: WilsonParams | Iterable[complex]) -> Evaluator:
    return lambda x: wilson_poly(n, params, x)


def lowering_residual(
    n: int,
    params: WilsonParams | Iterable[complex],
    x: complex,
) -> complex:
    """
    D_W W_n(x) - C_n W_{n-1}(x; a+1/2, b+1/2, c+1/2, d+1/2) with
    C_n = -n (n + a + b + c + d - 1); at x = 0 the difference is taken as
    the derivative at -1/4.
    """
    if n < 1:
        msg = f"lowering identity needs n >= 1, got {n}"
        raise ParameterError(msg)
    p = WilsonParams.of(params)
    poly = _polynomial(n, p)
    if x == 0:
        difference = apply_DW_origin(poly)
    else:
        difference = apply_DW(poly, LatticeCoord.from_x(x))
    return difference - eigenvalue(n, p) * wilson_poly(n - 1, p.shifted(), x)


def weight_mu_z(
    z: complex,
    params: WilsonParams | Iterable[complex],
    c: complex = DEFAULT_SHIFT,
) -> complex:
    """
    mu in the square-root coordinate for the shift c:
    prod Gamma(p +- z/c) / (Gamma(2z/c) Gamma(-2z/c)).

    For c = i the arguments are p -+ iz, the classical Wilson weight.

    Raises
    ------
    ParameterError
        If a pairwise parameter sum is a nonpositive integer.
    GammaPoleError
        If an argument p +- z/c is a gamma pole; the message names it.
    """
    p = WilsonParams.of(params)
    p.check_weight()
    u = complex(z) / c
    args = np.array([q + s * u for q in p.values for s in (1, -1)])
    numerator = complex(np.prod(gamma(args)))
    return numerator * complex(special.rgamma(2 * u) * special.rgamma(-2 * u))


def weight_mu(
    x: complex,
    params: WilsonParams | Iterable[complex],
    c: complex = DEFAULT_SHIFT,
) -> complex:
    """Wilson weight mu(x; a, b, c, d); even in the root of x."""
    return weight_mu_z(LatticeCoord.from_x(x, c).z, params, c)


def weight_omega(
    z: complex,
    params: WilsonParams | Iterable[complex],
    c: complex = DEFAULT_SHIFT,
) -> complex:
    """Sturm-Liouville weight omega(z) = mu(z) / (2z)."""
    return weight_mu_z(z, params, c) / (2 * z)


def _weighted_difference(
    f: Evaluator,
    z: complex,
    inner: WilsonParams,
    c: complex,
) -> complex:
    """D_W(omega(.; inner) D_W f) at the root z, on the exact stencil."""

    def weighted(w: complex) -> complex:
        inner_point = LatticeCoord.from_z(w, c)
        return weight_omega(w, inner, c) * apply_DW_lattice(
            lambda u: f(u * u), inner_point
        )

    return apply_DW_lattice(weighted, LatticeCoord.from_z(z, c))


def _relative(first: complex, second: complex) -> float:
    scale = max(abs(first), abs(second))
    return abs(first + second) / scale if scale else 0.0


@dataclass(frozen=True)
class EigenResidual:
    """Both terms of a weighted eigen-relation and their relative residual."""

    operator_term: complex
    weight_term: complex

    @property
    def residual(self) -> complex:
        return self.operator_term + self.weight_term

    @property
    def relative(self) -> float:
        return _relative(self.operator_term, self.weight_term)


def sturm_liouville_residual(
    n: int,
    params: WilsonParams | Iterable[complex],
    x: complex,
) -> EigenResidual:
    """
    D_W(omega(.; a+1/2, ...) D_W W_n) + n(n+a+b+c+d-1) omega(.; a, ...) W_n.

    Raises
    ------
    GammaPoleError
        If x lies on the singular lattice of the weight.
    """
    p = WilsonParams.of(params)
    z = LatticeCoord.from_x(x).z
    poly = _polynomial(n, p)
    operator_term = _weighted_difference(poly, z, p.shifted(), DEFAULT_SHIFT)
    weight_term = -eigenvalue(n, p) * weight_omega(z, p) * poly(x)
    return EigenResidual(operator_term, weight_term)


def lw_apply(
    f: Evaluator,
    params: WilsonParams | Iterable[complex],
    x: complex,
) -> complex:
    """
    Wilson Sturm-Liouville operator
    L_W f = (1/omega) D_W(omega(.; a+1/2, ...) D_W f).
    """
    p = WilsonParams.of(params)
    z = LatticeCoord.from_x(x).z
    return _weighted_difference(f, z, p.shifted(), DEFAULT_SHIFT) / weight_omega(z, p)


def physics_solution(n: int) -> Evaluator:
    """
    g_n(x) = (x - 1/4) (n+1)!/(2n)! W_{n-1}(-x; 1/2, 1/2, 3/2, 3/2), g_0 = 1.
    """
    if n < 0:
        msg = f"physics eigensolution needs n >= 0, got {n}"
        raise ParameterError(msg)
    if n == 0:
        return lambda x: np.ones(np.shape(x), complex) if np.ndim(x) else 1.0 + 0j
    scale = math.factorial(n + 1) / math.factorial(2 * n)

    def g(x: complex | np.ndarray) -> complex | np.ndarray:
        x = np.asarray(x, dtype=complex)
        value = (x - 0.25) * scale * np.asarray(
            wilson_poly(n - 1, PHYSICS_POLY_PARAMS, -x)
        )
        return complex(value) if value.ndim == 0 else value

    return g


def physics_eigen_check(n: int, x: complex) -> EigenResidual:
    """
    Eigen-relation of the unit-shift operator with l = 2n + 1:
    D_{W,1}(omega_1(.; 1, 0, 1, 2) D_{W,1} g_n)
        + ((l^2 - 1)/4) omega_1(.; 1/2, -1/2, 1/2, 3/2) g_n = 0.
    """
    shift = 1.0
    params = WilsonParams.of(PHYSICS_PARAMS)
    g = physics_solution(n)
    z = LatticeCoord.from_x(x, shift).z
    l_value = 2 * n + 1
    operator_term = _weighted_difference(g, z, params.shifted(), shift)
    weight_term = (l_value**2 - 1) / 4 * weight_omega(z, params, shift) * g(x)
    result = EigenResidual(operator_term, complex(weight_term))
    msg = f"physics eigen-relation n={n} at x={x}: relative {result.relative:.2e}"
    log.debug(msg)
    return result
