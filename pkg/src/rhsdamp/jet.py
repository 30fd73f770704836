"""Truncated Taylor series ("jets") with vectorised base points.

A :class:`Jet` of order ``K`` stores the Taylor coefficients
``f^(k)(x0) / k!`` for ``k = 0..K``.  The coefficient array has shape
``(K + 1,) + batch_shape`` so that one jet can describe a function at many
base points at once; all arithmetic broadcasts over the batch axes.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CapabilityError

DEFAULT_MAX_ORDER = 32


def _as_coeffs(c):
    c = np.asarray(c, dtype=complex)
    if c.ndim == 0:
        raise ValueError("jet coefficients need at least one axis")
    return c


class Jet:
    __slots__ = ("base_point", "coeffs")

    def __init__(self, base_point, coeffs):
        self.base_point = np.asarray(base_point, dtype=float)
        self.coeffs = _as_coeffs(coeffs)

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, value, base_point, order):
        value = np.asarray(value, dtype=complex)
        shape = np.broadcast(value, np.asarray(base_point)).shape
        c = np.zeros((order + 1,) + shape, dtype=complex)
        c[0] = value
        return cls(base_point, c)

    @classmethod
    def variable(cls, base_point, order):
        """The identity function ``x`` expanded around ``base_point``."""
        x0 = np.asarray(base_point, dtype=float)
        c = np.zeros((order + 1,) + x0.shape, dtype=complex)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(x0, c)

    # -- basic properties ---------------------------------------------
    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, n):
        """``f^(n)(x0)``, i.e. ``n!`` times the ``n``-th coefficient."""
        if n > self.order:
            raise CapabilityError(f"jet of order {self.order} has no derivative of order {n}")
        return math.factorial(n) * self.coeffs[n]

    def truncate(self, order):
        if order > self.order:
            raise CapabilityError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.base_point, self.coeffs[: order + 1])

    def differentiate(self):
        """Jet of ``f'`` (one order lower)."""
        K = self.order
        if K == 0:
            raise CapabilityError("cannot differentiate an order-0 jet")
        k = np.arange(1, K + 1).reshape((K,) + (1,) * (self.coeffs.ndim - 1))
        return Jet(self.base_point, k * self.coeffs[1:])

    def scale_argument(self, factor):
        """Coefficients of ``h -> f(x0 + factor*h)`` (a change of local variable)."""
        K = self.order
        p = np.asarray(factor, dtype=complex) ** np.arange(K + 1)
        return p.reshape((K + 1,) + (1,) * (self.coeffs.ndim - 1)) * self.coeffs

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                K = min(self.order, other.order)
                return self.truncate(K), other.truncate(K)
            return self, other
        return self, Jet.constant(other, self.base_point, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.base_point, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base_point, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.base_point, self.coeffs * np.asarray(other, dtype=complex))
        a, b = self._coerce(other)
        A, B = a.coeffs, b.coeffs
        out = np.zeros(np.broadcast_shapes(A.shape, B.shape), dtype=complex)
        for k in range(A.shape[0]):
            # Cauchy product truncated at order K
            out[k] = np.sum(A[: k + 1] * B[k::-1], axis=0)
        return Jet(a.base_point, out)

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.coeffs
        if np.any(a[0] == 0):
            raise ZeroDivisionError("reciprocal of a jet with zero constant term")
        r = np.zeros_like(a)
        inv0 = 1.0 / a[0]
        r[0] = inv0
        for k in range(1, a.shape[0]):
            r[k] = -inv0 * np.sum(a[1 : k + 1] * r[k - 1 :: -1], axis=0)
        return Jet(self.base_point, r)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.base_point, self.coeffs / np.asarray(other, dtype=complex))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Jet.constant(1.0, self.base_point, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def exp(self):
        g = self.coeffs
        f = np.zeros_like(g)
        f[0] = np.exp(g[0])
        K = g.shape[0] - 1
        if K:
            j = np.arange(1, K + 1).reshape((K,) + (1,) * (g.ndim - 1))
            jg = j * g[1:]
            for k in range(1, K + 1):
                f[k] = np.sum(jg[:k] * f[k - 1 :: -1], axis=0) / k
        return Jet(self.base_point, f)

    def conj(self):
        return Jet(self.base_point, np.conj(self.coeffs))

    def __repr__(self):
        return f"Jet(base_point={self.base_point!r}, order={self.order})"


def exp(j):
    return j.exp()
