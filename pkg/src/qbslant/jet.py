"""Second-order forward-mode automatic differentiation.

A :class:`Jet2` carries a value together with its full gradient and Hessian
with respect to ``m`` seeded parameters.  Every value-level computation uses
the same float operations and :mod:`math` calls as plain evaluation, so the
``value`` of a jet is bit-identical to evaluating the expression on floats.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class Jet2:
    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @classmethod
    def seed(cls, point: Sequence[float], i: int) -> "Jet2":
        m = len(point)
        if not 0 <= i < m:
            raise IndexError(f"seed index {i} out of range for {m} parameters")
        grad = np.zeros(m)
        grad[i] = 1.0
        return cls(point[i], grad, np.zeros((m, m)))

    @classmethod
    def constant(cls, c: float, m: int) -> "Jet2":
        return cls(c, np.zeros(m), np.zeros((m, m)))

    @property
    def nvars(self) -> int:
        return self.grad.shape[0]

    def __repr__(self):
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r})"

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(other, self.nvars)

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        # h = f(g): grad = f'(g) dg, hess = f'(g) d2g + f''(g) dg dg^T
        g = self.grad
        return Jet2(f0, f1 * g, f1 * self.hess + f2 * np.outer(g, g))

    # arithmetic

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.value + other, self.grad, self.hess)
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __radd__(self, other):
        return Jet2(other + self.value, self.grad, self.hess)

    def __sub__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.value - other, self.grad, self.hess)
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __rsub__(self, other):
        return Jet2(other - self.value, -self.grad, -self.hess)

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.value * other, self.grad * other, self.hess * other)
        a, b = self, other
        cross = np.outer(a.grad, b.grad)
        return Jet2(
            a.value * b.value,
            a.grad * b.value + b.grad * a.value,
            a.hess * b.value + b.hess * a.value + (cross + cross.T),
        )

    def __rmul__(self, other):
        return Jet2(other * self.value, other * self.grad, other * self.hess)

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.value / other, self.grad / other, self.hess / other)
        q = self * other._reciprocal()
        # value slot must be the plain float quotient, not a * (1/b)
        q.value = self.value / other.value
        return q

    def __rtruediv__(self, other):
        q = other * self._reciprocal()
        q.value = other / self.value
        return q

    def _reciprocal(self) -> "Jet2":
        inv = 1.0 / self.value
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __pow__(self, other):
        from .expr import power

        return power(self, other)

    def __rpow__(self, other):
        from .expr import power

        return power(self._lift(other), self)

    # elementary functions

    def sin(self):
        x = self.value
        s, c = math.sin(x), math.cos(x)
        return self._chain(s, c, -s)

    def cos(self):
        x = self.value
        s, c = math.sin(x), math.cos(x)
        return self._chain(c, -s, -c)

    def tan(self):
        t = math.tan(self.value)
        sec2 = 1.0 + t * t
        return self._chain(t, sec2, 2.0 * t * sec2)

    def sqrt(self):
        r = math.sqrt(self.value)
        if r == 0.0:
            raise ValueError("sqrt is not differentiable at 0")
        return self._chain(r, 0.5 / r, -0.25 / (r * self.value))

    def exp(self):
        e = math.exp(self.value)
        return self._chain(e, e, e)

    def log(self):
        x = self.value
        lg = math.log(x)
        return self._chain(lg, 1.0 / x, -1.0 / (x * x))

    def asin(self):
        x = self.value
        a = math.asin(x)
        d = 1.0 - x * x
        if d <= 0.0:
            raise ValueError("asin is not differentiable at +-1")
        r = 1.0 / math.sqrt(d)
        return self._chain(a, r, x * r / d)

    def acos(self):
        x = self.value
        a = math.acos(x)
        d = 1.0 - x * x
        if d <= 0.0:
            raise ValueError("acos is not differentiable at +-1")
        r = 1.0 / math.sqrt(d)
        return self._chain(a, -r, -x * r / d)

    def atan(self):
        x = self.value
        d = 1.0 / (1.0 + x * x)
        return self._chain(math.atan(x), d, -2.0 * x * d * d)


