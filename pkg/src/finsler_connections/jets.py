"""Truncated multivariate Taylor arithmetic on the tangent bundle.

A :class:`Jet` holds the Taylor polynomial (up to total degree ``order`` <= 4)
of a scalar or array-valued field around a point ``u = (x, y)``, in all 2n
coordinates ``x_1..x_n, y_1..y_n``.  Jets carry a batch shape and behave like
small numpy arrays: they broadcast, index, sum, and take part in numpy ufuncs
(``np.sqrt``, ``np.exp``, ...), so the metric families are written once and run
on plain floats and on jets alike.

Also here: the central-difference oracle :func:`fd_partial` and the Lie bracket
of vector fields on the slit tangent bundle.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, NonFiniteInputError, UnsupportedOrderError

MAX_ORDER = 4
MIN_FIBER_NORM = 1e-12

# Central-difference steps by derivative order (truncation/round-off balance).
FD_STEPS = {0: 0.0, 1: 1e-5, 2: 1e-5, 3: 1e-3, 4: 1e-3}


@dataclass(frozen=True)
class TangentPoint:
    """A point u = (x, y) of the slit tangent bundle."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in np.ravel(self.x))
        y = tuple(float(v) for v in np.ravel(self.y))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if len(x) != len(y):
            raise DomainError(f"x has {len(x)} entries but y has {len(y)}")
        if len(x) < 2:
            raise DomainError("dimension must be at least 2")
        if not all(math.isfinite(v) for v in x + y):
            raise NonFiniteInputError("tangent point has non-finite coordinates")
        if math.sqrt(sum(v * v for v in y)) < MIN_FIBER_NORM:
            raise DomainError("y lies on the zero section")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def xa(self) -> np.ndarray:
        return np.array(self.x)

    @property
    def ya(self) -> np.ndarray:
        return np.array(self.y)

    @property
    def coords(self) -> np.ndarray:
        return np.array(self.x + self.y)

    def shifted(self, delta) -> "TangentPoint":
        c = self.coords + np.asarray(delta, dtype=float)
        return TangentPoint(c[: self.n], c[self.n :])

    def scaled(self, lam: float) -> "TangentPoint":
        return TangentPoint(self.x, lam * self.ya)


# ---------------------------------------------------------------------------
# monomial bookkeeping
# ---------------------------------------------------------------------------


class _Tables:
    """Index tables for graded monomials in ``nvars`` variables up to MAX_ORDER.

    Monomials are sorted by degree, so a jet of order t uses the first
    ``size[t]`` coefficients.
    """

    def __init__(self, nvars: int):
        self.nvars = nvars
        exps = []
        for deg in range(MAX_ORDER + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), deg):
                e = [0] * nvars
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
        self.exponents = np.array(exps, dtype=int)
        self.degree = self.exponents.sum(axis=1)
        self.index = {e: i for i, e in enumerate(exps)}
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in e) for e in exps], dtype=float
        )
        self.size = [int(np.sum(self.degree <= t)) for t in range(MAX_ORDER + 1)]

    @lru_cache(maxsize=None)
    def product(self, order: int):
        """(left, right, starts) such that reduceat(a[left]*b[right], starts) = a*b."""
        left, right, out = [], [], []
        size = self.size
        for p in range(size[order]):
            dp = self.degree[p]
            ep = self.exponents[p]
            for q in range(size[order - dp]):
                left.append(p)
                right.append(q)
                out.append(self.index[tuple(ep + self.exponents[q])])
        left, right, out = map(np.array, (left, right, out))
        perm = np.argsort(out, kind="stable")
        out = out[perm]
        starts = np.searchsorted(out, np.arange(size[order]))
        return left[perm], right[perm], starts

    @lru_cache(maxsize=None)
    def derivative(self, order: int, var: int):
        """(src, dst, factor) mapping order-``order`` coefficients to d/d(var)."""
        src, dst, fac = [], [], []
        for b in range(self.size[order - 1]):
            e = self.exponents[b].copy()
            e[var] += 1
            src.append(self.index[tuple(e)])
            dst.append(b)
            fac.append(float(e[var]))
        return np.array(src), np.array(dst), np.array(fac)


@lru_cache(maxsize=None)
def _tables(nvars: int) -> _Tables:
    return _Tables(nvars)


def _check_order(order) -> int:
    if not isinstance(order, (int, np.integer)) or isinstance(order, bool):
        raise UnsupportedOrderError(f"jet order must be an integer, got {order!r}")
    if order < 0 or order > MAX_ORDER:
        raise UnsupportedOrderError(f"jet order {order} outside 0..{MAX_ORDER}")
    return int(order)


# ---------------------------------------------------------------------------
# the jet type
# ---------------------------------------------------------------------------


def _taylor_coefficients(name: str, c: np.ndarray, order: int, p: float = 0.0):
    """Derivatives f^(k)(c), k = 0..order, of an elementary function."""
    if name == "exp":
        e = np.exp(c)
        return [e] * (order + 1)
    if name == "log":
        out = [np.log(c)]
        for k in range(1, order + 1):
            out.append((-1.0) ** (k - 1) * math.factorial(k - 1) / c**k)
        return out
    if name in ("sin", "cos"):
        cyc = [np.sin(c), np.cos(c), -np.sin(c), -np.cos(c)]
        shift = 0 if name == "sin" else 1
        return [cyc[(k + shift) % 4] for k in range(order + 1)]
    if name in ("sinh", "cosh"):
        cyc = [np.sinh(c), np.cosh(c)]
        shift = 0 if name == "sinh" else 1
        return [cyc[(k + shift) % 2] for k in range(order + 1)]
    if name == "power":
        out = []
        coef = 1.0
        for k in range(order + 1):
            out.append(coef * np.power(c, p - k))
            coef *= p - k
        return out
    raise ValueError(name)


class Jet:
    """Truncated Taylor polynomial of an array-valued field in ``nvars`` variables.

    ``coeffs`` has shape ``batch_shape + (m,)`` where ``m`` counts monomials of
    degree <= ``order``; coefficient ``c_alpha`` multiplies ``dz**alpha`` so
    the partial derivative is ``alpha! * c_alpha``.
    """

    __array_priority__ = 1000

    def __init__(self, coeffs, order: int, nvars: int):
        self.order = _check_order(order)
        self.nvars = int(nvars)
        self.coeffs = np.asarray(coeffs, dtype=float)
        m = _tables(self.nvars).size[self.order]
        if self.coeffs.shape[-1:] != (m,):
            raise ValueError(f"expected trailing axis {m}, got {self.coeffs.shape}")

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        m = _tables(nvars).size[order]
        c = np.zeros(value.shape + (m,))
        c[..., 0] = value
        return cls(c, order, nvars)

    @classmethod
    def variables(cls, point, order: int) -> "Jet":
        """Jets of the coordinate functions themselves around ``point``."""
        point = np.asarray(point, dtype=float)
        d = point.size
        order = _check_order(order)
        m = _tables(d).size[order]
        c = np.zeros((d, m))
        c[:, 0] = point
        if order >= 1:
            c[:, 1 : d + 1] = np.eye(d)
        return cls(c, order, d)

    # -- array protocol ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0].copy()

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        k = [i for i, v in enumerate(idx) if v is Ellipsis]
        if len(k) > 1:
            raise IndexError("at most one Ellipsis is allowed")
        if k:
            fill = self.ndim - (len(idx) - 1) + sum(v is None for v in idx)
            idx = idx[: k[0]] + (slice(None),) * fill + idx[k[0] + 1 :]
        return Jet(self.coeffs[idx + (slice(None),)], self.order, self.nvars)

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        axes = np.atleast_1d(axis)
        axes = tuple(int(a) % self.ndim for a in axes) if self.ndim else ()
        return Jet(self.coeffs.sum(axis=axes), self.order, self.nvars)

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return Jet(
            self.coeffs.transpose(tuple(axes) + (self.ndim,)), self.order, self.nvars
        )

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet(self.coeffs.reshape(shape + (-1,)), self.order, self.nvars)

    def truncate(self, order: int) -> "Jet":
        order = _check_order(order)
        if order > self.order:
            raise UnsupportedOrderError(
                f"cannot raise a jet from order {self.order} to {order}"
            )
        m = _tables(self.nvars).size[order]
        return Jet(self.coeffs[..., :m], order, self.nvars)

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order}, nvars={self.nvars})"

    # -- arithmetic -------------------------------------------------------

    def _common(self, other: "Jet") -> int:
        if other.nvars != self.nvars:
            raise ValueError("jets live in different variable spaces")
        return min(self.order, other.order)

    def __add__(self, other):
        if isinstance(other, Jet):
            r = self._common(other)
            m = _tables(self.nvars).size[r]
            return Jet(self.coeffs[..., :m] + other.coeffs[..., :m], r, self.nvars)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        c = np.broadcast_to(self.coeffs, shape + self.coeffs.shape[-1:]).copy()
        c[..., 0] += other
        return Jet(c, self.order, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.order, self.nvars)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            r = self._common(other)
            left, right, starts = _tables(self.nvars).product(r)
            prod = self.coeffs[..., left] * other.coeffs[..., right]
            return Jet(np.add.reduceat(prod, starts, axis=-1), r, self.nvars)
        other = np.asarray(other, dtype=float)
        return Jet(self.coeffs * other[..., None], self.order, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return np.exp(p * np.log(self))
        p = float(p)
        if p.is_integer() and p >= 0:
            result = Jet.constant(np.ones(self.shape), self.nvars, self.order)
            base, k = self, int(p)
            while k:
                if k & 1:
                    result = result * base
                base = base * base
                k >>= 1
            return result
        return self._compose("power", p)

    def __rpow__(self, base):
        return np.exp(self * np.log(np.asarray(base, dtype=float)))

    def _compose(self, name: str, p: float = 0.0) -> "Jet":
        c0 = self.coeffs[..., 0]
        derivs = _taylor_coefficients(name, c0, self.order, p)
        m = self.coeffs.shape[-1]
        out = np.zeros_like(self.coeffs)
        out[..., 0] = derivs[0]
        if self.order == 0:
            return Jet(out, 0, self.nvars)
        h = Jet(self.coeffs.copy(), self.order, self.nvars)
        h.coeffs[..., 0] = 0.0
        hk = h
        for k in range(1, self.order + 1):
            out += (derivs[k] / math.factorial(k))[..., None] * hk.coeffs[..., :m]
            if k < self.order:
                hk = hk * h
        return Jet(out, self.order, self.nvars)

    def reciprocal(self) -> "Jet":
        return self._compose("power", -1.0)

    def sqrt(self) -> "Jet":
        return self._compose("power", 0.5)

    _UFUNCS = {
        np.sqrt: lambda a: a.sqrt(),
        np.exp: lambda a: a._compose("exp"),
        np.log: lambda a: a._compose("log"),
        np.sin: lambda a: a._compose("sin"),
        np.cos: lambda a: a._compose("cos"),
        np.sinh: lambda a: a._compose("sinh"),
        np.cosh: lambda a: a._compose("cosh"),
        np.negative: lambda a: -a,
        np.positive: lambda a: a,
        np.square: lambda a: a * a,
        np.reciprocal: lambda a: a.reciprocal(),
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        if ufunc in self._UFUNCS and len(inputs) == 1:
            return self._UFUNCS[ufunc](inputs[0])
        if len(inputs) == 2:
            a, b = inputs
            if ufunc is np.add:
                return a + b if isinstance(a, Jet) else b + a
            if ufunc is np.subtract:
                return a - b if isinstance(a, Jet) else b.__rsub__(a)
            if ufunc is np.multiply:
                return a * b if isinstance(a, Jet) else b * a
            if ufunc in (np.true_divide, np.divide):
                return a / b if isinstance(a, Jet) else b.__rtruediv__(a)
            if ufunc is np.power:
                return a**b if isinstance(a, Jet) else b.__rpow__(a)
        return NotImplemented

    # -- differentiation --------------------------------------------------

    def diff(self, var: int) -> "Jet":
        """Jet of the partial derivative along coordinate ``var`` (order drops by one)."""
        if self.order == 0:
            raise UnsupportedOrderError("cannot differentiate an order-0 jet")
        src, dst, fac = _tables(self.nvars).derivative(self.order, var)
        m = _tables(self.nvars).size[self.order - 1]
        out = np.zeros(self.shape + (m,))
        out[..., dst] = self.coeffs[..., src] * fac
        return Jet(out, self.order - 1, self.nvars)

    def grad(self) -> "Jet":
        """Jet with a trailing axis of all first partials, shape ``batch + (nvars,)``."""
        parts = [self.diff(v).coeffs for v in range(self.nvars)]
        return Jet(np.stack(parts, axis=-2), self.order - 1, self.nvars)

    def partial(self, alpha) -> np.ndarray:
        """Value of the mixed partial with exponent multi-index ``alpha``."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.nvars:
            raise ValueError(f"multi-index needs {self.nvars} entries")
        if sum(alpha) > self.order:
            raise UnsupportedOrderError(
                f"partial of degree {sum(alpha)} from a jet of order {self.order}"
            )
        t = _tables(self.nvars)
        i = t.index[alpha]
        return self.coeffs[..., i] * t.factorial[i]

    def partials(self) -> dict[tuple[int, ...], float]:
        """All partial derivatives of a scalar jet keyed by exponent multi-index."""
        if self.shape != ():
            raise ValueError("partials() is defined for scalar jets")
        t = _tables(self.nvars)
        m = t.size[self.order]
        return {
            tuple(int(v) for v in t.exponents[i]): float(self.coeffs[i] * t.factorial[i])
            for i in range(m)
        }


# ---------------------------------------------------------------------------
# helpers over jets and plain arrays
# ---------------------------------------------------------------------------


def value_of(a) -> np.ndarray:
    return a.value if isinstance(a, Jet) else np.asarray(a, dtype=float)


def as_jet(a, nvars: int, order: int) -> Jet:
    if isinstance(a, Jet):
        return a
    return Jet.constant(a, nvars, order)


def stack(items: Sequence, axis: int = 0) -> Jet:
    """np.stack for a mixed sequence of jets and constants."""
    jets = [a for a in items if isinstance(a, Jet)]
    if not jets:
        raise ValueError("stack needs at least one jet")
    nvars = jets[0].nvars
    order = min(j.order for j in jets)
    m = _tables(nvars).size[order]
    coeffs = [as_jet(a, nvars, order).coeffs[..., :m] for a in items]
    ndim = coeffs[0].ndim - 1
    if axis < 0:
        axis += ndim + 1
    return Jet(np.stack(coeffs, axis=axis), order, nvars)


def jeinsum(subscripts: str, a, b):
    """Two-operand einsum where either operand may be a jet."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        return np.einsum(subscripts, a, b)
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    z = next(c for c in string.ascii_letters if c not in subscripts)
    if isinstance(a, Jet) and isinstance(b, Jet):
        r = a._common(b)
        left, right, starts = _tables(a.nvars).product(r)
        prod = np.einsum(
            f"{sa}{z},{sb}{z}->{out}{z}", a.coeffs[..., left], b.coeffs[..., right]
        )
        return Jet(np.add.reduceat(prod, starts, axis=-1), r, a.nvars)
    if isinstance(a, Jet):
        return Jet(np.einsum(f"{sa}{z},{sb}->{out}{z}", a.coeffs, b), a.order, a.nvars)
    return Jet(np.einsum(f"{sa},{sb}{z}->{out}{z}", a, b.coeffs), b.order, b.nvars)


def jet_solve(A, b, lu=None):
    """Solve ``A X = b`` where A and/or b are jets.

    The constant part of A is factored once; higher Taylor coefficients follow
    from the nilpotent fixed point ``X = A0^{-1} (b - (A - A0) X)``, which is
    exact after ``order + 1`` sweeps.
    """
    A0 = value_of(A)
    if lu is None:
        lu = scipy.linalg.lu_factor(A0)
    if not isinstance(A, Jet) and not isinstance(b, Jet):
        return scipy.linalg.lu_solve(lu, b)
    ref = A if isinstance(A, Jet) else b
    nvars = ref.nvars
    order = min(j.order for j in (A, b) if isinstance(j, Jet))
    b = as_jet(b, nvars, order).truncate(order)
    vec = b.ndim == 1
    if vec:
        b = b.reshape(b.shape[0], 1)
    m = _tables(nvars).size[order]
    k, cols = b.shape

    def apply_inverse(rhs: Jet) -> Jet:
        flat = rhs.coeffs.reshape(k, cols * m)
        return Jet(scipy.linalg.lu_solve(lu, flat).reshape(k, cols, m), order, nvars)

    if isinstance(A, Jet):
        A1 = A.truncate(order) - A0
        X = apply_inverse(b)
        for _ in range(order):
            X = apply_inverse(b - jeinsum("ij,jk->ik", A1, X))
    else:
        X = apply_inverse(b)
    return X.reshape(k) if vec else X


def jet_inv(A: Jet) -> Jet:
    k = A.shape[0]
    return jet_solve(A, np.eye(k))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


ScalarField = Callable[[object, object], object]
VectorFieldOnTM = Callable[[object, object], Sequence]


def point_variables(u: TangentPoint, order: int) -> tuple[Jet, Jet]:
    """Coordinate jets (x, y) around ``u``."""
    z = Jet.variables(u.coords, order)
    return z[: u.n], z[u.n :]


def evaluate_jet(f: ScalarField, u: TangentPoint, order: int) -> Jet:
    """All mixed partials of ``f(x, y)`` at ``u`` up to total degree ``order``."""
    order = _check_order(order)
    x, y = point_variables(u, order)
    out = f(x, y)
    out = as_jet(out, 2 * u.n, order)
    if not np.all(np.isfinite(out.coeffs)):
        raise NonFiniteInputError(f"field is not finite at {u}")
    return out


def fd_partial(f: ScalarField, u: TangentPoint, multi_index, step: float | None = None) -> float:
    """Nested central-difference estimate of the partial ``multi_index`` of f at u.

    ``multi_index`` is an exponent tuple over the 2n coordinates.  Each
    differentiation level contributes O(step**2) truncation error.
    """
    alpha = [int(a) for a in multi_index]
    d = 2 * u.n
    if len(alpha) != d:
        raise ValueError(f"multi-index needs {d} entries")
    order = sum(alpha)
    if order > MAX_ORDER or min(alpha) < 0:
        raise UnsupportedOrderError(f"finite differences of order {order} unsupported")
    if step is None:
        step = FD_STEPS[order]
    if order and step <= 0:
        raise ValueError("step must be positive")
    y_extent = step * sum(alpha[u.n :])
    if np.linalg.norm(u.ya) - y_extent <= MIN_FIBER_NORM:
        raise DomainError("finite-difference stencil reaches the zero section")

    def rec(c: np.ndarray, a: list[int]) -> float:
        for v, k in enumerate(a):
            if k:
                b = list(a)
                b[v] -= 1
                e = np.zeros(d)
                e[v] = step
                return (rec(c + e, b) - rec(c - e, b)) / (2 * step)
        val = f(c[: u.n], c[u.n :])
        return float(val)

    out = rec(u.coords, alpha)
    if not math.isfinite(out):
        raise NonFiniteInputError(f"field is not finite near {u}")
    return out


def _field_jet(X, u: TangentPoint, order: int = 1) -> Jet:
    if isinstance(X, Jet):
        return X
    x, y = point_variables(u, order)
    comps = list(X(x, y))
    if len(comps) != 2 * u.n:
        raise ValueError(f"vector field must have {2 * u.n} components")
    if not any(isinstance(c, Jet) for c in comps):
        return Jet.constant(np.array(comps, dtype=float), 2 * u.n, order)
    return stack(comps)


def bracket_values(X: Jet, Y: Jet) -> np.ndarray:
    """Values of [X, Y] from jets of order >= 1 (batch axes broadcast).

    ``X`` and ``Y`` have trailing axis 2n holding coordinate components.
    """
    DX = X.grad().value  # [..., A, B] = d_B X^A
    DY = Y.grad().value
    Xv, Yv = X.value, Y.value
    return np.einsum("...ab,...b->...a", DY, Xv) - np.einsum("...ab,...b->...a", DX, Yv)


def pairwise(X: Jet, Y: Jet) -> tuple[Jet, Jet]:
    """Batches over all (A, B) pairs from field batches X[A] and Y[B] of equal length."""
    d = X.shape[0]
    shape = (d, d) + X.coeffs.shape[1:]
    xc = np.broadcast_to(X.coeffs[:, None], shape)
    yc = np.broadcast_to(Y.coeffs[None, :], (d, d) + Y.coeffs.shape[1:])
    return (
        Jet(np.ascontiguousarray(xc), X.order, X.nvars),
        Jet(np.ascontiguousarray(yc), Y.order, Y.nvars),
    )


def lie_bracket(X, Y, u: TangentPoint) -> np.ndarray:
    """[X, Y] at u for vector fields on the slit tangent bundle.

    Fields are callables ``(x, y) -> 2n components`` (first n along d/dx, last n
    along d/dy) or jets of order >= 1 already expanded at u.
    """
    return bracket_values(_field_jet(X, u), _field_jet(Y, u))


def jet_fd_discrepancy(f: ScalarField, u: TangentPoint, order: int = MAX_ORDER, step: float = 1e-5) -> float:
    """Largest relative gap between jet partials of f and a finite-difference oracle.

    A partial of degree k is compared with a central difference, in its first
    differentiated variable, of the degree k-1 partial at the two shifted
    points.  At k = 1 that is a plain difference of f, so every level is tied
    back to f itself; a single 4th-order stencil cannot reach 1e-6 in double
    precision, the chained one can.  The differences at step and step / 2 are
    Richardson-extrapolated.  Errors are relative to max(1, |partial|).
    """
    order = _check_order(order)
    d = 2 * u.n
    if np.linalg.norm(u.ya) - step <= MIN_FIBER_NORM:
        raise DomainError("finite-difference stencil reaches the zero section")
    jets = {k: evaluate_jet(f, u, k) for k in range(1, order + 1)}
    steps = (step, step / 2)
    shifted = {}
    for v in range(d):
        e = np.zeros(d)
        e[v] = 1.0
        shifted[v] = [
            tuple({k: evaluate_jet(f, u.shifted(s * h * e), k) for k in range(order)} for s in (1, -1))
            for h in steps
        ]
    worst = 0.0
    tab = _tables(d)
    for alpha in tab.exponents[1 : tab.size[order]]:
        k = sum(alpha)
        v = next(i for i, a in enumerate(alpha) if a)
        beta = list(alpha)
        beta[v] -= 1
        coarse, fine = (
            (plus[k - 1].partial(beta) - minus[k - 1].partial(beta)) / (2 * h)
            for h, (plus, minus) in zip(steps, shifted[v])
        )
        est = (4 * fine - coarse) / 3
        exact = jets[k].partial(alpha)
        worst = max(worst, float(abs(exact - est) / max(1.0, abs(exact))))
    return worst
