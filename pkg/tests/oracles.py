"""Symbolic oracles, independent of the jet pipeline.

Everything here goes through sympy with the classical coordinate formulas:
G^i = 1/2 g^il (E_{y^l x^k} y^k - E_{x^l}), Christoffel symbols, the Riemann
tensor, Berwald coefficients as y-Hessians of G, and the Cartan horizontal
coefficients from the delta-Koszul formula.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp

from finsler_connections import MetricSpec


def symbols(n):
    x = sp.symbols(f"x1:{n + 1}", real=True)
    y = sp.symbols(f"y1:{n + 1}", real=True)
    return x, y


def _diag_form(form, t, s):
    return {
        "constant": s + 0 * t,
        "exp": sp.exp(s * t),
        "one_plus_square": 1 + s * t**2,
        "cosh": sp.cosh(s * t),
    }[form]


def symbolic_L(spec: MetricSpec):
    n = spec.dimension
    x, y = symbols(n)
    p = spec.params
    yy = sum(v**2 for v in y)
    if spec.family == "euclidean":
        L = sp.sqrt(yy)
    elif spec.family == "poincare_half_plane":
        L = sp.sqrt(yy) / x[-1]
    elif spec.family == "riemannian_diagonal":
        a = [_diag_form(e["form"], x[e["coord"]], sp.nsimplify(e["scale"])) for e in p["diagonal"]]
        L = sp.sqrt(sum(a[i] * y[i] ** 2 for i in range(n)))
    elif spec.family == "randers":
        A = sp.Matrix(p["a"]).applyfunc(sp.nsimplify)
        b = [sp.nsimplify(p["b"][i]) + sum(sp.nsimplify(p["b_slope"][i][k]) * x[k] for k in range(n)) for i in range(n)]
        Y = sp.Matrix(y)
        L = sp.sqrt((Y.T * A * Y)[0]) + sum(b[i] * y[i] for i in range(n))
    elif spec.family == "quartic_minkowski":
        L = sum(v**4 for v in y) ** sp.Rational(1, 4)
    else:
        raise ValueError(spec.family)
    return x, y, L


class SymbolicFinsler:
    """Lazy symbolic pipeline; numeric evaluation substitutes a point."""

    def __init__(self, spec: MetricSpec):
        self.spec = spec
        self.n = spec.dimension
        self.x, self.y, self.L = symbolic_L(spec)
        self.E = self.L**2 / 2
        n = self.n
        self.g = sp.Matrix(n, n, lambda i, j: sp.diff(self.E, self.y[i], self.y[j]))

    def subs_map(self, x, y):
        m = {s: sp.nsimplify(v) for s, v in zip(self.x, x)}
        m.update({s: sp.nsimplify(v) for s, v in zip(self.y, y)})
        return m

    def evaluate(self, expr, x, y):
        m = self.subs_map(x, y)
        f = np.vectorize(lambda e: float(sp.N(sp.sympify(e).subs(m), 30)), otypes=[float])
        return f(np.array(expr, dtype=object))

    @property
    def spray(self):
        n, x, y, E = self.n, self.x, self.y, self.E
        ginv = self.g.inv()
        rhs = [sum(sp.diff(E, y[l], x[k]) * y[k] for k in range(n)) - sp.diff(E, x[l]) for l in range(n)]
        return [sp.Rational(1, 2) * sum(ginv[i, l] * rhs[l] for l in range(n)) for i in range(n)]

    def numeric_spray(self, x, y):
        """G^i at a point; the y-dependence is kept symbolic until the end."""
        return self.evaluate(self.spray, x, y)

    def numeric_all(self, x, y):
        """G, N, Berwald F, Cartan F, Landsberg Phat = F_berwald - F_cartan at a point."""
        n, xs, ys = self.n, self.x, self.y
        G = self.spray
        N = [[sp.diff(G[i], ys[j]) for j in range(n)] for i in range(n)]
        m = self.subs_map(x, y)
        # derivatives are taken symbolically and then evaluated
        Nv = np.array([[float(sp.N(N[i][j].subs(m), 30)) for j in range(n)] for i in range(n)])
        Fb = np.array(
            [[[float(sp.N(sp.diff(N[i][k], ys[j]).subs(m), 30)) for k in range(n)] for j in range(n)] for i in range(n)]
        )
        g = self.g
        dgx = [[[float(sp.N(sp.diff(g[k, l], xs[a]).subs(m), 30)) for a in range(n)] for l in range(n)] for k in range(n)]
        dgy = [[[float(sp.N(sp.diff(g[k, l], ys[a]).subs(m), 30)) for a in range(n)] for l in range(n)] for k in range(n)]
        dgx, dgy = np.array(dgx), np.array(dgy)
        hg = dgx - np.einsum("mj,klm->klj", Nv, dgy)  # delta_j g_kl
        gv = np.array(g.subs(m).evalf(30), dtype=float)
        Fc = np.empty((n, n, n))
        ginv = np.linalg.inv(gv)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    Fc[i, j, k] = 0.5 * sum(
                        ginv[i, l] * (hg[k, l, j] + hg[j, l, k] - hg[j, k, l]) for l in range(n)
                    )
        Gv = np.array([float(sp.N(G[i].subs(m), 30)) for i in range(n)])
        C = 0.5 * dgy
        return {"g": gv, "C": C, "G": Gv, "N": Nv, "F_berwald": Fb, "F_cartan": Fc, "Phat": Fb - Fc}


def riemann_oracle(spec: MetricSpec, x):
    """Christoffel symbols Gamma[i, j, k] and classical Riemann R^i_{jkl} at x.

    R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma^i_{km} Gamma^m_{lj}
    - Gamma^i_{lm} Gamma^m_{kj}, so R(d_k, d_l) d_j = R^i_{jkl} d_i.
    """
    sf = SymbolicFinsler(spec)
    n = sf.n
    xs, ys = sf.x, sf.y
    # Riemannian: g depends on x only
    g = sf.g.applyfunc(sp.simplify)
    ginv = g.inv()
    Gam = [
        [
            [
                sp.Rational(1, 2)
                * sum(ginv[i, l] * (sp.diff(g[l, j], xs[k]) + sp.diff(g[l, k], xs[j]) - sp.diff(g[j, k], xs[l])) for l in range(n))
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    Riem = [
        [
            [
                [
                    sp.diff(Gam[i][l][j], xs[k])
                    - sp.diff(Gam[i][k][j], xs[l])
                    + sum(Gam[i][k][m] * Gam[m][l][j] - Gam[i][l][m] * Gam[m][k][j] for m in range(n))
                    for l in range(n)
                ]
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    m = {s: sp.nsimplify(v) for s, v in zip(xs, x)}
    ev = np.vectorize(lambda e: float(sp.N(sp.sympify(e).subs(m), 30)), otypes=[float])
    return ev(np.array(Gam, dtype=object)), ev(np.array(Riem, dtype=object)), np.array(g.subs(m).evalf(30), dtype=float)


@lru_cache(maxsize=None)
def symbolic(spec: MetricSpec) -> SymbolicFinsler:
    return SymbolicFinsler(spec)


@lru_cache(maxsize=None)
def christoffel_function(spec: MetricSpec):
    """Numeric callable x -> Gamma[i, j, k] for a Riemannian member."""
    n = spec.dimension
    xs, ys, L = symbolic_L(spec)
    E = sp.expand(L**2 / 2)
    g = sp.Matrix(n, n, lambda i, j: sp.simplify(sp.diff(E, ys[i], ys[j])))
    ginv = g.inv()
    Gam = [
        [
            [
                sp.Rational(1, 2)
                * sum(ginv[i, l] * (sp.diff(g[l, j], xs[k]) + sp.diff(g[l, k], xs[j]) - sp.diff(g[j, k], xs[l])) for l in range(n))
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    f = sp.lambdify(xs, Gam, "numpy")
    return lambda x: np.array(f(*x), dtype=float)
