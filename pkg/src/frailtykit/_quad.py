"""Adaptive Gauss-Kronrod quadrature for vector-valued integrands.

A 7/15 Gauss-Kronrod rule on bisected panels.  All components of a
vector-valued integrand share a single subdivision tree, so integrands that
evaluate many mixture components at once (atoms x causes) are handled in one
adaptive pass.  Nodes and weights are the classical QUADPACK dqk15 constants.
"""

from __future__ import annotations

import numpy as np

_XGK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point rule in ascending node order; the embedded 7-point Gauss
# nodes sit at the odd indices.
NODES = np.concatenate([-_XGK_HALF[:7], [0.0], _XGK_HALF[:7][::-1]])
WEIGHTS_K = np.concatenate([_WGK_HALF[:7], [_WGK_HALF[7]], _WGK_HALF[:7][::-1]])
WEIGHTS_G = np.concatenate([_WG_HALF[:3], [_WG_HALF[3]], _WG_HALF[:3][::-1]])


class QuadratureError(RuntimeError):
    """Adaptive subdivision hit its panel budget before reaching tolerance."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


def gk15(f, a, b):
    """One Gauss-Kronrod panel.  Returns (integral, error_estimate), each (m,)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    y = np.asarray(f(c + h * NODES), float)
    if y.ndim == 1:
        y = y[:, None]
    val_k = h * (WEIGHTS_K @ y)
    val_g = h * (WEIGHTS_G @ y[1::2])
    return val_k, np.abs(val_k - val_g)


def integrate(f, a, b, rel_tol=1e-9, abs_tol=1e-12, max_subdivisions=200):
    """Adaptively integrate a vector-valued f over [a, b].

    f maps an array of points (n,) to values (n, m); every component is
    integrated on the shared panel tree until each satisfies
    err <= max(abs_tol, rel_tol * |integral|).
    """
    if not b > a:
        raise ValueError("integration interval must have b > a")
    val, err = gk15(f, a, b)
    panels = [(a, b, val, err)]
    for _ in range(max_subdivisions):
        total = np.sum([p[2] for p in panels], axis=0)
        tot_err = np.sum([p[3] for p in panels], axis=0)
        if np.all(tot_err <= np.maximum(abs_tol, rel_tol * np.abs(total))):
            return total, tot_err
        worst = max(range(len(panels)), key=lambda i: float(np.max(panels[i][3])))
        pa, pb, _, _ = panels.pop(worst)
        mid = 0.5 * (pa + pb)
        v1, e1 = gk15(f, pa, mid)
        v2, e2 = gk15(f, mid, pb)
        panels.append((pa, mid, v1, e1))
        panels.append((mid, pb, v2, e2))
    total = np.sum([p[2] for p in panels], axis=0)
    tot_err = np.sum([p[3] for p in panels], axis=0)
    raise QuadratureError(
        f"quadrature did not converge after {max_subdivisions} subdivisions; "
        f"worst error estimate {float(np.max(tot_err)):.3e}",
        value=total,
        error=tot_err,
    )


def integrate_power_substituted(f, upper, power, rel_tol=1e-9, abs_tol=1e-12,
                                max_subdivisions=200):
    """Integrate f over [0, upper] with the substitution u = v**power.

    Regularizes integrable endpoint singularities u**(g-1) at the origin when
    power = 1/min(g): the transformed integrand is bounded on the new interval.
    """
    if power == 1.0:
        return integrate(f, 0.0, upper, rel_tol, abs_tol, max_subdivisions)

    def transformed(v):
        jac = power * v ** (power - 1.0)
        vals = np.asarray(f(v ** power), float)
        if vals.ndim == 1:
            vals = vals[:, None]
        return vals * jac[:, None]

    return integrate(transformed, 0.0, upper ** (1.0 / power),
                     rel_tol, abs_tol, max_subdivisions)
