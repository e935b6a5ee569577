"""Pure numpy kernels. Reference implementation and import-time fallback.

``_ckernels.pyx`` mirrors every function here with the same signature.
"""
import numpy as np


def riemann(g, dg):
    """Curvature from a connection and its first derivatives.

    ``g[i, j, k]`` is the connection, ``dg[a, i, j, k]`` its derivative
    along ``x^a``. Returns ``r[i, j, k, l]`` with

        r = dg[k, i, l, j] - dg[l, i, k, j]
            + sum_m (g[m, l, j] g[i, k, m] - g[m, k, j] g[i, l, m])
    """
    g = np.asarray(g, dtype=complex)
    dg = np.asarray(dg, dtype=complex)
    d = np.einsum("kilj->ijkl", dg)
    q = np.einsum("mlj,ikm->ijkl", g, g)
    part = d + q
    return part - part.transpose(0, 1, 3, 2)


def geodesic_accel(gre, u):
    """``-sum_jk gre[i, j, k] u^j u^k`` for a real connection."""
    return -np.einsum("ijk,j,k->i", gre, u, u)


def rk4_uniform(gre, y0, hs):
    """Fixed-connection RK4 over the step list ``hs``.

    Returns ``(ys, n_valid)``. ``ys`` has ``len(hs) + 1`` rows of
    ``(x^mu, u^mu)``. If a step leaves ``u^0 > 0`` or produces a non-finite
    value, ``n_valid`` is that step's row index, the row holds the rejected
    state and later rows are unset.
    """
    gre = np.asarray(gre, dtype=float)
    hs = np.asarray(hs, dtype=float)
    n = hs.shape[0]
    ys = np.zeros((n + 1, 8))
    y = np.array(y0, dtype=float)
    ys[0] = y
    if not y[4] > 0.0:
        return ys, 0
    # quadratic form per output component: a_i = -u^T Q_i u
    qf = 0.5 * (gre + gre.transpose(0, 2, 1))

    def f(y):
        u = y[4:]
        return np.concatenate([u, -(qf @ u) @ u])

    for step in range(n):
        h = hs[step]
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[step + 1] = y
        if not (y[4] > 0.0 and np.all(np.isfinite(y))):
            return ys, step + 1
    return ys, n + 1
