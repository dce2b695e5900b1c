"""Pure numpy versions of the hot loops; used when the compiled core is absent."""
import numpy as np

NAME = "python"


def heat_series(traces, tau, nmax):
    """sum_{n=1}^{nmax} n exp(-tau (n^2 - 1)/4) chi_n, chi_n from the trace.

    Characters come from the recurrence chi_{n+1} = T chi_n - chi_{n-1}.
    """
    T = np.asarray(traces, dtype=complex)
    tau = complex(tau)
    prev = np.zeros_like(T)
    cur = np.ones_like(T)
    out = np.ones_like(T)
    for n in range(2, nmax + 1):
        prev, cur = cur, T * cur - prev
        out += n * np.exp(-tau * (n * n - 1) / 4.0) * cur
    return out


def _expm_traceless(A):
    # A^2 = -det(A) I for traceless 2x2
    delta = -(A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0])
    r = np.sqrt(delta)
    small = np.abs(r) < 1e-4
    r2 = delta
    ch = np.where(small, 1 + r2 / 2 + r2 * r2 / 24 + r2**3 / 720, np.cosh(r))
    rs = np.where(small, 1.0, r)
    sh = np.where(small, 1 + r2 / 6 + r2 * r2 / 120 + r2**3 / 5040, np.sinh(r) / rs)
    E = sh[:, None, None] * A
    E[:, 0, 0] += ch
    E[:, 1, 1] += ch
    return E


def sde_endpoints(V, xi, scale, block):
    """Product-of-exponentials stepper on SL(2, C) started at the identity.

    ``V``: (k, 2, 2) fields; ``xi``: (n_steps, n_paths, k) normals; ``scale``:
    per-field factors, shape (k,) or (n_steps, k). Each step multiplies on the right by
    ``exp(sum_{j in g} scale_j xi_j V_j)`` for consecutive groups g of ``block``
    fields. Returns the endpoints (n_paths, 2, 2) and max |det - 1| seen.
    """
    V = np.asarray(V, dtype=complex)
    xi = np.asarray(xi, dtype=float)
    n_steps, n_paths, k = xi.shape
    scale = np.broadcast_to(np.asarray(scale, dtype=float), (n_steps, k))
    if k % block:
        raise ValueError("field count must be a multiple of block")
    Z = np.zeros((n_paths, 2, 2), dtype=complex)
    Z[:, 0, 0] = 1.0
    Z[:, 1, 1] = 1.0
    worst = 0.0
    for m in range(n_steps):
        c = xi[m] * scale[m]
        for g in range(0, k, block):
            A = np.einsum("pk,kij->pij", c[:, g:g + block], V[g:g + block])
            Z = Z @ _expm_traceless(A)
        det = Z[:, 0, 0] * Z[:, 1, 1] - Z[:, 0, 1] * Z[:, 1, 0]
        worst = max(worst, float(np.max(np.abs(det - 1.0))))
    return Z, worst
