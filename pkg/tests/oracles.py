"""Independent reference implementations used to check the library.

Everything here is deliberately written from first principles (dense
eigensolvers, grids, finite differences, plain projected gradient) and never
calls into the code paths it validates.
"""

import numpy as np

LN2 = np.log(2.0)


def rand_cn(rng, rows, cols, scale=1.0):
    """i.i.d. CN(0, scale^2) matrix."""
    return scale * (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    ) / np.sqrt(2.0)


def rand_psd(rng, n, trace=None):
    """Random Hermitian PSD matrix, optionally normalized to a given trace."""
    a = rand_cn(rng, n, n)
    m = a @ a.conj().T
    m = 0.5 * (m + m.conj().T)
    if trace is not None:
        m *= trace / np.real(np.trace(m))
    return m


def logdet_eig_product(a):
    """log2 det via the product of eigenvalues."""
    eig = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    return float(np.sum(np.log2(eig)))


def power_iteration_max_eig(a, iters=10000, tol=1e-14):
    """Largest eigenvalue of a Hermitian matrix by shifted power iteration."""
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    # shift so the dominant eigenvalue of the shifted matrix is the largest
    shift = float(np.linalg.norm(a, 1))
    b = a + shift * np.eye(n)
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = b @ x
        lam_new = float(np.real(x.conj() @ y))
        y_norm = np.linalg.norm(y)
        x = y / y_norm
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam = lam_new
    return lam - shift


def fd_gradient(f, x, h=1e-6):
    """Central-difference gradient of a scalar function of a real vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def capacity_bits(h, r):
    """log2|I + h r h^H| via an eigen-decomposition (no Cholesky)."""
    gram = h @ r @ h.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    eig = np.linalg.eigvalsh(np.eye(h.shape[0]) + gram)
    return float(np.sum(np.log2(eig)))


def secrecy_bits(h1, h2, r):
    return capacity_bits(h1, r) - capacity_bits(h2, r)


def waterfill_capacity_two_modes_grid(h, p, points=2_000_001):
    """Best capacity of a rank-2 channel over a dense 1-D power split grid."""
    svals = np.linalg.svd(h, compute_uv=False)
    g1, g2 = float(svals[0] ** 2), float(svals[1] ** 2)
    p1 = np.linspace(0.0, p, points)
    caps = np.log2(1.0 + g1 * p1) + np.log2(1.0 + g2 * (p - p1))
    return float(np.max(caps))


def project_trace_psd(r, p):
    """Euclidean projection onto {R >= 0, tr(R) <= p}."""
    r = 0.5 * (r + r.conj().T)
    vals, vecs = np.linalg.eigh(r)
    vals = np.clip(vals, 0.0, None)
    if vals.sum() > p:
        # project the eigenvalues onto the simplex of radius p
        lo, hi = 0.0, float(vals.max())
        for _ in range(200):
            tau = 0.5 * (lo + hi)
            if np.clip(vals - tau, 0.0, None).sum() > p:
                lo = tau
            else:
                hi = tau
        vals = np.clip(vals - 0.5 * (lo + hi), 0.0, None)
        # bisection granularity is eps * vals.max(); enforce the budget exactly
        total = vals.sum()
        if total > p:
            vals *= p / total
    return (vecs * vals) @ vecs.conj().T


def secrecy_gradient(h1, h2, r):
    """Euclidean gradient of C_s(R) on the Hermitian space, in bits."""
    def term(h):
        gram = np.eye(h.shape[0]) + h @ r @ h.conj().T
        return h.conj().T @ np.linalg.inv(gram) @ h

    return (term(h1) - term(h2)) / LN2


def pg_secrecy_capacity(h1, h2, p, restarts=8, iters=4000, seed=0):
    """Projected-gradient oracle for the fixed-phase secrecy problem.

    Multi-restart ascent with backtracking on the step size; independent of
    the barrier machinery.  Returns the best C_s found.
    """
    rng = np.random.default_rng(seed)
    m = h1.shape[1]
    best = -np.inf
    starts = [np.eye(m, dtype=complex) * (p / m)]
    for _ in range(restarts - 1):
        starts.append(project_trace_psd(rand_psd(rng, m, trace=p * rng.uniform(0.3, 1.0)), p))
    for r0 in starts:
        r = r0.copy()
        val = secrecy_bits(h1, h2, r)
        step = 1.0
        for _ in range(iters):
            g = secrecy_gradient(h1, h2, r)
            improved = False
            while step > 1e-12:
                cand = project_trace_psd(r + step * g, p)
                cand_val = secrecy_bits(h1, h2, cand)
                if cand_val > val + 1e-14:
                    r, val = cand, cand_val
                    improved = True
                    step = min(step * 1.5, 64.0)
                    break
                step *= 0.5
            if not improved:
                break
        best = max(best, val)
    return best


def bootstrap_mean_lower(diffs, confidence=0.95, n_boot=4000, seed=0):
    """Lower percentile bound of the bootstrap distribution of the mean."""
    rng = np.random.default_rng(seed)
    diffs = np.asarray(diffs, dtype=float)
    idx = rng.integers(0, diffs.size, size=(n_boot, diffs.size))
    means = diffs[idx].mean(axis=1)
    return float(np.percentile(means, 100.0 * (1.0 - confidence)))


def real_coordinate_gradient(residual, m, d, e):
    """Map a lifted-complex stationarity residual to real-coordinate derivatives.

    Order: diagonal entries of R, then (Re, Im) of each strictly-lower entry
    in column-major order, then (Re, Im) of each N entry in column-major
    order.  A complex derivative w = df/dz* maps to (2 Re w, 2 Im w).
    """
    out = []
    r_part = residual[: m * m]
    out.extend(np.real(r_part[:m]))
    n_low = m * (m - 1) // 2
    for idx in range(n_low):
        w = r_part[m + idx]
        out.extend([2 * np.real(w), 2 * np.imag(w)])
    n_part = residual[m * m :]
    for idx in range(d * e):
        w = n_part[idx]
        out.extend([2 * np.real(w), 2 * np.imag(w)])
    return np.array(out)


def fd_real_gradient(f_of, r0, n0, m, d, e, h=1e-6):
    """Central differences of a scalar f(R, N) over the real coordinates of
    (Hermitian R, unstructured N), ordered as in real_coordinate_gradient."""
    vals = []
    for i in range(m):
        rp, rm = r0.copy(), r0.copy()
        rp[i, i] += h
        rm[i, i] -= h
        vals.append((f_of(rp, n0) - f_of(rm, n0)) / (2 * h))
    lower = [(i, j) for j in range(m) for i in range(j + 1, m)]
    for (i, j) in lower:
        for part in (1.0, 1j):
            rp, rm = r0.copy(), r0.copy()
            rp[i, j] += h * part
            rp[j, i] += h * np.conj(part)
            rm[i, j] -= h * part
            rm[j, i] -= h * np.conj(part)
            vals.append((f_of(rp, n0) - f_of(rm, n0)) / (2 * h))
    for b in range(d):
        for a in range(e):
            for part in (1.0, 1j):
                np_, nm = n0.copy(), n0.copy()
                np_[a, b] += h * part
                nm[a, b] -= h * part
                vals.append((f_of(r0, np_) - f_of(r0, nm)) / (2 * h))
    return np.array(vals)
