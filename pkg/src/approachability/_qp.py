"""Small dense solvers used by the geometry module.

Both routines are finite active-set methods, so on the low-dimensional
instances this package deals with they terminate at a point that is exact up
to floating-point rounding.
"""

import numpy as np

_EPS = 1e-13


def project_polyhedral_cone(A, x, max_iter=10_000):
    """Euclidean projection of ``x`` onto ``{theta : A @ theta <= 0}``.

    Goldfarb-Idnani dual active-set method specialised to an identity
    Hessian: start from the unconstrained minimiser ``x`` and add violated
    constraints one at a time, dropping constraints whose multiplier would
    turn negative. Every iterate keeps ``theta = x - A_act.T @ u``, ``u >= 0``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    x = np.asarray(x, dtype=float)
    if A.shape[0] == 0:
        return x.copy()
    row_norms = np.linalg.norm(A, axis=1)
    scale = max(1.0, float(np.linalg.norm(x)))
    theta = x.copy()
    active = []
    implied = set()
    u = np.zeros(0)
    for _ in range(max_iter):
        viol = (A @ theta) / np.where(row_norms > 0, row_norms, 1.0)
        if active:
            viol[active] = -np.inf
        if implied:
            viol[list(implied)] = -np.inf
        p = int(np.argmax(viol))
        if viol[p] <= _EPS * scale:
            return theta
        u_p = 0.0
        # raise the multiplier of constraint p until it is satisfied
        while True:
            a = A[p]
            if active:
                N = A[active]
                r, *_ = np.linalg.lstsq(N.T, a, rcond=None)
                z = a - N.T @ r
            else:
                r = np.zeros(0)
                z = a.copy()
            zz = float(z @ z)
            slack = float(a @ theta)
            t2 = slack / zz if zz > (_EPS * row_norms[p]) ** 2 else np.inf
            t1, drop = np.inf, None
            for j, (uj, rj) in enumerate(zip(u, r)):
                if rj > _EPS and uj / rj < t1:
                    t1, drop = uj / rj, j
            if not np.isfinite(t1) and not np.isfinite(t2):
                # a is spanned by the active rows with nonpositive weights, so
                # it is implied by them and its violation is rounding residue
                implied.add(p)
                break
            if t2 <= t1:
                theta = theta - t2 * z
                u = np.append(u - t2 * r, u_p + t2)
                active.append(p)
                implied.clear()
                break
            theta = theta - t1 * z if np.isfinite(t2) else theta
            u = u - t1 * r
            u_p += t1
            del active[drop]
            u = np.delete(u, drop)
    raise RuntimeError("polyhedral cone projection did not terminate")


def min_norm_point(P, max_iter=10_000):
    """Minimum-norm point of the convex hull of the rows of ``P`` (Wolfe).

    Returns ``(point, weights)`` with ``weights`` a distribution over rows.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    n = P.shape[0]
    norms2 = np.einsum("ij,ij->i", P, P)
    scale = max(1.0, float(norms2.max()))
    j0 = int(np.argmin(norms2))
    corral = [j0]
    w = np.array([1.0])
    x = P[j0].copy()
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= _EPS * scale or j in corral:
            break
        corral.append(j)
        w = np.append(w, 0.0)
        while True:
            Q = P[corral]
            m = len(corral)
            kkt = np.zeros((m + 1, m + 1))
            kkt[:m, :m] = Q @ Q.T
            kkt[:m, m] = 1.0
            kkt[m, :m] = 1.0
            rhs = np.zeros(m + 1)
            rhs[m] = 1.0
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            a = sol[:m]
            if np.all(a > _EPS):
                w = a
                break
            mask = a <= _EPS
            ratios = w[mask] / (w[mask] - a[mask])
            t = float(ratios.min()) if ratios.size else 0.0
            w = t * a + (1.0 - t) * w
            keep = w > _EPS
            if not keep.any():
                keep[np.argmax(w)] = True
            corral = [c for c, kk in zip(corral, keep) if kk]
            w = w[keep]
            w = w / w.sum()
        x = w @ P[corral]
    weights = np.zeros(n)
    weights[corral] = w
    return x, weights
