"""Independent oracles shared by the test modules.

Everything here is deliberately written from scratch (central differences,
Jacobi eigenvalues, grid refinement) so the library under test is checked
against arithmetic it does not share code with.
"""

import itertools

import numpy as np

from pathlib import Path

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


# ---------------------------------------------------------------- finite diffs

def fd_gradient(fun, x, h=1e-6):
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        out[k] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return out


def fd_jacobian(fun, x, h=1e-5):
    """Central-difference Jacobian of a vector- (or matrix-) valued function.

    Output shape is fun(x).shape + (len(x),); for a gradient input this is the
    Hessian with the differentiation index last, which for symmetric results
    coincides with the usual layout.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x), dtype=float)
    out = np.zeros(f0.shape + (x.size,))
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        out[..., k] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2.0 * h)
    return out


def fd_directional(fun, x, d, h=1e-5):
    """Central difference of fun along direction d: (fun(x+h d) - fun(x-h d)) / 2h."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    return (np.asarray(fun(x + h * d), dtype=float)
            - np.asarray(fun(x - h * d), dtype=float)) / (2.0 * h)


def fd_time(fun, t, h=1e-6):
    """Central difference of a scalar-parameter (time) dependent quantity."""
    return (np.asarray(fun(t + h), dtype=float)
            - np.asarray(fun(t - h), dtype=float)) / (2.0 * h)


# -------------------------------------------------------- independent eigensolver

def jacobi_eigenvalues(A, tol=1e-12, max_sweeps=60):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Intentionally does not call numpy.linalg: it cross-checks the library's
    spectral code with nothing but rotations.  Fine for the n <= 12 matrices
    the graph tests use.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return A.reshape(1).copy()
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += A[p, q] ** 2
        if np.sqrt(2.0 * off) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                sign = 1.0 if theta >= 0 else -1.0
                t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q in place
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
    return np.sort(np.diag(A))


# ------------------------------------------------------------- grid refinement

def grid_minimize(objectives, constraints, lo, hi, rounds=40, pts=33):
    """Best strictly feasible point of sum(objectives) by zooming grid search.

    Returns (x_best, F_best).  Shares no algorithmic DNA with the Newton
    path-following solver it is used to audit.  The window only shrinks when
    the best node stays well inside it; re-centering jumps keep the previous
    window size so a minimizer sitting exactly on a constraint boundary
    cannot be ejected by one bad zoom.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    dim = lo.size
    best_x, best_f = None, np.inf
    for _ in range(rounds):
        axes = [np.linspace(lo[k], hi[k], pts) for k in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=-1)
        center = 0.5 * (lo + hi)
        round_x, round_f = None, np.inf
        for x in points:
            if any(g.value(x) >= 0.0 for g in constraints):
                continue
            f = sum(f_.value(x) for f_ in objectives)
            if f < round_f:
                round_f, round_x = f, x.copy()
        if round_x is None:
            raise RuntimeError("no feasible grid point found")
        if round_f < best_f:
            best_f, best_x = round_f, round_x
        width = hi - lo
        spacing = width / (pts - 1)
        move = np.abs(round_x - center)
        span = np.maximum(2.5 * spacing, 1.5 * move)
        span = np.minimum(span, 0.5 * width)  # never grow
        lo = round_x - span
        hi = round_x + span
        if float(span.max()) < 1e-9:
            break
    # Axis-aligned windows cannot slide along an oblique active boundary, so
    # a compass polish with diagonal moves finishes the job.
    directions = [np.array(d, dtype=float)
                  for d in itertools.product((-1.0, 0.0, 1.0), repeat=dim)
                  if any(v != 0.0 for v in d)]
    directions = [d / np.linalg.norm(d) for d in directions]
    h = 1e-2 * float(np.max(np.abs(best_x)) + 1.0)
    while h > 1e-12:
        improved = False
        for d in directions:
            x = best_x + h * d
            if any(g.value(x) >= 0.0 for g in constraints):
                continue
            f = sum(f_.value(x) for f_ in objectives)
            if f < best_f:
                best_f, best_x, improved = f, x, True
        if not improved:
            h *= 0.5
    return best_x, best_f


# ------------------------------------------------------------- random graphs

def random_connected_edges(rng, n, extra=2):
    """Random spanning tree on n vertices plus a few extra edges."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    for _ in range(extra):
        u, v = rng.choice(n, size=2, replace=False)
        u, v = int(min(u, v)), int(max(u, v))
        edges.add((u, v))
    return sorted(edges)
