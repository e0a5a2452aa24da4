"""Shared helpers for the test suite: random inputs, finite differences, oracles."""
from __future__ import annotations

import numpy as np
from scipy import integrate


def random_path(rng: np.random.Generator, n_points: int | None = None, scale: float = 1.0) -> np.ndarray:
    n = int(rng.integers(2, 12)) if n_points is None else n_points
    return np.cumsum(rng.normal(scale=scale, size=(n, 2)), axis=0)


def rel_err(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """Largest elementwise ``|a - n| / max(|a|, |n|, floor)``.

    The floor keeps entries whose true value is ~0 from dividing
    finite-difference rounding noise by zero.
    """
    a, n = np.asarray(analytic, float), np.asarray(numeric, float)
    den = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / den))


def numeric_grad(f, x: np.ndarray, eps: float = 1e-5, indices=None) -> np.ndarray:
    """Central differences of scalar ``f()`` w.r.t. array ``x`` (perturbed in place)."""
    g = np.zeros_like(x)
    idx = np.ndindex(*x.shape) if indices is None else indices
    for i in idx:
        old = x[i]
        x[i] = old + eps
        fp = f()
        x[i] = old - eps
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * eps)
    return g


def quad_level2(points: np.ndarray) -> np.ndarray:
    """Second-level iterated integrals ``S^{ij} = int (x_i(t) - x_i(0)) dx_j(t)`` by quadrature.

    Each linear segment is parameterised on ``[0, 1]`` and the inner
    increment is integrated numerically with ``scipy.integrate.quad``.
    """
    pts = np.asarray(points, float)
    out = np.zeros((2, 2))
    start = pts[0]
    for a, b in zip(pts[:-1], pts[1:]):
        d = b - a
        for i in range(2):
            for j in range(2):
                val, _ = integrate.quad(lambda t: (a[i] + t * d[i] - start[i]) * d[j], 0.0, 1.0,
                                        epsabs=1e-13)
                out[i, j] += val
    return out


# one line per acceptance criterion, printed in the terminal summary
CRITERIA: list[str] = []


def record(tag: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
    CRITERIA.append(line)
    print(line)
