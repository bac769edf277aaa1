"""Euclidean projection onto the probability simplex."""
import numpy as np


def project_simplex(v):
    """Project v onto {y : y_i >= 0, sum y_i = 1} by sort-and-threshold.

    O(C log C); the projection is unique so tie handling in the sort is
    irrelevant to the output.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project non-finite vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - css) / j > 0.0)[0][-1]
    tau = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + tau, 0.0)
