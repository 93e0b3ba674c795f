"""Quadrature rules on simplices in barycentric coordinates.

Weights are normalized to sum to 1; multiply by the simplex measure to
integrate.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from varifrac.core.exceptions import QuadratureError

MAX_DEGREE = 40

_THREE_POINT = (
    np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
    np.full(3, 1 / 3),
)


@lru_cache(maxsize=64)
def simplex_rule(k: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule exact for polynomials of total degree <= `degree` on a k-simplex.

    Returns:
        (bary, weights): bary has shape (q, k+1), weights shape (q,)
    """
    if k < 0 or k > 3 or degree < 0 or degree > MAX_DEGREE:
        raise QuadratureError(
            "No quadrature rule for this simplex dimension and degree",
            details={"k": k, "degree": degree, "max_degree": MAX_DEGREE},
        )
    if k == 0:
        bary, weights = np.ones((1, 1)), np.ones(1)
    elif degree <= 1:
        bary, weights = np.full((1, k + 1), 1.0 / (k + 1)), np.ones(1)
    elif k == 2 and degree == 2:
        bary, weights = _THREE_POINT
    else:
        bary, weights = _conical_product(k, degree)
    bary = np.array(bary)
    weights = np.array(weights)
    bary.setflags(write=False)
    weights.setflags(write=False)
    return bary, weights


def _conical_product(k: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    n = (degree + 2) // 2
    axes = []
    for i in range(k):
        alpha = k - 1 - i
        s, w = roots_jacobi(n, alpha, 0.0)
        axes.append(((1.0 + s) / 2.0, w * 2.0 ** (-(alpha + 1))))

    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    t = np.column_stack([g.ravel() for g in grids])
    w = np.prod(np.column_stack([g.ravel() for g in wgrids]), axis=1)

    # collapsed coordinates: x_i = t_i * prod_{j<i} (1 - t_j)
    x = np.empty_like(t)
    rest = np.ones(len(t))
    for i in range(k):
        x[:, i] = t[:, i] * rest
        rest = rest * (1.0 - t[:, i])
    bary = np.column_stack([1.0 - x.sum(axis=1), x])
    return bary, w / w.sum()
