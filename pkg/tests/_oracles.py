"""Independent reference computations used by several test modules."""

import numpy as np

from qfbm.crmd import case_geometry
from qfbm.kernel import fbm_cov


def oracle_case(H, p, q):
    """Conditional-Gaussian coefficients for a CRMD window, solved densely.

    Independent route: increment covariances come from fbm_cov by
    bilinearity (not from interval_increment_cov) and the system is solved
    with a generic LU factorization.
    """
    starts, ends, t0, t1 = case_geometry(p, q)

    def inc_cov(a, b, c, d):
        return fbm_cov(b, d, H) - fbm_cov(b, c, H) - fbm_cov(a, d, H) + fbm_cov(a, c, H)

    n = len(starts)
    gam = np.array([[inc_cov(starts[i], ends[i], starts[j], ends[j]) for j in range(n)]
                    for i in range(n)])
    cross = np.array([inc_cov(t0, t1, starts[j], ends[j]) for j in range(n)])
    e = np.linalg.solve(gam, cross)
    return e, inc_cov(t0, t1, t0, t1) - cross @ e
