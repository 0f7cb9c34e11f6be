"""Richardson extrapolation in 1/M and log-log order fits."""

import numpy as np

__all__ = ["richardson", "loglog_slope"]


def richardson(Ms, values, orders=None):
    """Limit M -> inf of values(M) assuming values = L + sum_k c_k M^{-k}.

    ``orders`` defaults to 1, 2, ..., len(Ms) - 1, so the fit is exact in
    the given points.  Returns the estimate of L.
    """
    Ms = np.asarray(Ms, dtype=float)
    values = np.asarray(values)
    if orders is None:
        orders = range(1, len(Ms))
    orders = list(orders)
    if len(orders) + 1 != len(Ms):
        raise ValueError("need exactly one more truncation than correction orders")
    A = np.column_stack([np.ones_like(Ms)] + [Ms ** (-float(k)) for k in orders])
    return np.linalg.solve(A.astype(values.dtype if np.iscomplexobj(values) else float), values)[0]


def loglog_slope(xs, ys):
    """Least-squares slope of log|y| against log x."""
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.abs(np.asarray(ys)))
    return float(np.polyfit(xs, ys, 1)[0])
