"""Power-series algebra over context scalars.

A PowerSeries is the truncated Maclaurin expansion of one embedded quantity:
coefficient n multiplies alpha**n and the list length is exactly the
truncation order plus one (no implicit zeros).  A SeriesSet bundles the
per-bus voltage series and the per-PV-bus reactive-power series that one
embedding produces.
"""

from __future__ import annotations

import io
import statistics


class SeriesError(Exception):
    pass


class InsufficientLength(SeriesError):
    pass


class ZeroLeadingCoefficient(SeriesError):
    pass


class ZeroCoefficientInWindow(SeriesError):
    pass


class PowerSeries:
    """Truncated power series; coefficients[n] is the alpha**n coefficient."""

    def __init__(self, coefficients):
        coeffs = list(coefficients)
        if not coeffs:
            raise ValueError("a series needs at least the order-0 coefficient")
        self.coefficients = coeffs

    @property
    def order(self):
        return len(self.coefficients) - 1

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, n):
        return self.coefficients[n]

    def truncated(self, order):
        if order > self.order:
            raise InsufficientLength(f"series has order {self.order}, need {order}")
        return PowerSeries(self.coefficients[:order + 1])

    def __repr__(self):
        return f"PowerSeries(order={self.order})"


def convolve(a, b, order):
    """Cauchy product c[n] = sum_m a[m]*b[n-m] through the given order."""
    if a.order < order or b.order < order:
        raise InsufficientLength("both inputs need at least order+1 coefficients")
    ca, cb = a.coefficients, b.coefficients
    out = []
    for n in range(order + 1):
        acc = ca[0] * cb[n]
        for m in range(1, n + 1):
            acc = acc + ca[m] * cb[n - m]
        out.append(acc)
    return PowerSeries(out)


def reciprocal(a, order):
    """Series W with a*W = 1 through the given order.

    W[0] = 1/a[0], W[n] = -(sum_{m=1..n} a[m] W[n-m]) / a[0].
    """
    if a.coefficients[0] == 0:
        raise ZeroLeadingCoefficient("cannot invert a series with zero leading term")
    if a.order < order:
        raise InsufficientLength(f"series has order {a.order}, need {order}")
    ca = a.coefficients
    inv0 = 1 / ca[0]
    out = [inv0]
    for n in range(1, order + 1):
        acc = ca[1] * out[n - 1]
        for m in range(2, n + 1):
            acc = acc + ca[m] * out[n - m]
        out.append(-acc * inv0)
    return PowerSeries(out)


def conjugate_reflect(a):
    """Coefficient-wise conjugate: the series of conj(f(conj(alpha)))."""
    return PowerSeries([c.conjugate() for c in a.coefficients])


def evaluate(a, alpha):
    """Horner evaluation of the truncated series at alpha."""
    coeffs = a.coefficients
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * alpha + c
    return acc


def roc_estimate(a, window=8):
    """Radius-of-convergence estimate from trailing coefficient ratios.

    Returns the median of |c[i]/c[i+1]| over the trailing ``window`` index
    pairs.  The limit of that ratio is the ROC when it exists; finite-order
    ratios ripple near branch points, hence the median.
    """
    if a.order < window + 1:
        raise InsufficientLength(f"need at least {window + 2} coefficients")
    coeffs = a.coefficients
    ratios = []
    for i in range(len(coeffs) - 1 - window, len(coeffs) - 1):
        if coeffs[i] == 0 or coeffs[i + 1] == 0:
            raise ZeroCoefficientInWindow(f"zero coefficient at index {i} in ratio window")
        ratios.append(abs(coeffs[i]) / abs(coeffs[i + 1]))
    return statistics.median(ratios)


class SeriesSet:
    """Per-bus voltage series plus per-PV-bus reactive series at one order.

    v maps bus id -> PowerSeries, q maps PV bus id -> PowerSeries (real
    coefficients).  All member series share length order+1.
    """

    def __init__(self, v, q, order):
        self.v = dict(v)
        self.q = dict(q)
        self.order = order
        self._validate()

    def _validate(self):
        for name, s in list(self.v.items()) + list(self.q.items()):
            if s.order != self.order:
                raise ValueError(f"series for {name!r} has order {s.order}, set order {self.order}")

    def voltages_at(self, alpha):
        """Raw truncated-series sums at alpha (no analytic continuation)."""
        return {bus: evaluate(s, alpha) for bus, s in self.v.items()}

    def __repr__(self):
        return f"SeriesSet(buses={len(self.v)}, order={self.order})"


def format_scalar(x, digits=None):
    """Deterministic decimal rendering of a context real."""
    if isinstance(x, float):
        return repr(x)
    import mpmath
    return mpmath.nstr(x, digits if digits else 19, strip_zeros=True)


def digits_for_bits(bits):
    """Decimal digits that round-trip a binary significand of the given width."""
    return int(bits * 0.30103) + 3


def series_to_csv(series_set, digits=None):
    """CSV dump with columns n, bus_id, re, im (buses in sorted order)."""
    buf = io.StringIO()
    buf.write("n,bus_id,re,im\n")
    for bus in sorted(series_set.v):
        s = series_set.v[bus]
        for n, c in enumerate(s.coefficients):
            buf.write(f"{n},{bus},{format_scalar(c.real, digits)},{format_scalar(c.imag, digits)}\n")
    return buf.getvalue()
