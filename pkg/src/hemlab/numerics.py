"""Configurable-precision complex arithmetic, dense LU solving, polynomial roots.

Everything above this module (series algebra, embeddings, Pade approximants,
diagnostics) works on scalars created by a :class:`PrecisionContext`.  A
context either runs in native mode (hardware binary64, plain ``float`` /
``complex``) or wraps a dedicated mpmath context at a fixed number of
significand bits.  Values are immutable and safe to share; all operations
here are pure functions of their inputs and the context.
"""

from __future__ import annotations

import math

import mpmath
from mpmath.ctx_mp import MPContext

GOLDEN_ANGLE = 2.0 * math.pi * (1.0 - 1.0 / ((1.0 + math.sqrt(5.0)) / 2.0))


class NumericsError(Exception):
    """Base class for numerics failures."""


class SingularMatrix(NumericsError):
    """A pivot underflowed to exactly zero during LU factorization."""


class NoConvergence(NumericsError):
    """Root iteration hit max_iterations; best iterates are attached.

    Attributes:
        roots: best root iterates at the time of failure
        iterations: number of iterations performed
    """

    def __init__(self, message, roots=None, iterations=0):
        super().__init__(message)
        self.roots = roots if roots is not None else []
        self.iterations = iterations


class PrecisionContext:
    """Fixes the binary precision of every value created under it.

    In native mode scalars are plain ``float``/``complex`` and arithmetic is
    bit-identical to hardware doubles.  Otherwise scalars are mpf/mpc from a
    private mpmath context at ``significand_bits`` of precision, independent
    of mpmath's global state.
    """

    def __init__(self, significand_bits=53, native_mode=False):
        if significand_bits < 53:
            raise ValueError("significand_bits must be >= 53")
        if native_mode and significand_bits != 53:
            raise ValueError("native mode implies 53 significand bits")
        self.significand_bits = int(significand_bits)
        self.native_mode = bool(native_mode)
        if native_mode:
            self._m = mpmath.fp
        else:
            self._m = MPContext()
            self._m.prec = self.significand_bits

    @classmethod
    def native(cls):
        return cls(53, native_mode=True)

    @classmethod
    def bits(cls, n):
        return cls(n)

    @property
    def eps(self):
        """Unit roundoff scale: 2**(1 - significand_bits) as a context real."""
        return self.real(2.0) ** (1 - self.significand_bits)

    def real(self, x):
        """Build a context real from int, float, str, or mpf."""
        if self.native_mode:
            return float(x)
        return self._m.mpf(x)

    def complex(self, re, im=0):
        """Build a context complex from real/imag parts."""
        if self.native_mode:
            return complex(float(re), float(im))
        return self._m.mpc(self._m.mpf(re), self._m.mpf(im))

    def coerce(self, z):
        """Coerce any complex-like value (incl. foreign-context mpc) to this context."""
        if isinstance(z, (int, float)):
            return self.complex(z)
        if isinstance(z, complex):
            return self.complex(z.real, z.imag)
        return self.complex(z.real, z.imag)

    def to_complex(self, z):
        """Downconvert a context scalar to builtin complex (for reports/export)."""
        if isinstance(z, complex):
            return z
        if isinstance(z, float):
            return complex(z)
        return complex(float(z.real), float(z.imag))

    def sqrt(self, z):
        return self._m.sqrt(z)

    def expj(self, theta):
        """exp(j*theta) for a real theta given as float/str/mpf."""
        t = self.real(theta)
        return self.complex(self._m.cos(t), self._m.sin(t))

    def zero(self):
        return self.complex(0)

    def one(self):
        return self.complex(1)

    def __repr__(self):
        mode = "native" if self.native_mode else "mp"
        return f"PrecisionContext({self.significand_bits} bits, {mode})"


class Polynomial:
    """Dense univariate polynomial; coefficients[i] multiplies alpha**i.

    Trailing coefficients are trimmed only when exactly zero; near-zero
    leading coefficients are deliberately kept (the Pade layer owns that
    judgement call).
    """

    def __init__(self, coefficients):
        coeffs = list(coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        self.coefficients = coeffs

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def is_zero(self):
        return len(self.coefficients) == 1 and self.coefficients[0] == 0

    def __len__(self):
        return len(self.coefficients)

    def __repr__(self):
        return f"Polynomial(degree={self.degree})"


class ComplexMatrix:
    """Dense complex matrix, entries row-major."""

    def __init__(self, rows, cols, entries):
        entries = list(entries)
        if rows * cols != len(entries):
            raise ValueError("rows*cols must equal len(entries)")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, row_lists):
        rows = len(row_lists)
        cols = len(row_lists[0]) if rows else 0
        flat = []
        for r in row_lists:
            if len(r) != cols:
                raise ValueError("ragged rows")
            flat.extend(r)
        return cls(rows, cols, flat)

    @classmethod
    def zeros(cls, ctx, rows, cols):
        z = ctx.zero()
        return cls(rows, cols, [z] * (rows * cols))

    def at(self, i, j):
        return self.entries[i * self.cols + j]

    def set_at(self, i, j, value):
        self.entries[i * self.cols + j] = value

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_lists(self):
        return [self.row(i) for i in range(self.rows)]

    def matvec(self, v):
        """Matrix-vector product over context scalars."""
        if len(v) != self.cols:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(self.rows):
            base = i * self.cols
            acc = self.entries[base] * v[0]
            for j in range(1, self.cols):
                acc = acc + self.entries[base + j] * v[j]
            out.append(acc)
        return out

    def __repr__(self):
        return f"ComplexMatrix({self.rows}x{self.cols})"


class LUFactors:
    """PA = LU factors with partial pivoting, reusable across right-hand sides.

    ``condition_proxy`` is the ratio of largest to smallest pivot magnitude, a
    cheap ill-conditioning indicator; it is reported, never enforced.
    """

    def __init__(self, n, lu, perm, condition_proxy):
        self.n = n
        self.lu = lu
        self.perm = perm
        self.condition_proxy = condition_proxy


def lu_factor(m):
    """Factor a square ComplexMatrix (or list of row lists) with partial pivoting.

    Raises SingularMatrix when a pivot magnitude is exactly zero at the
    working precision.
    """
    rows = m.to_lists() if isinstance(m, ComplexMatrix) else [list(r) for r in m]
    n = len(rows)
    for r in rows:
        if len(r) != n:
            raise ValueError("matrix must be square")
    perm = list(range(n))
    pivots = []
    for k in range(n):
        pmag = abs(rows[k][k])
        prow = k
        for i in range(k + 1, n):
            mag = abs(rows[i][k])
            if mag > pmag:
                pmag = mag
                prow = i
        if pmag == 0:
            raise SingularMatrix(f"zero pivot at column {k}")
        if prow != k:
            rows[k], rows[prow] = rows[prow], rows[k]
            perm[k], perm[prow] = perm[prow], perm[k]
        pivots.append(pmag)
        piv = rows[k][k]
        for i in range(k + 1, n):
            factor = rows[i][k] / piv
            rows[i][k] = factor
            if factor != 0:
                rk = rows[k]
                ri = rows[i]
                for j in range(k + 1, n):
                    ri[j] = ri[j] - factor * rk[j]
    cond = max(pivots) / min(pivots) if pivots else 1.0
    return LUFactors(n, rows, perm, cond)


def lu_solve(factors, rhs):
    """Solve the factored system for one right-hand side vector."""
    n = factors.n
    if len(rhs) != n:
        raise ValueError("dimension mismatch")
    lu = factors.lu
    x = [rhs[p] for p in factors.perm]
    # forward substitution (unit lower triangle)
    for i in range(1, n):
        acc = x[i]
        row = lu[i]
        for j in range(i):
            acc = acc - row[j] * x[j]
        x[i] = acc
    # back substitution
    for i in range(n - 1, -1, -1):
        acc = x[i]
        row = lu[i]
        for j in range(i + 1, n):
            acc = acc - row[j] * x[j]
        x[i] = acc / row[i]
    return x


def poly_eval(p, z):
    """Horner evaluation of a Polynomial (or coefficient list) at z."""
    coeffs = p.coefficients if isinstance(p, Polynomial) else p
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
    return acc


def _poly_derivative_coeffs(coeffs):
    return [coeffs[i] * i for i in range(1, len(coeffs))]


def poly_roots(p, ctx, max_iterations=200, tol_root=None):
    """All roots (with multiplicity) by Aberth-Ehrlich simultaneous iteration.

    Initial guesses sit on a circle of radius (|c0/c_deg|)**(1/deg) with
    golden-angle spacing, which avoids the symmetric stagnation traps of
    uniformly spaced starts and copes with root clusters near branch points.

    Each returned root r satisfies |p(r)| <= tol_root * max|c| * max(1,|r|)**deg
    with tol_root = 2**(-bits/2) unless overridden.  Raises NoConvergence
    (carrying the best iterates) after max_iterations.
    """
    coeffs = [ctx.coerce(c) for c in (p.coefficients if isinstance(p, Polynomial) else p)]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    deg = len(coeffs) - 1
    if deg < 1:
        raise ValueError("degree must be >= 1")

    roots = []
    # exact zero roots deflate immediately
    while coeffs[0] == 0 and len(coeffs) > 1:
        roots.append(ctx.zero())
        coeffs = coeffs[1:]
    deg = len(coeffs) - 1
    if deg == 0:
        return roots
    if deg == 1:
        roots.append(-coeffs[0] / coeffs[1])
        return roots

    if tol_root is None:
        tol_root = ctx.real(2.0) ** (-(ctx.significand_bits // 2))
    max_coeff = max(abs(c) for c in coeffs)
    dcoeffs = _poly_derivative_coeffs(coeffs)

    r0 = abs(coeffs[0] / coeffs[-1]) ** (ctx.real(1) / deg)
    if r0 == 0:
        r0 = ctx.real(1)
    xs = [r0 * ctx.expj(GOLDEN_ANGLE * (k + 1)) for k in range(deg)]

    one = ctx.real(1)
    eps = ctx.eps
    half_tol = ctx.sqrt(eps)

    def residual_ok(x, tol):
        return abs(poly_eval(coeffs, x)) <= tol * max_coeff * max(one, abs(x)) ** deg

    # Convergence is judged on the Aberth correction size, not the residual
    # bound alone: the bound scales like max(1,|r|)**deg and is far too lax
    # for big roots of high-degree polynomials.  The residual bound is the
    # final acceptance check.
    converged = [False] * deg
    for it in range(max_iterations):
        moved = False
        for i in range(deg):
            if converged[i]:
                continue
            xi = xs[i]
            pv = poly_eval(coeffs, xi)
            dv = poly_eval(dcoeffs, xi)
            if dv == 0:
                xs[i] = xi + (eps + abs(xi) * eps) * ctx.expj(it + 1)
                moved = True
                continue
            newton = pv / dv
            ssum = ctx.zero()
            for j in range(deg):
                if j != i:
                    diff = xi - xs[j]
                    if diff == 0:
                        diff = eps * (1 + abs(xi)) * ctx.expj(i - j)
                    ssum = ssum + 1 / diff
            denom = 1 - newton * ssum
            step = newton if denom == 0 else newton / denom
            scale = eps + abs(xi)
            if abs(step) <= 4 * eps * scale:
                converged[i] = True
            elif abs(step) <= half_tol * scale and residual_ok(xi, tol_root):
                # linear-rate cluster: accept once inside the residual bound
                converged[i] = True
            else:
                moved = True
            xs[i] = xi - step
        if not moved:
            break
    if not all(converged) and not all(residual_ok(x, tol_root) for x in xs):
        raise NoConvergence(
            f"Aberth iteration did not converge in {max_iterations} iterations",
            roots=roots + xs, iterations=max_iterations)

    all_roots = roots + xs
    all_roots.sort(key=lambda z: (float(z.real), float(z.imag)))
    return all_roots
