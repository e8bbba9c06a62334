# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Twin of ``smoclust._pure``: same classes, same functions, same arithmetic
in the same order.  Any semantic change here must be mirrored there;
``tests/test_backend_parity.py`` asserts bit-identical behaviour.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, floor, log, sqrt

cnp.import_array()

BACKEND = "compiled"

cdef double _TO_UNIT = 1.0 / 9007199254740992.0
cdef double _TWO_PI = 6.283185307179586


cdef inline unsigned long long _rotl(unsigned long long x, int k):
    return (x << k) | (x >> (64 - k))


cdef unsigned long long _splitmix64(unsigned long long *state):
    cdef unsigned long long z
    state[0] = state[0] + <unsigned long long>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <unsigned long long>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <unsigned long long>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef class Rng:
    """xoshiro256** generator; identical seed gives an identical stream."""

    cdef unsigned long long s0, s1, s2, s3
    cdef double _gauss
    cdef bint _has_gauss

    def __init__(self, seed):
        cdef unsigned long long state = <unsigned long long>(int(seed) & ((1 << 64) - 1))
        self.s0 = _splitmix64(&state)
        self.s1 = _splitmix64(&state)
        self.s2 = _splitmix64(&state)
        self.s3 = _splitmix64(&state)
        self._gauss = 0.0
        self._has_gauss = False

    cdef unsigned long long _next(self):
        cdef unsigned long long result = _rotl(self.s1 * <unsigned long long>5, 7) * <unsigned long long>9
        cdef unsigned long long t = self.s1 << 17
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = _rotl(self.s3, 45)
        return result

    def u64(self):
        return self._next()

    cdef double _uniform(self):
        return <double>(self._next() >> 11) * _TO_UNIT

    def uniform(self):
        return self._uniform()

    cdef double _normal(self):
        cdef double u, v, s, m
        if self._has_gauss:
            self._has_gauss = False
            return self._gauss
        while True:
            u = 2.0 * self._uniform() - 1.0
            v = 2.0 * self._uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        m = sqrt(-2.0 * log(s) / s)
        self._gauss = v * m
        self._has_gauss = True
        return u * m

    def normal(self):
        return self._normal()

    cdef unsigned long long _randint(self, unsigned long long n):
        cdef unsigned long long limit = (<unsigned long long>0 - n) // n * n + n
        # limit == 2**64 - (2**64 % n), computed without overflow: when n
        # divides 2**64 the expression wraps to 0, meaning "no rejection".
        cdef unsigned long long x
        while True:
            x = self._next()
            if limit == 0 or x < limit:
                return x % n

    def randint(self, n):
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        return self._randint(<unsigned long long>n)

    cdef long _poisson(self, double lam):
        cdef double limit, p, k
        cdef long count
        if lam <= 0.0:
            return 0
        if lam <= 30.0:
            limit = exp(-lam)
            count = 0
            p = 1.0
            while True:
                p *= self._uniform()
                if p <= limit:
                    return count
                count += 1
        k = floor(lam + sqrt(lam) * self._normal() + 0.5)
        if k < 0.0:
            return 0
        return <long>k

    def poisson(self, lam):
        return self._poisson(lam)


def unit_direction(int n, Rng rng):
    """Direction uniform on the unit (n-1)-sphere via normalised normals."""
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    cdef double ss, norm, g
    cdef int i
    while True:
        ss = 0.0
        for i in range(n):
            g = rng._normal()
            view[i] = g
            ss += g * g
        norm = sqrt(ss)
        if norm >= 1e-12:
            break
    for i in range(n):
        view[i] = view[i] / norm
    return out


cdef double _intercept(double[::1] origin, double[::1] through,
                       double[::1] centre, double radius) except? -1.0:
    cdef int n = origin.shape[0]
    cdef double a = 0.0, b = 0.0, c = 0.0
    cdef double d, g, disc
    cdef int i
    for i in range(n):
        d = through[i] - origin[i]
        g = centre[i] - origin[i]
        a += d * d
        b += d * g
        c += g * g
    if c >= radius * radius:
        raise ValueError("line origin is outside or on the sphere hull")
    if a <= 0.0:
        raise ValueError("degenerate direction: origin equals through point")
    b = -2.0 * b
    c = c - radius * radius
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise ArithmeticError("negative discriminant for interior origin")
    return (-b + sqrt(disc)) / (2.0 * a)


def positive_intercept(origin, through, centre, double radius):
    """Positive root of the line/hull quadratic.

    The line runs from ``origin`` towards ``through``; ``origin`` must lie
    strictly inside the sphere, which guarantees one positive real root.
    """
    return _intercept(origin, through, centre, radius)


def skewed_sample(anchor, centre, double radius, Rng rng):
    """Point inside the sphere, densest at ``anchor``.

    Draws a random direction from the anchor, finds the hull intercept along
    it and walks a half-Gaussian fraction (sigma = intercept / 3, clamped at
    the hull) of that distance.
    """
    cdef double[::1] anchor_v = anchor
    cdef int n = anchor_v.shape[0]
    if radius <= 0.0:
        return centre.copy()
    direction = unit_direction(n, rng)
    cdef double[::1] dir_v = direction
    through = np.empty(n, dtype=np.float64)
    cdef double[::1] through_v = through
    cdef int i
    for i in range(n):
        through_v[i] = anchor_v[i] + dir_v[i]
    cdef double t_int = _intercept(anchor_v, through_v, centre, radius)
    cdef double g = rng._normal() * (t_int / 3.0)
    cdef double t = -g if g < 0.0 else g
    if t > t_int:
        t = t_int
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out
    for i in range(n):
        out_v[i] = anchor_v[i] + t * dir_v[i]
    return out


def gaussian_in_sphere(centre, double radius, Rng rng):
    """Axis-wise Gaussian around the centre (sigma = radius / 3).

    Redraws up to 100 times if the point lands outside, then clamps
    radially, so the result is always inside or on the hull.
    """
    cdef double[::1] centre_v = centre
    cdef int n = centre_v.shape[0]
    if radius <= 0.0:
        return centre.copy()
    cdef double sd = radius / 3.0
    cdef double r2 = radius * radius
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double ss = 0.0
    cdef double d, scale
    cdef int i, attempt
    for attempt in range(100):
        ss = 0.0
        for i in range(n):
            d = sd * rng._normal()
            out_v[i] = centre_v[i] + d
            ss += d * d
        if ss <= r2:
            return out
    scale = radius / sqrt(ss)
    for i in range(n):
        out_v[i] = centre_v[i] + (out_v[i] - centre_v[i]) * scale
    return out


cdef class NBState:
    """Incremental Gaussian / categorical naive Bayes sufficient statistics.

    ``kinds[i]`` is 0 for a numeric attribute and the category count for a
    categorical one.  Categorical slots of a value vector carry the category
    index as a float.
    """

    cdef public object kinds, cat_offsets, counts, num_sum, num_sumsq, cat_counts
    cdef public double var_floor, laplace
    cdef long[::1] _kinds, _offsets
    cdef double[::1] _counts
    cdef double[:, ::1] _num_sum, _num_sumsq, _cat

    def __init__(self, kinds, var_floor, laplace):
        kinds = np.ascontiguousarray(kinds, dtype=np.int64)
        if kinds.ndim != 1:
            raise ValueError("kinds must be one-dimensional")
        self.kinds = kinds
        self.var_floor = float(var_floor)
        self.laplace = float(laplace)
        cdef int d = kinds.shape[0]
        offsets = np.zeros(d, dtype=np.int64)
        cdef long total = 0
        cdef int i
        for i in range(d):
            offsets[i] = total
            if kinds[i] > 0:
                total += int(kinds[i])
        self.cat_offsets = offsets
        self.counts = np.zeros(2, dtype=np.float64)
        self.num_sum = np.zeros((2, d), dtype=np.float64)
        self.num_sumsq = np.zeros((2, d), dtype=np.float64)
        self.cat_counts = np.zeros((2, total), dtype=np.float64)
        self._kinds = self.kinds
        self._offsets = self.cat_offsets
        self._counts = self.counts
        self._num_sum = self.num_sum
        self._num_sumsq = self.num_sumsq
        self._cat = self.cat_counts

    def reset(self):
        self.counts[:] = 0.0
        self.num_sum[:] = 0.0
        self.num_sumsq[:] = 0.0
        self.cat_counts[:] = 0.0

    def train(self, values, int label, double weight):
        cdef double[::1] vals = values
        cdef int d = self._kinds.shape[0]
        cdef double x
        cdef int i
        self._counts[label] += weight
        for i in range(d):
            if self._kinds[i] == 0:
                x = vals[i]
                self._num_sum[label, i] += weight * x
                self._num_sumsq[label, i] += weight * x * x
            else:
                self._cat[label, self._offsets[i] + <long>vals[i]] += weight

    cdef double _num_loglik(self, int c, int i, double x, double n):
        cdef double mean = self._num_sum[c, i] / n
        cdef double var = self._num_sumsq[c, i] / n - mean * mean
        cdef double diff
        if var < self.var_floor:
            var = self.var_floor
        diff = x - mean
        return -0.5 * log(_TWO_PI * var) - (diff * diff) / (2.0 * var)

    cdef (double, double) _scores(self, double[::1] vals):
        cdef int d = self._kinds.shape[0]
        cdef double laplace = self.laplace
        cdef double n0 = self._counts[0]
        cdef double n1 = self._counts[1]
        cdef double total = n0 + n1
        cdef double s0 = log((n0 + laplace) / (total + 2.0 * laplace))
        cdef double s1 = log((n1 + laplace) / (total + 2.0 * laplace))
        cdef long v, off
        cdef double x
        cdef int i
        for i in range(d):
            v = self._kinds[i]
            if v == 0:
                x = vals[i]
                if n0 > 0.0:
                    s0 += self._num_loglik(0, i, x, n0)
                if n1 > 0.0:
                    s1 += self._num_loglik(1, i, x, n1)
            else:
                off = self._offsets[i] + <long>vals[i]
                s0 += log((self._cat[0, off] + laplace) / (n0 + laplace * v))
                s1 += log((self._cat[1, off] + laplace) / (n1 + laplace * v))
        return s0, s1

    def log_scores(self, values):
        cdef double[::1] vals = values
        cdef (double, double) s = self._scores(vals)
        return s[0], s[1]

    def predict_many(self, xs):
        """Predicted class per row of ``xs`` (ties favour class 0)."""
        cdef double[:, ::1] x_v = xs
        cdef int m = x_v.shape[0]
        out = np.empty(m, dtype=np.int64)
        cdef long[::1] out_v = out
        cdef (double, double) s
        cdef int j
        for j in range(m):
            s = self._scores(x_v[j])
            out_v[j] = 1 if s[1] > s[0] else 0
        return out

    def state_arrays(self):
        return self.counts, self.num_sum, self.num_sumsq, self.cat_counts
