"""Pure-Python numeric kernels.

This module mirrors the compiled extension ``smoclust._speed`` operation for
operation.  Both backends must produce bit-identical results for the same
call sequence, so every loop below accumulates in the same order as the C
code and all transcendental calls go through libm (math.*).  Prefer editing
both files together; ``tests/test_backend_parity.py`` enforces the contract.
"""

import math

import numpy as np

BACKEND = "pure"

_MASK64 = (1 << 64) - 1
_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


class Rng:
    """xoshiro256** generator; identical seed gives an identical stream."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "_gauss", "_has_gauss")

    def __init__(self, seed):
        seed = int(seed) & _MASK64
        seed, s0 = _splitmix64(seed)
        seed, s1 = _splitmix64(seed)
        seed, s2 = _splitmix64(seed)
        seed, s3 = _splitmix64(seed)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        self._gauss = 0.0
        self._has_gauss = False

    def u64(self):
        s1 = self._s1
        x = (s1 * 5) & _MASK64
        result = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 = self._s2 ^ self._s0
        s3 = self._s3 ^ s1
        self._s1 = s1 ^ s2
        self._s0 = self._s0 ^ s3
        s2 ^= t
        self._s2 = s2
        self._s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        return result

    def uniform(self):
        return (self.u64() >> 11) * _TO_UNIT

    def normal(self):
        # Marsaglia polar method with one cached deviate.
        if self._has_gauss:
            self._has_gauss = False
            return self._gauss
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        m = math.sqrt(-2.0 * math.log(s) / s)
        self._gauss = v * m
        self._has_gauss = True
        return u * m

    def randint(self, n):
        # Unbiased draw in [0, n) by rejection.
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            x = self.u64()
            if x < limit:
                return x % n

    def poisson(self, lam):
        # Multiplicative inversion below 30, normal approximation above;
        # both paths only touch this generator, so draws stay reproducible.
        if lam <= 0.0:
            return 0
        if lam <= 30.0:
            limit = math.exp(-lam)
            k = 0
            p = 1.0
            while True:
                p *= self.uniform()
                if p <= limit:
                    return k
                k += 1
        k = math.floor(lam + math.sqrt(lam) * self.normal() + 0.5)
        if k < 0.0:
            return 0
        return int(k)


def unit_direction(n, rng):
    """Direction uniform on the unit (n-1)-sphere via normalised normals."""
    out = np.empty(n, dtype=np.float64)
    while True:
        ss = 0.0
        for i in range(n):
            g = rng.normal()
            out[i] = g
            ss += g * g
        norm = math.sqrt(ss)
        if norm >= 1e-12:
            break
    for i in range(n):
        out[i] = out[i] / norm
    return out


def positive_intercept(origin, through, centre, radius):
    """Positive root of the line/hull quadratic.

    The line runs from ``origin`` towards ``through``; ``origin`` must lie
    strictly inside the sphere, which guarantees one positive real root.
    """
    n = origin.shape[0]
    a = 0.0
    b = 0.0
    c = 0.0
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
    return (-b + math.sqrt(disc)) / (2.0 * a)


def skewed_sample(anchor, centre, radius, rng):
    """Point inside the sphere, densest at ``anchor``.

    Draws a random direction from the anchor, finds the hull intercept along
    it and walks a half-Gaussian fraction (sigma = intercept / 3, clamped at
    the hull) of that distance.
    """
    n = anchor.shape[0]
    if radius <= 0.0:
        return centre.copy()
    direction = unit_direction(n, rng)
    through = np.empty(n, dtype=np.float64)
    for i in range(n):
        through[i] = anchor[i] + direction[i]
    t_int = positive_intercept(anchor, through, centre, radius)
    g = rng.normal() * (t_int / 3.0)
    t = -g if g < 0.0 else g
    if t > t_int:
        t = t_int
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = anchor[i] + t * direction[i]
    return out


def gaussian_in_sphere(centre, radius, rng):
    """Axis-wise Gaussian around the centre (sigma = radius / 3).

    Redraws up to 100 times if the point lands outside, then clamps
    radially, so the result is always inside or on the hull.
    """
    n = centre.shape[0]
    if radius <= 0.0:
        return centre.copy()
    sd = radius / 3.0
    r2 = radius * radius
    out = np.empty(n, dtype=np.float64)
    ss = 0.0
    for _ in range(100):
        ss = 0.0
        for i in range(n):
            d = sd * rng.normal()
            out[i] = centre[i] + d
            ss += d * d
        if ss <= r2:
            return out
    scale = radius / math.sqrt(ss)
    for i in range(n):
        out[i] = centre[i] + (out[i] - centre[i]) * scale
    return out


_TWO_PI = 6.283185307179586


class NBState:
    """Incremental Gaussian / categorical naive Bayes sufficient statistics.

    ``kinds[i]`` is 0 for a numeric attribute and the category count for a
    categorical one.  Categorical slots of a value vector carry the category
    index as a float.
    """

    def __init__(self, kinds, var_floor, laplace):
        kinds = np.ascontiguousarray(kinds, dtype=np.int64)
        if kinds.ndim != 1:
            raise ValueError("kinds must be one-dimensional")
        self.kinds = kinds
        self.var_floor = float(var_floor)
        self.laplace = float(laplace)
        d = kinds.shape[0]
        offsets = np.zeros(d, dtype=np.int64)
        total = 0
        for i in range(d):
            offsets[i] = total
            if kinds[i] > 0:
                total += int(kinds[i])
        self.cat_offsets = offsets
        self.counts = np.zeros(2, dtype=np.float64)
        self.num_sum = np.zeros((2, d), dtype=np.float64)
        self.num_sumsq = np.zeros((2, d), dtype=np.float64)
        self.cat_counts = np.zeros((2, total), dtype=np.float64)

    def reset(self):
        self.counts[:] = 0.0
        self.num_sum[:] = 0.0
        self.num_sumsq[:] = 0.0
        self.cat_counts[:] = 0.0

    def train(self, values, label, weight):
        kinds = self.kinds
        d = kinds.shape[0]
        w = float(weight)
        self.counts[label] += w
        for i in range(d):
            if kinds[i] == 0:
                x = values[i]
                self.num_sum[label, i] += w * x
                self.num_sumsq[label, i] += w * x * x
            else:
                v = int(values[i])
                self.cat_counts[label, self.cat_offsets[i] + v] += w

    def log_scores(self, values):
        kinds = self.kinds
        d = kinds.shape[0]
        laplace = self.laplace
        n0 = self.counts[0]
        n1 = self.counts[1]
        total = n0 + n1
        s0 = math.log((n0 + laplace) / (total + 2.0 * laplace))
        s1 = math.log((n1 + laplace) / (total + 2.0 * laplace))
        for i in range(d):
            v = kinds[i]
            if v == 0:
                x = values[i]
                if n0 > 0.0:
                    s0 += self._num_loglik(0, i, x, n0)
                if n1 > 0.0:
                    s1 += self._num_loglik(1, i, x, n1)
            else:
                off = self.cat_offsets[i] + int(values[i])
                s0 += math.log(
                    (self.cat_counts[0, off] + laplace) / (n0 + laplace * v)
                )
                s1 += math.log(
                    (self.cat_counts[1, off] + laplace) / (n1 + laplace * v)
                )
        return s0, s1

    def _num_loglik(self, c, i, x, n):
        mean = self.num_sum[c, i] / n
        var = self.num_sumsq[c, i] / n - mean * mean
        if var < self.var_floor:
            var = self.var_floor
        diff = x - mean
        return -0.5 * math.log(_TWO_PI * var) - (diff * diff) / (2.0 * var)

    def predict_many(self, xs):
        """Predicted class per row of ``xs`` (ties favour class 0)."""
        m = xs.shape[0]
        out = np.empty(m, dtype=np.int64)
        for j in range(m):
            s0, s1 = self.log_scores(xs[j])
            out[j] = 1 if s1 > s0 else 0
        return out

    def state_arrays(self):
        return self.counts, self.num_sum, self.num_sumsq, self.cat_counts
