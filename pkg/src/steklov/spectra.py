"""Exact Steklov spectra of balls and concentric annuli in R^d."""

from dataclasses import dataclass, field
from typing import Optional

import math

import numpy as np

from .harmonics import multiplicity

TIE_TOL = 1e-9


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    d: int
    r_o: float
    r_i: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("ball", "annulus"):
            raise ValueError(f"domain kind must be 'ball' or 'annulus', got {self.kind!r}")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.d}")
        if not self.r_o > 0:
            raise ValueError("outer radius must be positive")
        if self.kind == "annulus":
            if self.r_i is None or not 0 < self.r_i < self.r_o:
                raise ValueError(f"annulus needs 0 < r_i < r_o, got r_i={self.r_i}, r_o={self.r_o}")
        elif self.r_i is not None:
            raise ValueError("a ball has no inner radius")

    @classmethod
    def ball(cls, d, r_o=1.0):
        return cls("ball", d, float(r_o))

    @classmethod
    def annulus(cls, d, r_i, r_o=1.0):
        return cls("annulus", d, float(r_o), float(r_i))

    @property
    def boundaries(self):
        """(label, radius) for every boundary sphere, outer first."""
        if self.kind == "ball":
            return (("outer", self.r_o),)
        return (("outer", self.r_o), ("inner", self.r_i))


@dataclass(frozen=True)
class RadialProfile:
    """f(r) = reg*r^l + sing*r^-(d+l-2) + log*ln r + const, unit norm on the boundary."""

    d: int
    degree: int
    reg: float = 0.0
    sing: float = 0.0
    log: float = 0.0
    const: float = 0.0
    r_min: float = 0.0
    r_max: float = math.inf

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        lo_ok = r > 0 if self.r_min == 0 else r >= self.r_min * (1 - 1e-12)
        if not np.all(lo_ok & (r <= self.r_max * (1 + 1e-12))):
            raise ValueError(f"radius outside [{self.r_min}, {self.r_max}]")
        return r

    def __call__(self, r):
        r = self._check(r)
        p = self.d + self.degree - 2
        return self.reg * r**self.degree + self.sing * r ** (-p) + self.log * np.log(r) + self.const

    def derivative(self, r):
        r = self._check(r)
        l, p = self.degree, self.d + self.degree - 2
        out = -p * self.sing * r ** (-p - 1) + self.log / r
        if l > 0:
            out = out + l * self.reg * r ** (l - 1)
        return out


def radial_profile_eval(profile, r):
    return profile(r)


@dataclass(frozen=True)
class SteklovEigen:
    value: float
    degree: int
    branch: int
    multiplicity: int
    index: Optional[int] = None
    profile: Optional[RadialProfile] = field(default=None, compare=False, repr=False)


def ball_eigen(domain, n):
    """Eigenvalue n/r_o of the ball with its boundary-normalized radial profile."""
    if domain.kind != "ball":
        raise ValueError("ball_eigen needs a ball domain")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    d, ro = domain.d, domain.r_o
    coef = ro ** (-(d - 1) / 2) * ro ** (-n)
    profile = RadialProfile(d, n, reg=coef, r_max=ro) if n > 0 else RadialProfile(d, 0, const=coef, r_max=ro)
    mult = multiplicity(n, d)
    index = sum(multiplicity(j, d) for j in range(n))
    return SteklovEigen(n / ro, n, 1, mult, index, profile)


def annulus_roots(d, r_i, r_o, n):
    """(mu_{n,1}, mu_{n,2}) in ascending order."""
    if n == 0:
        if d == 2:
            mu2 = -(r_i + r_o) / (r_i * r_o * math.log(r_i / r_o))
        else:
            mu2 = (d - 2) * (r_o ** (d - 1) + r_i ** (d - 1)) / (r_i * r_o * (r_o ** (d - 2) - r_i ** (d - 2)))
        return 0.0, mu2
    B = ((n + d - 2) * (r_o ** (2 * n + d - 1) + r_i ** (2 * n + d - 1))
         + n * r_i * r_o * (r_o ** (2 * n + d - 3) + r_i ** (2 * n + d - 3))) / (
        r_i * r_o * (r_o ** (2 * n + d - 2) - r_i ** (2 * n + d - 2)))
    C = n * (n + d - 2) / (r_i * r_o)
    disc = B * B - 4 * C
    if disc < 0:
        raise ArithmeticError(f"negative discriminant {disc} for degree {n}")
    hi = 0.5 * (B + math.sqrt(disc))
    return C / hi, hi


def _boundary_norm(profile, r_i, r_o):
    d = profile.d
    return r_i ** (d - 1) * profile(r_i) ** 2 + r_o ** (d - 1) * profile(r_o) ** 2


def _annulus_profile(d, r_i, r_o, n, mu):
    if n >= 1:
        p = d + n - 2
        a = p * (r_o ** -(p + 1) - r_i ** -(p + 1)) + mu * (r_o ** -p + r_i ** -p)
        b = n * (r_o ** (n - 1) - r_i ** (n - 1)) - mu * (r_o**n + r_i**n)
        c = math.sqrt(r_i ** (d - 1) * (a * r_i**n + b * r_i**-p) ** 2
                      + r_o ** (d - 1) * (a * r_o**n + b * r_o**-p) ** 2)
        return RadialProfile(d, n, reg=a / c, sing=b / c, r_min=r_i, r_max=r_o)
    if mu == 0.0:
        c = 1.0 / math.sqrt(r_i ** (d - 1) + r_o ** (d - 1))
        return RadialProfile(d, 0, const=c, r_min=r_i, r_max=r_o)
    # f = const + beta*g with g = ln r (d=2) or r^-(d-2); f'(r_o) = mu f(r_o)
    if d == 2:
        g, dg = math.log(r_o), 1.0 / r_o
        shape = RadialProfile(d, 0, log=1.0, const=(dg - mu * g) / mu, r_min=r_i, r_max=r_o)
    else:
        g, dg = r_o ** -(d - 2), -(d - 2) * r_o ** -(d - 1)
        shape = RadialProfile(d, 0, sing=1.0, const=(dg - mu * g) / mu, r_min=r_i, r_max=r_o)
    s = 1.0 / math.sqrt(_boundary_norm(shape, r_i, r_o))
    return RadialProfile(d, 0, sing=shape.sing * s, log=shape.log * s, const=shape.const * s,
                         r_min=r_i, r_max=r_o)


def annulus_eigen(domain, n):
    """The pair (mu_{n,1}, mu_{n,2}) of the annulus with radial profiles and indices."""
    if domain.kind != "annulus":
        raise ValueError("annulus_eigen needs an annulus domain")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    d, ri, ro = domain.d, domain.r_i, domain.r_o
    mult = multiplicity(n, d)
    out = []
    for k, mu in enumerate(annulus_roots(d, ri, ro, n), start=1):
        prof = _annulus_profile(d, ri, ro, n, mu)
        out.append(SteklovEigen(mu, n, k, mult, spectrum_index(domain, mu), prof))
    return tuple(out)


def steklov_eigen(domain, n, k=1):
    """Eigenvalue by degree and (annulus) branch."""
    if domain.kind == "ball":
        if k != 1:
            raise ValueError("ball eigenvalues carry branch 1 only")
        return ball_eigen(domain, n)
    if k not in (1, 2):
        raise ValueError("annulus branch must be 1 or 2")
    return annulus_eigen(domain, n)[k - 1]


def _degree_values(domain, n):
    if domain.kind == "ball":
        return (n / domain.r_o,)
    return annulus_roots(domain.d, domain.r_i, domain.r_o, n)


def _values_upto(domain, bound):
    """(value, degree, branch) for all eigenvalues <= bound.

    The lowest value of degree n increases with n (n/r_o for balls; the lower
    annulus root is monotone and asymptotically n/r_o), so the scan stops once
    that lower value exceeds ``bound`` for two consecutive increasing degrees.
    """
    found = []
    n, prev_low, above = 0, -math.inf, 0
    while True:
        vals = _degree_values(domain, n)
        low = min(vals)
        for k, v in enumerate(vals, start=1):
            if v <= bound:
                found.append((v, n, k))
        if low > bound and low > prev_low:
            above += 1
            if above >= 2:
                break
        else:
            above = 0
        prev_low = low
        n += 1
    return found


def spectrum_index(domain, value):
    """Smallest j with sigma_j = value (count of eigenvalues strictly below, by multiplicity)."""
    tol = TIE_TOL * max(1.0, abs(value))
    return sum(multiplicity(n, domain.d) for v, n, _ in _values_upto(domain, value) if v < value - tol)


def enumerate_spectrum(domain, count):
    """First ``count`` eigenvalues repeated by multiplicity, ascending, with indices."""
    if count < 1:
        raise ValueError("count must be positive")
    bound = 1.0 / domain.r_o
    while True:
        found = _values_upto(domain, bound)
        if sum(multiplicity(n, domain.d) for _, n, _ in found) >= count:
            break
        bound *= 2
    found.sort(key=lambda x: (x[0], x[1], x[2]))

    out = []
    group_start, group_value = 0, None
    for v, n, k in found:
        if group_value is None or v > group_value + TIE_TOL * max(1.0, group_value):
            group_start, group_value = len(out), v
        eig = _eigen_at(domain, n, k, v, group_start)
        out.extend([eig] * eig.multiplicity)
        if len(out) >= count:
            break
    return out[:count]


def _eigen_at(domain, n, k, value, index):
    d = domain.d
    if domain.kind == "ball":
        prof = ball_eigen(domain, n).profile
    else:
        prof = _annulus_profile(d, domain.r_i, domain.r_o, n, value)
    return SteklovEigen(value, n, k, multiplicity(n, d), index, prof)


def boundary_norm(eigen, domain):
    """sum over boundary spheres of r^{d-1} f(r)^2; equals 1 for every profile."""
    return sum(r ** (domain.d - 1) * eigen.profile(r) ** 2 for _, r in domain.boundaries)
