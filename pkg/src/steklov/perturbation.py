"""Deformation fields, EMP matrices and criticality classification.

A deformation field is described by the Fourier-Laplace coefficients of its
radial (normal) velocity on each boundary sphere, pulled back to the unit
sphere. On an inner boundary the coefficients describe the velocity away from
the centre; the sign flip of the domain's outward normal there is handled by
the assembly.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import math

import numpy as np

from . import harmonics as sh
from .harmonics import HarmonicIndex, multiplicity, sphere_area

ZERO_TOL = 1e-10


@dataclass(frozen=True)
class DeformationField:
    d: int
    boundaries: Dict[str, Dict[HarmonicIndex, complex]] = field(default_factory=dict)
    variant: str = "complex"

    def __post_init__(self):
        if self.variant not in sh.VARIANTS:
            raise ValueError(f"unknown basis variant {self.variant!r}")
        clean = {}
        for label, coeffs in self.boundaries.items():
            if label not in ("outer", "inner"):
                raise ValueError(f"unknown boundary {label!r}")
            table = {}
            for idx, c in coeffs.items():
                idx = HarmonicIndex(*idx)
                sh.validate_index(idx, self.d)
                table[idx] = complex(c)
            clean[label] = table
        object.__setattr__(self, "boundaries", clean)

    def coefficients(self, boundary):
        return self.boundaries.get(boundary, {})

    def to_complex(self):
        if self.variant == "complex":
            return self
        return DeformationField(
            self.d,
            {b: sh.coeff_conjugate_transform(c, "real->complex", self.d) for b, c in self.boundaries.items()},
            "complex",
        )

    def to_real(self):
        if self.variant == "real":
            return self
        return DeformationField(
            self.d,
            {b: sh.coeff_conjugate_transform(c, "complex->real", self.d) for b, c in self.boundaries.items()},
            "real",
        )

    def evaluate(self, boundary, angles, gradient=False):
        """Real normal velocity on one boundary (and its unit-sphere surface gradient)."""
        real = self.to_real().coefficients(boundary)
        out = sh.expand(real, self.d, angles, "real", gradient=gradient)
        return out

    def alpha0(self, boundary):
        return self.coefficients(boundary).get(sh.constant_index(self.d), 0.0)

    def volume_preserving(self, boundary, tol=1e-12):
        return abs(self.alpha0(boundary)) <= tol

    def scale(self):
        vals = [abs(c) for coeffs in self.boundaries.values() for c in coeffs.values()]
        return max(vals, default=0.0)


def field_from_terms(d, outer=None, inner=None, variant="real"):
    """Convenience constructor: ``{(l, m): coefficient}`` maps per boundary, returned in complex form."""
    bounds = {}
    if outer:
        bounds["outer"] = outer
    if inner:
        bounds["inner"] = inner
    return DeformationField(d, bounds, variant).to_complex()


@dataclass
class EmpMatrix:
    eigen: object
    entries: np.ndarray
    eigenvalues: np.ndarray
    trace: float

    @property
    def size(self):
        return self.entries.shape[0]

    def hermitian_defect(self):
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))


def emp_factor(domain, eigen, boundary, l):
    """Boundary weight A(r, l, mu, d); reduces to B(l, r_o) on a ball."""
    d, n, mu = domain.d, eigen.degree, eigen.value
    r = domain.r_o if boundary == "outer" else domain.r_i
    N2 = float(eigen.profile(r)) ** 2
    curvature = -(d - 1) * r * mu if boundary == "outer" else (d - 1) * r * mu
    return N2 * r ** (d - 3) * (n * (n + d - 2) - l * (l + d - 2) / 2 - r * r * mu * mu + curvature)


def _emp_entries(domain, field, eigen, method):
    d, n = domain.d, eigen.degree
    if d not in (2, 3):
        raise ValueError(f"EMP assembly is implemented for d in (2, 3), got {d}")
    if field.d != d:
        raise ValueError("field and domain dimensions differ")
    if field.variant != "complex":
        raise ValueError("EMP assembly expects complex-standard coefficients; call to_complex()")
    rows = [HarmonicIndex(n, m) for m in sh.orders(n, d)]
    p = len(rows)
    M = np.zeros((p, p), dtype=complex)
    for label, _ in domain.boundaries:
        sign = 1.0 if label == "outer" else -1.0
        for idx, alpha in field.coefficients(label).items():
            if idx.l % 2 or idx.l > 2 * n or alpha == 0:
                continue
            weight = sign * alpha * emp_factor(domain, eigen, label, idx.l)
            for i, yi in enumerate(rows):
                for j, yj in enumerate(rows):
                    t = sh.triple_product(yi, yj, idx, d, method)
                    if t != 0:
                        M[i, j] += weight * t
    return M


def _wrap(eigen, M):
    herm = 0.5 * (M + M.conj().T)
    return EmpMatrix(eigen, M, np.linalg.eigvalsh(herm), float(np.trace(M).real))


def emp_matrix(domain, field, eigen, method="closed_form"):
    """EMP matrix of ``eigen`` under ``field``; rows/columns follow ``harmonics.orders(n, d)``."""
    field = field.to_complex()
    return _wrap(eigen, _emp_entries(domain, field, eigen, method))


def emp_matrix_closed_2d(domain, field, eigen):
    """Explicit 2x2 EMP matrices for the disk and the planar annulus."""
    if domain.d != 2:
        raise ValueError("closed 2D form needs d = 2")
    field = field.to_complex()
    n = eigen.degree
    if n == 0:
        total = 0.0
        for label, _ in domain.boundaries:
            sign = 1.0 if label == "outer" else -1.0
            total += sign * emp_factor(domain, eigen, label, 0) * field.alpha0(label)
        return _wrap(eigen, np.array([[total / math.sqrt(2 * math.pi)]], dtype=complex))
    M = np.zeros((2, 2), dtype=complex)
    for label, _ in domain.boundaries:
        c = field.coefficients(label)
        a0 = c.get(HarmonicIndex(0, 1), 0.0)
        a1 = c.get(HarmonicIndex(2 * n, 1), 0.0)
        a2 = c.get(HarmonicIndex(2 * n, 2), 0.0)
        diag = emp_factor(domain, eigen, label, 0)
        off = emp_factor(domain, eigen, label, 2 * n)
        block = np.array([[diag * a0, off * a2], [off * a1, diag * a0]])
        M += (1.0 if label == "outer" else -1.0) * block / math.sqrt(2 * math.pi)
    return _wrap(eigen, M)


def emp_trace_formula(domain, field, eigen):
    """Closed-form trace, valid in every dimension d >= 2.

    ``field`` is a DeformationField or, for any d, a mapping from boundary
    label to the constant coefficient alpha_{0,1} (the only one that matters).
    """
    if isinstance(field, DeformationField):
        field = {label: field.alpha0(label) for label, _ in domain.boundaries}
    total = 0.0
    for label, _ in domain.boundaries:
        sign = 1.0 if label == "outer" else -1.0
        total += sign * complex(field.get(label, 0.0)).real * emp_factor(domain, eigen, label, 0)
    return total * multiplicity(eigen.degree, domain.d) / math.sqrt(sphere_area(domain.d))


@dataclass(frozen=True)
class Classification:
    lo: float
    hi: float
    critical: bool
    trace_zero: bool
    zero_matrix: bool
    strict_saddle_pair: bool
    volume_preserving: Optional[bool] = None

    @property
    def subdifferential(self):
        return (self.lo, self.hi)

    @property
    def label(self):
        if not self.critical:
            return "NOT_CRITICAL"
        return "CRITICAL+STRICT_SADDLE_PAIR" if self.strict_saddle_pair else "CRITICAL"


def subdifferential_and_classify(M, zero_tol=ZERO_TOL, scale=1.0, field=None):
    """Subdifferential [min, max] of the EMP spectrum and the derived flags.

    ``zero_tol * max(1, scale)`` is the threshold for "M is the zero matrix"
    and for a vanishing trace; pass the field's coefficient scale as ``scale``.
    """
    tol = zero_tol * max(1.0, scale)
    lo, hi = float(M.eigenvalues[0]), float(M.eigenvalues[-1])
    zero = bool(np.max(np.abs(M.entries), initial=0.0) <= tol)
    trace_zero = abs(M.trace) <= tol * M.size
    critical = lo <= tol and hi >= -tol
    vp = None
    if field is not None:
        vp = all(field.volume_preserving(b, tol) for b in field.boundaries) if field.boundaries else True
    return Classification(lo, hi, critical, trace_zero, zero, trace_zero and not zero, vp)


def cancellation_coefficients(domain, eigen, seed):
    """Planar annulus field whose EMP matrix for ``eigen`` vanishes.

    ``seed`` maps order m in {1, 2} to the inner degree-2n coefficient. The
    outer coefficients are the seed scaled by A(r_i, 2n)/A(r_o, 2n).
    """
    if domain.kind != "annulus" or domain.d != 2:
        raise ValueError("cancellation needs a planar annulus")
    n = eigen.degree
    if n < 1:
        raise ValueError("cancellation needs degree n >= 1")
    a_out = emp_factor(domain, eigen, "outer", 2 * n)
    a_in = emp_factor(domain, eigen, "inner", 2 * n)
    if abs(a_out) < 1e-14:
        raise ZeroDivisionError("outer factor A(r_o, 2n) vanishes; ratio undefined")
    ratio = a_in / a_out
    inner = {HarmonicIndex(2 * n, m): complex(c) for m, c in seed.items() if c != 0}
    outer = {idx: c * ratio for idx, c in inner.items()}
    return DeformationField(2, {"outer": outer, "inner": inner}, "complex")
