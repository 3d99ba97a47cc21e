"""Spherical harmonics on S^1 and S^2, sphere quadrature and triple products.

Index conventions
-----------------
d = 2 : ``(0, 1)`` for the constant, ``(l, 1)`` and ``(l, 2)`` for l >= 1.
    complex variant  Y_l^m = exp(i (-1)^m l theta) / sqrt(2 pi)
    real variant     (l, 1) -> cos(l theta)/sqrt(pi), (l, 2) -> sin(l theta)/sqrt(pi)
d = 3 : ``(l, m)`` with -l <= m <= l.
    complex variant  Y_l^m = sqrt((2l+1)(l-m)!/(4 pi (l+m)!)) P_l^m(cos theta) e^{i m phi}
                     (Condon-Shortley phase inside P_l^m)
    real variant     m > 0: sqrt(2) (-1)^m Re Y_l^m,  m < 0: sqrt(2) (-1)^m Im Y_l^{|m|}

Angles are passed as a 1-D array of theta for d = 2 and as an (N, 2) array of
(theta, phi) pairs for d = 3.
"""

from dataclasses import dataclass
from typing import NamedTuple

import math

import numpy as np

from .wigner import wigner_3j

VARIANTS = ("complex", "real")


class HarmonicIndex(NamedTuple):
    l: int
    m: int


def multiplicity(l, d):
    """Dimension N_{l,d} of the degree-l spherical harmonics in R^d."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if l < 0:
        raise ValueError(f"degree must be >= 0, got {l}")
    if l == 0:
        return 1
    return (d + 2 * l - 2) * math.factorial(d + l - 3) // (math.factorial(l) * math.factorial(d - 2))


def sphere_area(d):
    """Surface area of the unit sphere S^{d-1}."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def _check_dim(d):
    if d not in (2, 3):
        raise ValueError(f"harmonic evaluation is implemented for d in (2, 3), got {d}")


def orders(l, d):
    _check_dim(d)
    if d == 2:
        return (1,) if l == 0 else (1, 2)
    return tuple(range(-l, l + 1))


def constant_index(d):
    """Index of the degree-0 harmonic 1/sqrt(omega_{d-1})."""
    return HarmonicIndex(0, 1) if d == 2 else HarmonicIndex(0, 0)


def harmonic_indices(lmax, d):
    """All indices with degree <= lmax, ordered by degree then order."""
    return [HarmonicIndex(l, m) for l in range(lmax + 1) for m in orders(l, d)]


def validate_index(idx, d):
    l, m = idx
    if l < 0 or m not in orders(l, d):
        raise ValueError(f"invalid harmonic index {tuple(idx)} for d={d}")


def _as_angles(angles, d):
    a = np.asarray(angles, dtype=float)
    if d == 2:
        return np.atleast_1d(a)
    a = np.atleast_2d(a)
    if a.shape[-1] != 2:
        raise ValueError("d=3 angles must be (theta, phi) pairs")
    return a


# ---------------------------------------------------------------------------
# Associated Legendre functions


def legendre_tables(lmax, theta):
    """Normalized associated Legendre functions and their theta-derivatives.

    Returns ``(P, P_over_sin, dP)``, each of shape (lmax+1, lmax+1, N) indexed
    [l, m] for 0 <= m <= l, such that Y_l^m = P[l, m] e^{i m phi}.
    ``P_over_sin[l, m]`` is P[l, m] / sin(theta) (finite at the poles for m >= 1,
    zero for m = 0) and ``dP[l, m]`` is dP[l, m]/dtheta.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.cos(theta)
    s = np.sin(theta)
    n = theta.size
    # reduced[l, m] = P[l, m] / sin^m; obeys the same three-term recurrence
    reduced = np.zeros((lmax + 1, lmax + 1, n))
    reduced[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, lmax + 1):
        reduced[m, m] = -math.sqrt((2 * m + 1) / (2 * m)) * reduced[m - 1, m - 1]
    for m in range(lmax):
        reduced[m + 1, m] = math.sqrt(2 * m + 3) * x * reduced[m, m]
    for m in range(lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            reduced[l, m] = a * (x * reduced[l - 1, m] - b * reduced[l - 2, m])

    P = np.zeros_like(reduced)
    P_over_sin = np.zeros_like(reduced)
    for m in range(lmax + 1):
        P[:, m] = reduced[:, m] * s**m
        if m >= 1:
            P_over_sin[:, m] = reduced[:, m] * s ** (m - 1)

    # ladder form of d/dtheta; P_l^{-1} = -P_l^1 for the m = 0 row
    dP = np.zeros_like(reduced)
    for l in range(1, lmax + 1):
        for m in range(l + 1):
            up = P[l, m + 1] if m + 1 <= l else 0.0
            down = -P[l, 1] if m == 0 else P[l, m - 1]
            dP[l, m] = 0.5 * (
                math.sqrt((l - m) * (l + m + 1)) * up - math.sqrt((l + m) * (l - m + 1)) * down
            )
    return P, P_over_sin, dP


# ---------------------------------------------------------------------------
# Real <-> complex basis change


def real_to_complex_matrix(l, d):
    """Unitary U with R = U @ Y over the orders of degree l (rows real, columns complex)."""
    _check_dim(d)
    if l == 0:
        return np.ones((1, 1), dtype=complex)
    r2 = 1.0 / math.sqrt(2.0)
    if d == 2:
        # cos = (Y1 + Y2)/sqrt2, sin = i (Y1 - Y2)/sqrt2
        return np.array([[r2, r2], [1j * r2, -1j * r2]], dtype=complex)
    ms = orders(l, d)
    pos = {m: k for k, m in enumerate(ms)}
    U = np.zeros((len(ms), len(ms)), dtype=complex)
    for row, m in enumerate(ms):
        if m == 0:
            U[row, pos[0]] = 1.0
        elif m > 0:
            U[row, pos[m]] = (-1) ** m * r2
            U[row, pos[-m]] = r2
        else:
            k = -m
            U[row, pos[-k]] = 1j * r2
            U[row, pos[k]] = -1j * (-1) ** k * r2
    return U


def coeff_conjugate_transform(coeffs, direction, d, tol=1e-12):
    """Re-express harmonic coefficients of a real function in the other basis variant.

    ``direction`` is ``"real->complex"`` or ``"complex->real"``. Complex input
    that does not describe a real-valued function raises ValueError.
    """
    if direction not in ("real->complex", "complex->real"):
        raise ValueError(f"unknown direction {direction!r}")
    by_degree = {}
    for idx, c in coeffs.items():
        idx = HarmonicIndex(*idx)
        validate_index(idx, d)
        by_degree.setdefault(idx.l, {})[idx.m] = complex(c)

    scale = max([abs(c) for c in coeffs.values()] + [1.0])
    out = {}
    for l in sorted(by_degree):
        ms = orders(l, d)
        vec = np.array([by_degree[l].get(m, 0.0) for m in ms], dtype=complex)
        U = real_to_complex_matrix(l, d)
        if direction == "real->complex":
            if np.max(np.abs(vec.imag)) > tol * scale:
                raise ValueError(f"real-basis coefficients of degree {l} must be real")
            new = U.T @ vec.real
        else:
            new = np.conj(U) @ vec
            if np.max(np.abs(new.imag)) > tol * scale:
                raise ValueError(
                    f"degree-{l} coefficients do not describe a real function "
                    f"(imaginary residue {np.max(np.abs(new.imag)):.3e})"
                )
            new = new.real.astype(complex)
        for m, c in zip(ms, new):
            if c != 0:
                out[HarmonicIndex(l, m)] = complex(c)
    return out


def reality_defect(coeffs, d):
    """Largest violation of the conjugation symmetry of complex coefficients."""
    worst = 0.0
    for (l, m), c in coeffs.items():
        if d == 2:
            partner = (l, 3 - m) if l > 0 else (0, 1)
            target = np.conj(coeffs.get(partner, 0.0))
        else:
            target = (-1) ** m * np.conj(coeffs.get((l, -m), 0.0))
        worst = max(worst, abs(c - target))
    return worst


# ---------------------------------------------------------------------------
# Evaluation


def harmonic_table(lmax, d, angles, variant="complex", gradient=False):
    """Evaluate every harmonic of degree <= lmax at the given angles.

    Returns an (N, n_harmonics) array in :func:`harmonic_indices` order. With
    ``gradient=True`` returns ``(Y, grad)`` where grad has shape
    (d-1, N, n_harmonics): for d=2 the theta-derivative, for d=3 the theta and
    (1/sin theta) phi components of the unit-sphere surface gradient.
    """
    _check_dim(d)
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    angles = _as_angles(angles, d)
    idxs = harmonic_indices(lmax, d)
    n = angles.shape[0]
    Y = np.zeros((n, len(idxs)), dtype=complex)
    G = np.zeros((d - 1, n, len(idxs)), dtype=complex)
    col = {idx: k for k, idx in enumerate(idxs)}

    if d == 2:
        theta = angles
        for (l, m), k in col.items():
            freq = (-1) ** m * l
            e = np.exp(1j * freq * theta) / math.sqrt(2 * math.pi)
            Y[:, k] = e
            G[0, :, k] = 1j * freq * e
    else:
        theta, phi = angles[:, 0], angles[:, 1]
        P, Ps, dP = legendre_tables(lmax, theta)
        for l in range(lmax + 1):
            for m in range(l + 1):
                e = np.exp(1j * m * phi)
                y, yt, yp = P[l, m] * e, dP[l, m] * e, 1j * m * Ps[l, m] * e
                Y[:, col[(l, m)]], G[0, :, col[(l, m)]], G[1, :, col[(l, m)]] = y, yt, yp
                if m > 0:
                    sgn = (-1) ** m
                    k = col[(l, -m)]
                    Y[:, k], G[0, :, k], G[1, :, k] = sgn * np.conj(y), sgn * np.conj(yt), sgn * np.conj(yp)

    if variant == "real":
        Yr = np.zeros((n, len(idxs)))
        Gr = np.zeros((d - 1, n, len(idxs)))
        start = 0
        for l in range(lmax + 1):
            w = len(orders(l, d))
            U = real_to_complex_matrix(l, d)
            sl = slice(start, start + w)
            Yr[:, sl] = (Y[:, sl] @ U.T).real
            Gr[:, :, sl] = (G[:, :, sl] @ U.T).real
            start += w
        Y, G = Yr, Gr

    return (Y, G) if gradient else Y


def eval_harmonic(idx, d, angles, variant="complex"):
    """Value of a single harmonic at one or more points."""
    idx = HarmonicIndex(*idx)
    validate_index(idx, d)
    table = harmonic_table(idx.l, d, angles, variant)
    k = harmonic_indices(idx.l, d).index(idx)
    out = table[:, k]
    return out[0] if np.ndim(angles) == (0 if d == 2 else 1) else out


def harmonic_gradient(idx, d, angles, variant="complex"):
    """Surface-gradient components of one harmonic, shape (d-1, N)."""
    idx = HarmonicIndex(*idx)
    validate_index(idx, d)
    _, grad = harmonic_table(idx.l, d, angles, variant, gradient=True)
    return grad[:, :, harmonic_indices(idx.l, d).index(idx)]


def expand(coeffs, d, angles, variant="complex", gradient=False):
    """Evaluate sum_c coeff * Y (and optionally its surface gradient)."""
    angles = _as_angles(angles, d)
    n = angles.shape[0]
    if not coeffs:
        zero = np.zeros(n, dtype=complex if variant == "complex" else float)
        return (zero, np.zeros((d - 1, n), dtype=zero.dtype)) if gradient else zero
    lmax = max(l for l, _ in coeffs)
    idxs = harmonic_indices(lmax, d)
    vec = np.zeros(len(idxs), dtype=complex)
    for idx, c in coeffs.items():
        validate_index(idx, d)
        vec[idxs.index(HarmonicIndex(*idx))] = c
    if variant == "real":
        vec = vec.real
    Y, G = harmonic_table(lmax, d, angles, variant, gradient=True)
    return (Y @ vec, G @ vec) if gradient else Y @ vec


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureRule:
    d: int
    nodes: np.ndarray
    weights: np.ndarray
    degree_bound: int

    def integrate(self, values):
        return np.tensordot(np.asarray(values), self.weights, axes=([-1], [0]))


def sphere_quadrature(d, degree_bound):
    """Product rule exact for band-limited integrands of total degree <= degree_bound.

    d=2: uniform trapezoid on 2D+2 nodes. d=3: Gauss-Legendre in cos(theta) on
    D+1 nodes times a uniform 2D+2 node rule in phi.
    """
    _check_dim(d)
    if degree_bound < 0:
        raise ValueError("degree bound must be nonnegative")
    n_phi = 2 * degree_bound + 2
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    if d == 2:
        return QuadratureRule(2, phi, np.full(n_phi, 2 * math.pi / n_phi), degree_bound)
    x, wx = np.polynomial.legendre.leggauss(degree_bound + 1)
    theta = np.arccos(x)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    w = np.outer(wx, np.full(n_phi, 2 * math.pi / n_phi))
    nodes = np.column_stack([tt.ravel(), pp.ravel()])
    return QuadratureRule(3, nodes, w.ravel(), degree_bound)


# ---------------------------------------------------------------------------
# Triple products


def _triple_closed(a, b, c, d):
    if d == 2:
        freq = lambda idx: (-1) ** idx.m * idx.l  # noqa: E731
        return 1 / math.sqrt(2 * math.pi) if freq(a) - freq(b) + freq(c) == 0 else 0.0
    (l1, m1), (l2, m2), (l3, m3) = a, b, c
    if m1 - m2 + m3 != 0 or (l1 + l2 + l3) % 2:
        return 0.0
    w0 = wigner_3j(l1, l2, l3, 0, 0, 0)
    if w0 == 0.0:
        return 0.0
    pref = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4 * math.pi))
    return (-1) ** m2 * pref * w0 * wigner_3j(l1, l2, l3, m1, -m2, m3)


def triple_product(a, b, c, d, method="closed_form"):
    """Integral over S^{d-1} of Y_a * conj(Y_b) * Y_c in the complex basis."""
    _check_dim(d)
    a, b, c = (HarmonicIndex(*i) for i in (a, b, c))
    for idx in (a, b, c):
        validate_index(idx, d)
    if method == "closed_form":
        return complex(_triple_closed(a, b, c, d))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    rule = sphere_quadrature(d, a.l + b.l + c.l)
    ya, yb, yc = (eval_harmonic(i, d, rule.nodes) for i in (a, b, c))
    return complex(rule.integrate(ya * np.conj(yb) * yc))
