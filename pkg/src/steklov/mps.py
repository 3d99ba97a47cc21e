"""Method of particular solutions for radially perturbed balls and annuli.

The trial space is spanned by solid harmonics (regular r^l Y, and for annuli
singular r^-(d+l-2) Y plus log r in the plane). Requiring d_n u = sigma u at
collocation points on every boundary gives rectangular systems A a = sigma B a,
which are solved in the normal-equation form B^T A a = sigma B^T B a.

Perturbed boundaries are R(theta) = r + t * V_r(theta), with V_r the radial
velocity carried by the deformation field for that boundary sphere.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import logging
import math
import warnings

import numpy as np
from scipy import linalg

from . import harmonics as sh
from .harmonics import multiplicity

log = logging.getLogger(__name__)

DEFAULT_T_GRID = tuple([-0.002 * k for k in range(10, 0, -1)] + [0.0] + [0.002 * k for k in range(1, 11)])
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


class MpsError(RuntimeError):
    """Numerical failure of the particular-solutions solver."""


class WindowConflict(MpsError):
    """Branch cluster of an eigenvalue is not separated from its neighbours."""


@dataclass(frozen=True)
class MpsConfig:
    L: int = 7
    K_o: Optional[int] = None
    K_i: Optional[int] = None
    t_grid: Tuple[float, ...] = DEFAULT_T_GRID
    count: int = 20
    cutoff: float = 1e-12
    oversampling: float = 2.0
    points: str = "fibonacci"

    def resolve(self, domain):
        """Fill missing point counts and check oversampling for ``domain``."""
        per_boundary = sum(multiplicity(l, domain.d) for l in range(self.L + 1))
        default = int(math.ceil(self.oversampling * per_boundary))
        K_o = self.K_o or default
        K_i = (self.K_i or default) if domain.kind == "annulus" else None
        for name, K in (("K_o", K_o), ("K_i", K_i)):
            if K is None:
                continue
            if K < per_boundary:
                raise ValueError(
                    f"{name}={K} is below the {per_boundary} ansatz coefficients per boundary"
                )
            if K < 2 * per_boundary:
                warnings.warn(
                    f"{name}={K} oversamples the {per_boundary} coefficients per boundary "
                    f"by only {K / per_boundary:.2f}x",
                    stacklevel=2,
                )
        if 0.0 not in self.t_grid:
            raise ValueError("t_grid must contain 0")
        return replace(self, K_o=K_o, K_i=K_i)


# Reference collocation setup; under-oversampled for annuli, so resolve() warns.
REFERENCE_PRESET = MpsConfig(L=7, K_o=28, K_i=20)


def collocation_points(d, K, method="fibonacci"):
    """K reproducible points on the unit sphere S^{d-1}.

    d=2: equally spaced angles. d=3: ``"fibonacci"`` spiral (exactly K points,
    equal-area bands in cos theta) or ``"deserno"`` regular equal-area
    placement (approximately K points).
    """
    if K < 1:
        raise ValueError("need at least one point")
    if d == 2:
        return 2 * math.pi * np.arange(K) / K
    if d != 3:
        raise ValueError(f"collocation implemented for d in (2, 3), got {d}")
    if method == "fibonacci":
        k = np.arange(K)
        z = 1.0 - (2 * k + 1) / K
        theta = np.arccos(z)
        phi = np.mod(k * GOLDEN_ANGLE, 2 * math.pi)
        return np.column_stack([theta, phi])
    if method == "deserno":
        area = 4 * math.pi / K
        step = math.sqrt(area)
        n_theta = max(1, round(math.pi / step))
        d_theta = math.pi / n_theta
        d_phi = area / d_theta
        pts = []
        for i in range(n_theta):
            th = math.pi * (i + 0.5) / n_theta
            n_phi = max(1, round(2 * math.pi * math.sin(th) / d_phi))
            for j in range(n_phi):
                pts.append((th, 2 * math.pi * j / n_phi))
        return np.array(pts)
    raise ValueError(f"unknown point method {method!r}")


def _frame(d, angles):
    """Radial unit vector and tangent frame (theta-hat[, phi-hat]) in Cartesian form."""
    if d == 2:
        th = angles
        rhat = np.column_stack([np.cos(th), np.sin(th)])
        return rhat, [np.column_stack([-np.sin(th), np.cos(th)])]
    th, ph = angles[:, 0], angles[:, 1]
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    rhat = np.column_stack([st * cp, st * sp, ct])
    that = np.column_stack([ct * cp, ct * sp, -st])
    phat = np.column_stack([-sp, cp, np.zeros_like(sp)])
    return rhat, [that, phat]


def cartesian_to_angles(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.linalg.norm(x, axis=1)
    phi = np.mod(np.arctan2(x[:, 1], x[:, 0]), 2 * math.pi)
    if x.shape[1] == 2:
        return r, phi
    return r, np.column_stack([np.arccos(np.clip(x[:, 2] / r, -1, 1)), phi])


@dataclass
class BoundaryGeometry:
    """Perturbed boundary points in spherical form with outward unit normals."""

    d: int
    angles: np.ndarray
    R: np.ndarray
    n_r: np.ndarray
    n_tan: np.ndarray  # (d-1, N) components along theta-hat (, phi-hat)

    def cartesian(self):
        rhat, tangents = _frame(self.d, self.angles)
        x = self.R[:, None] * rhat
        n = self.n_r[:, None] * rhat
        for comp, tvec in zip(self.n_tan, tangents):
            n = n + comp[:, None] * tvec
        return x, n


def _geometry(d, angles, r, V, gradV, t, inner):
    R = r + t * V
    if np.any(R <= 0):
        raise MpsError(f"perturbed radius not positive at t={t}")
    tang = -(t * gradV) / R
    norm = np.sqrt(1.0 + np.sum(tang**2, axis=0))
    sign = -1.0 if inner else 1.0
    return BoundaryGeometry(d, angles, R, sign / norm, sign * tang / norm)


def perturbed_boundary(domain, field, t, boundary, angles):
    """Radii R = r + t V_r and outward unit normals at the given angles."""
    r = domain.r_o if boundary == "outer" else domain.r_i
    if r is None:
        raise ValueError(f"domain has no {boundary} boundary")
    V, gradV = field.evaluate(boundary, angles, gradient=True)
    return _geometry(domain.d, angles, r, np.asarray(V, float), np.asarray(gradV, float), t, boundary == "inner")


def _radial_terms(domain, L):
    """(degree, kind) per harmonic block; kind in {'reg', 'sing', 'log'}."""
    terms = [(l, "reg") for l in range(L + 1)]
    if domain.kind == "annulus":
        terms += [(l, "log" if (l == 0 and domain.d == 2) else "sing") for l in range(L + 1)]
    return terms


def _radial(kind, l, d, R):
    if kind == "reg":
        return R**l, (l * R ** (l - 1) if l > 0 else np.zeros_like(R))
    if kind == "log":
        return np.log(R), 1.0 / R
    p = d + l - 2
    return R ** (-p), -p * R ** (-p - 1)


def column_labels(domain, L):
    out = []
    for l, kind in _radial_terms(domain, L):
        out += [(kind, l, m) for m in sh.orders(l, domain.d)]
    return out


class _Collocation:
    """t-independent data: points, harmonic tables and field samples per boundary."""

    def __init__(self, domain, field, config):
        self.domain, self.config = domain, config
        d = domain.d
        self.blocks = []
        for label, r in domain.boundaries:
            K = config.K_o if label == "outer" else config.K_i
            angles = collocation_points(d, K, config.points)
            Y, G = sh.harmonic_table(config.L, d, angles, "real", gradient=True)
            V, gradV = field.evaluate(label, angles, gradient=True)
            self.blocks.append((label, r, angles, Y, G, np.asarray(V, float), np.asarray(gradV, float)))
        self.terms = _radial_terms(domain, config.L)

    def geometries(self, t):
        return [
            (label, _geometry(self.domain.d, angles, r, V, gradV, t, label == "inner"), Y, G)
            for label, r, angles, Y, G, V, gradV in self.blocks
        ]

    def system(self, t):
        d = self.domain.d
        geos = self.geometries(t)
        if self.domain.kind == "annulus":
            outer = geos[0][1].R.min()
            inner = geos[1][1].R.max()
            if inner >= outer:
                raise MpsError(f"annulus boundaries cross at t={t}")
        A_rows, B_rows = [], []
        for _, geo, Y, G in geos:
            A_cols, B_cols = [], []
            start = 0
            offsets = []
            for l in range(self.config.L + 1):
                w = multiplicity(l, d)
                offsets.append((start, start + w))
                start += w
            grad_n = np.einsum("kn,knh->nh", geo.n_tan, G)
            for l, kind in self.terms:
                a, b = offsets[l]
                g, dg = _radial(kind, l, d, geo.R)
                B_cols.append(g[:, None] * Y[:, a:b])
                A_cols.append((dg * geo.n_r)[:, None] * Y[:, a:b] + (g / geo.R)[:, None] * grad_n[:, a:b])
            A_rows.append(np.hstack(A_cols))
            B_rows.append(np.hstack(B_cols))
        return np.vstack(A_rows), np.vstack(B_rows), geos


def assemble_system(domain, field, t, config):
    """Collocation matrices (A, B): normal derivatives and values of every trial function."""
    if field.d != domain.d:
        raise ValueError("field and domain dimensions differ")
    config = config.resolve(domain)
    A, B, _ = _Collocation(domain, field, config).system(t)
    return A, B


@dataclass
class MpsSolution:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    rank: int
    max_imag: float
    unresolved: np.ndarray
    gram_condition: float = 1.0


def solve_steklov(A, B, cutoff=1e-12, resolved_limit=None):
    """Eigenvalues of B^T A a = sigma B^T B a on the numerically nonsingular subspace.

    Columns are equilibrated first; directions of B^T B with eigenvalue below
    ``cutoff`` times the largest are discarded.
    """
    if A.shape != B.shape:
        raise ValueError(f"A {A.shape} and B {B.shape} differ in shape")
    norms = np.linalg.norm(B, axis=0)
    norms[norms == 0] = 1.0
    scale = 1.0 / norms
    As, Bs = A * scale, B * scale
    gram = Bs.T @ Bs
    w, Q = linalg.eigh(gram)
    keep = w > cutoff * w[-1]
    if not np.any(keep):
        raise MpsError("B^T B has no retained directions; the system is under-resolved")
    W = Q[:, keep] / np.sqrt(w[keep])
    C = W.T @ (Bs.T @ As) @ W
    vals, vecs = linalg.eig(C)
    order = np.argsort(vals.real, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    coeffs = scale[:, None] * (W @ vecs)
    real = vals.real
    unresolved = np.zeros(real.shape, bool) if resolved_limit is None else real >= resolved_limit
    cond = float(w[-1] / w[keep][0])
    return MpsSolution(real, coeffs, int(keep.sum()), float(np.max(np.abs(vals.imag), initial=0.0)),
                       unresolved, cond)


@dataclass
class BranchData:
    t: np.ndarray
    values: np.ndarray  # (len(t), count); row i holds sigma_0..sigma_{count-1} of Omega_{t_i}
    diagnostics: List[dict] = field(default_factory=list)

    @property
    def count(self):
        return self.values.shape[1]

    def column(self, t):
        hits = np.flatnonzero(self.t == t)
        if hits.size == 0:
            raise KeyError(t)
        return self.values[hits[0]]


def branch_sweep(domain, field, config):
    """Lowest ``config.count`` eigenvalues of Omega_t for every t in the grid."""
    config = config.resolve(domain)
    colloc = _Collocation(domain, field, config)
    rows, diags = [], []
    for t in config.t_grid:
        try:
            A, B, geos = colloc.system(t)
            r_min = min(g.R.min() for _, g, _, _ in geos)
            limit = config.L / r_min * (1 + 1e-9)
            sol = solve_steklov(A, B, config.cutoff, limit)
        except (MpsError, linalg.LinAlgError) as exc:
            raise MpsError(f"solve failed at t={t}: {exc}") from exc
        if sol.eigenvalues.size < config.count:
            raise MpsError(f"only {sol.eigenvalues.size} eigenvalues at t={t}, need {config.count}")
        vals = sol.eigenvalues[: config.count]
        rows.append(vals)
        diags.append({
            "t": float(t),
            "rank": sol.rank,
            "max_imag": sol.max_imag,
            "unresolved": int(sol.unresolved[: config.count].sum()),
            "gram_condition": sol.gram_condition,
        })
    flagged = [g["t"] for g in diags if g["unresolved"]]
    if flagged:
        log.warning("%d of %d grid points report eigenvalues above the resolved range L/r_min",
                    len(flagged), len(diags))
    return BranchData(np.asarray(config.t_grid, float), np.vstack(rows), diags)


@dataclass
class Slopes:
    right: np.ndarray
    left: np.ndarray
    window: Tuple[int, int]
    gap: float
    movement: float


def _one_sided(f0, f1, f2, h1, h2):
    """Second-order derivative at 0 from samples at 0, h1, h2 (h may be negative)."""
    c0 = -(h1 + h2) / (h1 * h2)
    c1 = h2 / (h1 * (h2 - h1))
    c2 = -h1 / (h2 * (h2 - h1))
    return c0 * f0 + c1 * f1 + c2 * f2


def slopes_at_zero(branches, eigen, gap_factor=10.0):
    """One-sided slopes at t=0 of the branches belonging to ``eigen``.

    The window is rows ``eigen.index .. eigen.index + multiplicity - 1``. The
    cluster must stay separated from its neighbours by more than
    ``gap_factor`` times its movement over the stencil points.
    """
    t = branches.t
    pos = np.sort(t[t > 0])
    neg = np.sort(t[t < 0])[::-1]
    if pos.size < 2 or neg.size < 2:
        raise ValueError("need two grid points on each side of t=0")
    lo, hi = eigen.index, eigen.index + eigen.multiplicity
    if hi > branches.count:
        raise ValueError(f"branch window {lo}..{hi - 1} exceeds the {branches.count} computed branches")

    cols = {s: branches.column(s) for s in (0.0, pos[0], pos[1], neg[0], neg[1])}
    f0 = cols[0.0][lo:hi]
    right = _one_sided(f0, cols[pos[0]][lo:hi], cols[pos[1]][lo:hi], pos[0], pos[1])
    left = _one_sided(f0, cols[neg[0]][lo:hi], cols[neg[1]][lo:hi], neg[0], neg[1])

    stencil = np.vstack([c[lo:hi] for c in cols.values()])
    movement = float(np.max(np.abs(stencil - f0)))
    gaps = []
    for s, c in cols.items():
        if lo > 0:
            gaps.append(c[lo] - c[lo - 1])
        if hi < branches.count:
            gaps.append(c[hi] - c[hi - 1])
    gap = float(min(gaps)) if gaps else math.inf
    if gap <= gap_factor * movement:
        raise WindowConflict(
            f"branches {lo}..{hi - 1}: neighbour gap {gap:.3e} <= {gap_factor} x movement {movement:.3e}"
        )
    return Slopes(np.sort(right), np.sort(left), (lo, hi - 1), gap, movement)
