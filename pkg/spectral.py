"""
Spectral analysis of traceless 4x4 dynamical matrices.

- depressed-quartic coefficients from traces and determinant
- closed-form quartic roots (resolvent cubic + two quadratics), Newton-polished
- dense 4x4 eigensolver (Hessenberg reduction + shifted QR with deflation)
- root clustering, geometric multiplicity and eigenvector-matrix determinants
- closed-form eigenvectors on the EL, EP4 and DL3 loci
"""

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config, get_logger, resolve
from errors import (
    GaugeUnavailableError,
    LocusPreconditionError,
    MalformedMatrixError,
    NumericalFailureError,
    ParameterError,
    SymmetryViolationError,
)
from model import TAU_X, ModelParams, ensure_matrix4, frobenius

logger = get_logger("spectral")

_EPS = float(np.finfo(float).eps)
_OMEGA = cmath.exp(2j * math.pi / 3.0)

# Search radius (times the root scale) for groups that may be a numerically split m-fold root.
_GROUP_RADIUS = {4: 1e-2, 3: 1e-4, 2: 1e-6}
_MULTIPLE_ROOT_TOL = 1e-9


# =========================
# Types
# =========================
@dataclass(frozen=True)
class Quartic:
    """p(lambda) = lambda^4 + q lambda^2 + r lambda + s."""
    q: float
    r: float
    s: float

    def __post_init__(self):
        for name in ("q", "r", "s"):
            val = getattr(self, name)
            if not isinstance(val, (int, float, np.floating, np.integer)) or not math.isfinite(val):
                raise ParameterError(f"Quartic coefficient {name}={val!r} must be a finite real")
            object.__setattr__(self, name, float(val))

    def __call__(self, lam: complex) -> complex:
        return ((lam * lam + self.q) * lam + self.r) * lam + self.s

    @property
    def root_scale(self) -> float:
        """Typical root magnitude: max(1, |q|^1/2, |r|^1/3, |s|^1/4)."""
        return max(1.0, abs(self.q) ** 0.5, abs(self.r) ** (1.0 / 3.0), abs(self.s) ** 0.25)

    @property
    def scale(self) -> float:
        """Quasi-homogeneous scale carried by q (squared root scale)."""
        return self.root_scale ** 2

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.q, self.r, self.s)

    def to_dict(self) -> Dict[str, float]:
        return {"q": self.q, "r": self.r, "s": self.s}


@dataclass(frozen=True)
class Cluster:
    members: Tuple[int, ...]
    mean: complex
    algebraic: int
    geometric: Optional[int] = None
    vectors: Tuple[np.ndarray, ...] = ()

    @property
    def defective(self) -> Optional[bool]:
        if self.geometric is None:
            return None
        return self.algebraic > self.geometric


@dataclass(frozen=True)
class Spectrum:
    roots: np.ndarray
    clusters: Tuple[Cluster, ...]
    from_matrix: bool = False

    @property
    def geometric_multiplicities(self) -> Optional[List[int]]:
        if not self.from_matrix:
            return None
        return [c.geometric for c in self.clusters]

    @property
    def defective(self) -> Optional[List[bool]]:
        if not self.from_matrix:
            return None
        return [bool(c.defective) for c in self.clusters]

    @property
    def multiplicities(self) -> List[int]:
        return [c.algebraic for c in self.clusters]

    def eigenpairs(self) -> List[Tuple[complex, np.ndarray]]:
        pairs = []
        for c in self.clusters:
            for v in c.vectors:
                pairs.append((c.mean, v))
        return pairs

    def eigenvector_matrix(self, gauge: str = "paper") -> np.ndarray:
        """Columns are eigenvectors, one per root counted with multiplicity.

        Defective clusters repeat their last eigenvector, so the matrix is
        singular exactly when some cluster is defective.
        """
        if not self.from_matrix:
            raise ParameterError("Eigenvectors are only available for spectra computed from a matrix")
        if gauge not in ("paper", "unit"):
            raise ParameterError(f"Unknown gauge {gauge!r}; expected 'paper' or 'unit'")

        ordered = sorted(self.clusters, key=lambda c: (-c.algebraic, c.members[0]))
        columns = []
        for c in ordered:
            vecs = [apply_gauge(v, gauge) for v in c.vectors]
            vecs.sort(key=lambda v: -_last_significant_index(v))
            vecs = vecs[:c.algebraic]
            while len(vecs) < c.algebraic:
                vecs.append(vecs[-1])
            columns.extend(vecs)
        return np.column_stack(columns)

    def to_dict(self) -> Dict:
        out = {
            "roots": [[float(z.real), float(z.imag)] for z in self.roots],
            "clusters": [list(c.members) for c in self.clusters],
            "means": [[float(c.mean.real), float(c.mean.imag)] for c in self.clusters],
            "multiplicities": [int(c.algebraic) for c in self.clusters],
        }
        if self.from_matrix:
            out["geometric_multiplicities"] = [int(c.geometric) for c in self.clusters]
            out["defective"] = [bool(c.defective) for c in self.clusters]
        return out


@dataclass(frozen=True)
class SpecialEigenvector:
    eigenvalue: complex
    vector: np.ndarray
    label: str = ""


# =========================
# Characteristic polynomial
# =========================
def char_poly_coeffs(E, cfg: Optional[Config] = None) -> Quartic:
    """(q, r, s) = (-Tr E^2 / 2, -Tr E^3 / 3, det E) of a traceless matrix."""
    cfg = resolve(cfg)
    tol = cfg.scaled("zero_tol")
    arr = ensure_matrix4(E)
    size = max(1.0, frobenius(arr))
    if abs(np.trace(arr)) > tol * size:
        raise MalformedMatrixError(f"Matrix is not traceless (trace {np.trace(arr)})")

    q, r, s = _complex_coeffs(arr)
    for name, val, deg in (("q", q, 2), ("r", r, 3), ("s", s, 4)):
        if abs(val.imag) > tol * size ** deg:
            raise SymmetryViolationError(
                f"Coefficient {name} has imaginary part {val.imag:.3e}; matrix is not particle-hole symmetric"
            )
    return Quartic(q.real, r.real, s.real)


def _complex_coeffs(arr: np.ndarray) -> Tuple[complex, complex, complex]:
    E2 = arr @ arr
    q = -0.5 * complex(np.trace(E2))
    r = -complex(np.trace(E2 @ arr)) / 3.0
    s = complex(np.linalg.det(arr))
    return q, r, s


# =========================
# Quartic roots
# =========================
def _taylor(q: complex, r: complex, s: complex, lam: complex, k: int) -> complex:
    """p^(k)(lam) / k! for the depressed quartic."""
    if k == 0:
        return ((lam * lam + q) * lam + r) * lam + s
    if k == 1:
        return (4.0 * lam * lam + 2.0 * q) * lam + r
    if k == 2:
        return 6.0 * lam * lam + q
    if k == 3:
        return 4.0 * lam
    return 1.0 + 0j


def _solve_quadratic(b: complex, c: complex) -> Tuple[complex, complex]:
    """Roots of x^2 + b x + c without cancellation."""
    disc = cmath.sqrt(b * b - 4.0 * c)
    lead = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
    if lead == 0:
        return 0j, 0j
    t = -lead / 2.0
    return t, c / t


def _solve_cubic(a: complex, b: complex, c: complex) -> List[complex]:
    """All roots of x^3 + a x^2 + b x + c (Cardano, then two Newton steps)."""
    p = b - a * a / 3.0
    qq = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    root = cmath.sqrt((qq / 2.0) ** 2 + (p / 3.0) ** 3)
    w = -qq / 2.0 + root
    if abs(-qq / 2.0 - root) > abs(w):
        w = -qq / 2.0 - root
    if w == 0:
        ys = [0j, 0j, 0j]
    else:
        C = w ** (1.0 / 3.0)
        ys = []
        for k in range(3):
            Ck = C * _OMEGA ** k
            ys.append(Ck - p / (3.0 * Ck))
    xs = []
    for y in ys:
        x = y - a / 3.0
        for _ in range(2):
            f = ((x + a) * x + b) * x + c
            df = (3.0 * x + 2.0 * a) * x + b
            if df == 0:
                break
            x_new = x - f / df
            if abs(((x_new + a) * x_new + b) * x_new + c) < abs(f):
                x = x_new
        xs.append(x)
    return xs


def _ferrari_seeds(q: complex, r: complex, s: complex) -> List[complex]:
    if r == 0:
        # biquadratic
        z1, z2 = _solve_quadratic(q, s)
        w1, w2 = cmath.sqrt(z1), cmath.sqrt(z2)
        return [w1, -w1, w2, -w2]

    # (lambda^2 + m)^2 = (2m - q) lambda^2 - r lambda + (m^2 - s)
    ms = _solve_cubic(-q / 2.0, -s, q * s / 2.0 - r * r / 8.0)
    m = max(ms, key=lambda z: abs(2.0 * z - q))
    R = cmath.sqrt(2.0 * m - q)
    if R == 0:
        z1, z2 = _solve_quadratic(q, s)
        w1, w2 = cmath.sqrt(z1), cmath.sqrt(z2)
        return [w1, -w1, w2, -w2]
    off = r / (2.0 * R)
    return list(_solve_quadratic(-R, m + off)) + list(_solve_quadratic(R, m - off))


def _newton_polish(q: complex, r: complex, s: complex, roots: List[complex], steps: int) -> List[complex]:
    out = []
    for lam in roots:
        f = _taylor(q, r, s, lam, 0)
        for _ in range(steps):
            if f == 0:
                break
            df = _taylor(q, r, s, lam, 1)
            if df == 0:
                break
            cand = lam - f / df
            f_cand = _taylor(q, r, s, cand, 0)
            if abs(f_cand) >= abs(f):
                break
            lam, f = cand, f_cand
        out.append(lam)
    return out


def refine_multiple_roots(roots: Sequence[complex], q: complex, r: complex, s: complex,
                          root_scale: float = 1.0, tol: float = _MULTIPLE_ROOT_TOL) -> List[complex]:
    """Collapse groups of roots that are numerically an m-fold root (m = 4, 3, 2).

    A candidate group is accepted when its mean, refined as the simple root of
    p^(m-1), makes p, ..., p^(m-1) vanish to `tol` in the quasi-homogeneous
    scale. Split multiple roots spread as eps^(1/m); the refined location is
    accurate to eps.
    """
    roots = [complex(z) for z in roots]
    fixed = set()
    scale = max(1.0, root_scale)
    for m in (4, 3, 2):
        while True:
            free = [i for i in range(len(roots)) if i not in fixed]
            if len(free) < m:
                break
            best = None
            for group in itertools.combinations(free, m):
                mean = sum(roots[i] for i in group) / m
                spread = max(abs(roots[i] - mean) for i in group)
                if best is None or spread < best[0]:
                    best = (spread, group, mean)
            spread, group, mu = best
            if spread > _GROUP_RADIUS[m] * scale:
                break
            for _ in range(8):
                num = _taylor(q, r, s, mu, m - 1)
                den = m * _taylor(q, r, s, mu, m)
                if num == 0 or den == 0:
                    break
                step = num / den
                mu = mu - step
                if abs(step) <= _EPS * max(1.0, abs(mu)):
                    break
            ok = all(abs(_taylor(q, r, s, mu, k)) <= tol * scale ** (4 - k) for k in range(m))
            if not ok:
                break
            for i in group:
                roots[i] = mu
                fixed.add(i)
    return roots


def _close_under_conjugation(roots: List[complex], real_tol: float) -> List[complex]:
    reals = [complex(z.real, 0.0) for z in roots if abs(z.imag) <= real_tol]
    upper = [z for z in roots if z.imag > real_tol]
    lower = [z for z in roots if z.imag < -real_tol]
    if len(upper) != len(lower):
        return roots
    out = list(reals)
    remaining = list(lower)
    for z in upper:
        j = min(range(len(remaining)), key=lambda k: abs(remaining[k].conjugate() - z))
        partner = remaining.pop(j).conjugate()
        avg = (z + partner) / 2.0
        out.extend([avg, avg.conjugate()])
    return out


def sort_roots(roots: Sequence[complex]) -> np.ndarray:
    return np.array(sorted((complex(z) for z in roots), key=lambda z: (z.real, z.imag)), dtype=complex)


def solve_depressed_quartic(c: Quartic, cfg: Optional[Config] = None) -> np.ndarray:
    """Four roots of lambda^4 + q lambda^2 + r lambda + s, sorted by (Re, Im)."""
    cfg = resolve(cfg)
    q, r, s = complex(c.q), complex(c.r), complex(c.s)
    scale = c.root_scale

    roots = _ferrari_seeds(q, r, s)
    roots = _newton_polish(q, r, s, roots, cfg.newton_polish_steps)
    roots = refine_multiple_roots(roots, q, r, s, scale, _MULTIPLE_ROOT_TOL * cfg.tol_scale)
    roots = _close_under_conjugation(roots, 1e-12 * scale)

    bound = cfg.scaled("zero_tol") * max(1.0, c.q ** 2, abs(c.r) ** (4.0 / 3.0), abs(c.s))
    worst = max(abs(c(z)) for z in roots)
    if worst > bound:
        logger.warning(f"Quartic {c.as_tuple()}: root residual {worst:.3e} exceeds {bound:.3e}")
    return sort_roots(roots)


# =========================
# Clustering
# =========================
def cluster_roots(roots: Sequence[complex], scale: Optional[float] = None,
                  cfg: Optional[Config] = None) -> List[Cluster]:
    """Single-linkage clusters of roots within cluster_radius * max(1, scale).

    Members index the input sequence; clusters come out in (Re, Im) order of
    their first member.
    """
    cfg = resolve(cfg)
    vals = [complex(z) for z in roots]
    if scale is None:
        scale = max([abs(z) for z in vals] + [1.0])
    radius = cfg.scaled("cluster_radius") * max(1.0, scale)

    order = sorted(range(len(vals)), key=lambda i: (vals[i].real, vals[i].imag))
    parent = list(range(len(vals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in itertools.combinations(range(len(vals)), 2):
        if abs(vals[a] - vals[b]) <= radius:
            parent[find(a)] = find(b)

    groups: Dict[int, List[int]] = {}
    for i in order:
        groups.setdefault(find(i), []).append(i)

    clusters = []
    for members in groups.values():
        mean = sum(vals[i] for i in members) / len(members)
        clusters.append(Cluster(members=tuple(members), mean=mean, algebraic=len(members)))
    clusters.sort(key=lambda cl: order.index(cl.members[0]))
    return clusters


# =========================
# Rank and null space
# =========================
def _pivoted_null_space(A: np.ndarray, tol: float) -> Tuple[int, List[np.ndarray]]:
    """Rank and null-space basis of A by fully pivoted elimination."""
    U = np.array(A, dtype=complex)
    n = U.shape[0]
    cols = list(range(n))
    rank = 0
    for k in range(n):
        sub = np.abs(U[k:, k:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] <= tol:
            break
        i += k
        j += k
        U[[k, i], :] = U[[i, k], :]
        U[:, [k, j]] = U[:, [j, k]]
        cols[k], cols[j] = cols[j], cols[k]
        for row in range(k + 1, n):
            f = U[row, k] / U[k, k]
            U[row, k:] -= f * U[k, k:]
        rank += 1

    basis = []
    for free in range(rank, n):
        x = np.zeros(n, dtype=complex)
        x[free] = 1.0
        for k in reversed(range(rank)):
            x[k] = -(U[k, k + 1:] @ x[k + 1:]) / U[k, k]
        v = np.zeros(n, dtype=complex)
        v[np.array(cols)] = x
        basis.append(v)
    return rank, basis


def geometric_multiplicity(E, lam: complex, cfg: Optional[Config] = None) -> int:
    """4 - rank(E - lam I), pivots below rank_tol * ||E|| counting as zero."""
    cfg = resolve(cfg)
    arr = ensure_matrix4(E)
    rank, _ = _pivoted_null_space(arr - lam * np.eye(4), cfg.scaled("rank_tol") * frobenius(arr))
    return 4 - rank


# =========================
# Dense eigensolver
# =========================
def _hessenberg(A: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
    return H


def _wilkinson_shift(B: np.ndarray) -> complex:
    a, b = B[-2, -2], B[-2, -1]
    c, d = B[-1, -2], B[-1, -1]
    half = (a - d) / 2.0
    disc = cmath.sqrt(half * half + b * c)
    mu1 = (a + d) / 2.0 + disc
    mu2 = (a + d) / 2.0 - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_eigenvalues(A: np.ndarray, max_sweeps: int) -> List[complex]:
    H = _hessenberg(A)
    n = H.shape[0]
    nrm = frobenius(H)
    eigs: List[complex] = [0j] * n
    hi = n - 1
    sweeps = 0
    stalled = 0

    def negligible(k: int) -> bool:
        sub = abs(H[k, k - 1])
        return sub <= _EPS * (abs(H[k - 1, k - 1]) + abs(H[k, k])) or sub <= _EPS * nrm

    while hi >= 0:
        if hi == 0 or negligible(hi):
            eigs[hi] = complex(H[hi, hi])
            if hi > 0:
                H[hi, hi - 1] = 0.0
            hi -= 1
            stalled = 0
            continue
        lo = hi - 1
        while lo > 0 and not negligible(lo):
            lo -= 1
        if lo > 0:
            H[lo, lo - 1] = 0.0

        sweeps += 1
        stalled += 1
        if sweeps > max_sweeps:
            raise NumericalFailureError(f"Shifted QR did not converge in {max_sweeps} sweeps")

        B = H[lo:hi + 1, lo:hi + 1]
        if stalled % 10 == 0:
            mu = B[-1, -1] + abs(B[-1, -2]) * (0.75 + 0.5j)
        else:
            mu = _wilkinson_shift(B)
        Q, R = np.linalg.qr(B - mu * np.eye(B.shape[0]))
        H[lo:hi + 1, lo:hi + 1] = R @ Q + mu * np.eye(B.shape[0])

    logger.debug(f"QR converged in {sweeps} sweeps")
    return eigs


def _inverse_iteration(arr: np.ndarray, lam: complex, v: np.ndarray, nrm: float) -> np.ndarray:
    shift = lam + 1e-13 * max(1.0, nrm)
    M = arr - shift * np.eye(4)
    for _ in range(2):
        try:
            x = np.linalg.solve(M, v)
        except np.linalg.LinAlgError:
            break
        size = np.linalg.norm(x)
        if not np.isfinite(size) or size == 0:
            break
        v = x / size
    return v


def eig4(E, cfg: Optional[Config] = None) -> Spectrum:
    """Eigenvalues, clusters, geometric multiplicities and eigenvectors of a 4x4 matrix."""
    cfg = resolve(cfg)
    arr = ensure_matrix4(E)
    nrm = frobenius(arr)

    vals = _qr_eigenvalues(arr, cfg.qr_max_sweeps)

    # refinement of split multiple eigenvalues works on the traceless part
    shift = complex(np.trace(arr)) / 4.0
    q, r, s = _complex_coeffs(arr - shift * np.eye(4))
    root_scale = max(1.0, abs(q) ** 0.5, abs(r) ** (1.0 / 3.0), abs(s) ** 0.25)
    shifted = refine_multiple_roots([z - shift for z in vals], q, r, s, root_scale,
                                    _MULTIPLE_ROOT_TOL * cfg.tol_scale)
    coeff_tol = cfg.scaled("zero_tol") * max(1.0, nrm) ** 4
    if abs(shift.imag) <= coeff_tol and max(abs(q.imag), abs(r.imag), abs(s.imag)) <= coeff_tol:
        shifted = _close_under_conjugation(shifted, 1e-12 * root_scale)
    roots = sort_roots([z + shift for z in shifted])

    rank_tol = cfg.scaled("rank_tol") * nrm
    clusters = []
    for cl in cluster_roots(roots, cfg=cfg):
        rank, basis = _pivoted_null_space(arr - cl.mean * np.eye(4), rank_tol)
        if not basis:
            _, _, vh = np.linalg.svd(arr - cl.mean * np.eye(4))
            basis = [vh[-1].conj()]
        basis = [v / np.linalg.norm(v) for v in basis]
        if len(basis) > cl.algebraic:
            logger.debug(f"Null space of dim {len(basis)} exceeds multiplicity {cl.algebraic}; truncating")
            basis = basis[:cl.algebraic]
        if cl.algebraic == 1:
            basis = [_inverse_iteration(arr, cl.mean, basis[0], nrm)]
        clusters.append(Cluster(members=cl.members, mean=cl.mean, algebraic=cl.algebraic,
                                geometric=len(basis), vectors=tuple(basis)))
    return Spectrum(roots=roots, clusters=tuple(clusters), from_matrix=True)


def spectrum_from_quartic(c: Quartic, cfg: Optional[Config] = None) -> Spectrum:
    roots = solve_depressed_quartic(c, cfg)
    return Spectrum(roots=roots, clusters=tuple(cluster_roots(roots, cfg=cfg)), from_matrix=False)


def match_roots(reference: Sequence[complex], roots: Sequence[complex]) -> Tuple[Tuple[int, ...], float]:
    """Assignment perm minimising sum |roots[perm[k]] - reference[k]| over all 4! orders."""
    ref = [complex(z) for z in reference]
    vals = [complex(z) for z in roots]
    best_perm, best_cost = None, math.inf
    for perm in itertools.permutations(range(len(vals))):
        cost = sum(abs(vals[perm[k]] - ref[k]) for k in range(len(ref)))
        if cost < best_cost:
            best_perm, best_cost = perm, cost
    return tuple(best_perm), best_cost


# =========================
# Gauges
# =========================
def _last_significant_index(v: np.ndarray, rel: float = 1e-10) -> int:
    size = np.linalg.norm(v)
    for k in reversed(range(len(v))):
        if abs(v[k]) > rel * size:
            return k
    return -1


def _paper_component(v: np.ndarray, size: float, vanish: float = 1e-8, reliable: float = 1e-6) -> int:
    """Index the closed-form eigenvectors normalise on.

    a2^dag (index 3) whenever the vector reaches it. Decoupled vectors without
    it use a1^dag (index 2) in the mode-1 plane and a2 (index 1) in the mode-2
    plane. Anything else has no normalising component.
    """
    mags = np.abs(v) / size
    if mags[3] > reliable:
        return 3
    if mags[3] > vanish:
        raise GaugeUnavailableError(
            f"Component 4 is {mags[3]:.2e} of the norm, too small to fix the gauge reliably")
    if mags[1] <= vanish and mags[2] > reliable:
        return 2
    if mags[0] <= vanish and mags[2] <= vanish and mags[1] > reliable:
        return 1
    raise GaugeUnavailableError(
        "Component 4 vanishes on a vector that is not confined to one mode; no normalising component")


def apply_gauge(v: np.ndarray, gauge: str) -> np.ndarray:
    """'paper': the component the closed forms set to 1. 'unit': unit norm, first component real positive."""
    v = np.asarray(v, dtype=complex)
    size = np.linalg.norm(v)
    if size == 0:
        raise GaugeUnavailableError("Zero vector has no gauge")
    if gauge == "unit":
        k = len(v) - 1 - _last_significant_index(v[::-1])
        phase = v[k] / abs(v[k])
        return v / (size * phase)
    if gauge == "paper":
        k = _paper_component(v, size)
        return v / v[k]
    raise ParameterError(f"Unknown gauge {gauge!r}")


def eigenvector_matrix_det(E, gauge: str = "paper", cfg: Optional[Config] = None) -> complex:
    spec = eig4(E, cfg)
    return complex(np.linalg.det(spec.eigenvector_matrix(gauge)))


def conjugate_partner_residual(v: np.ndarray) -> float:
    """min over eta of ||v - eta tau_x v*|| / ||v||."""
    v = np.asarray(v, dtype=complex)
    w = TAU_X @ v.conj()
    ww = np.vdot(w, w)
    if ww == 0:
        return 0.0
    eta = np.vdot(w, v) / ww
    return float(np.linalg.norm(v - eta * w) / np.linalg.norm(v))


# =========================
# Closed forms on special loci
# =========================
def _locus_scale(p: ModelParams) -> float:
    return max(1.0, p.g, p.xi_1, abs(p.gamma_minus), abs(p.delta_omega_1))


def _check_simple(p: ModelParams, tol: float) -> None:
    if p.chi != 0.0 or p.xi_2 != 0.0:
        raise LocusPreconditionError("Closed-form eigenvectors need chi = xi_2 = 0")
    if abs(p.delta_omega_2) > tol:
        raise LocusPreconditionError("Closed-form eigenvectors need delta_omega_2 = 0")


def special_eigenvectors(locus: str, params: ModelParams,
                         cfg: Optional[Config] = None) -> List[SpecialEigenvector]:
    """Analytic eigenvectors on EL, EP4 or DL3, in the gauge with a unit normalising component."""
    cfg = resolve(cfg)
    p = params
    S = _locus_scale(p)
    tol = cfg.scaled("zero_tol") * S
    tol2 = cfg.scaled("zero_tol") * S * S
    _check_simple(p, tol)

    gm, g, xi, w1, u = p.gamma_minus, p.g, p.xi_1, p.delta_omega_1, p.u
    e1 = cmath.exp(1j * (p.phi_g - p.phi_1))
    e2 = cmath.exp(1j * (2.0 * p.phi_g - p.phi_1))
    e3 = cmath.exp(1j * p.phi_g)
    em = cmath.exp(-1j * p.phi_1)
    locus = locus.upper()

    if locus == "EL":
        if abs(u) <= tol2 and g > tol:
            root = cmath.sqrt(16.0 * g * g - gm * gm)
            r12 = np.array([-e1 * (1j * gm + root) / (4.0 * g), -1j * e2,
                            e3 * (gm - 1j * root) / (4.0 * g), 1.0], dtype=complex)
            r34 = np.array([e1 * (-1j * gm + root) / (4.0 * g), -1j * e2,
                            e3 * (gm + 1j * root) / (4.0 * g), 1.0], dtype=complex)
            lam = 1j * root / 4.0
            return [SpecialEigenvector(lam, r12, "R1,2"), SpecialEigenvector(-lam, r34, "R3,4")]
        if abs(gm) <= tol and abs(u - 4.0 * g * g) <= tol2 and xi > tol:
            # sqrt(xi^2 - 4 g^2) = |delta_omega_1|; the sign of delta_omega_1 is kept
            root = w1
            r12 = np.array([-e1 * (2.0 * g + 1j * root) / xi, -e2 * (2.0 * g + 1j * root) / xi,
                            e3, 1.0], dtype=complex)
            r34 = np.array([e1 * (-2.0 * g + 1j * root) / xi, e2 * (2.0 * g - 1j * root) / xi,
                            -e3, 1.0], dtype=complex)
            return [SpecialEigenvector(complex(-g), r12, "R1,2"), SpecialEigenvector(complex(g), r34, "R3,4")]
        raise LocusPreconditionError(
            "EL needs u = xi_1^2 - delta_omega_1^2 = 0 with g != 0, or gamma_minus = 0 with u = 4 g^2"
        )

    if locus == "EP4":
        if abs(u) > tol2:
            raise LocusPreconditionError(f"EP4 needs u = 0 (u = {u:.3e})")
        if g > tol:
            if abs(gm - 4.0 * g) <= tol:
                sign = 1.0
            elif abs(gm + 4.0 * g) <= tol:
                sign = -1.0
            else:
                raise LocusPreconditionError("EP4 needs gamma_minus = +-4 g")
            vec = np.array([-sign * 1j * e1, -1j * e2, sign * e3, 1.0], dtype=complex)
            return [SpecialEigenvector(0j, vec.copy(), f"R{k}") for k in range(1, 5)]
        if abs(gm) > tol:
            raise LocusPreconditionError("EP4 at g = 0 needs gamma_minus = 0")
        return [
            SpecialEigenvector(0j, np.array([0, 0, 0, 1], dtype=complex), "R1"),
            SpecialEigenvector(0j, np.array([-1j * em, 0, 1, 0], dtype=complex), "R2"),
            SpecialEigenvector(0j, np.array([0, 1, 0, 0], dtype=complex), "R3"),
            SpecialEigenvector(0j, np.array([0, 1, 0, 0], dtype=complex), "R4"),
        ]

    if locus == "DL3":
        if g > tol:
            raise LocusPreconditionError("DL3 needs g = 0")
        if abs(u - gm * gm / 4.0) > tol2:
            raise LocusPreconditionError("DL3 needs u = gamma_minus^2 / 4")
        if xi <= tol or abs(gm) <= tol:
            raise LocusPreconditionError("DL3 needs xi_1 != 0 and gamma_minus != 0")
        # sqrt(4 xi_1^2 - gamma_minus^2) = 2 |delta_omega_1|; the sign of delta_omega_1 is kept
        root = 2.0 * w1
        triple = complex(gm / 4.0)
        return [
            SpecialEigenvector(triple, np.array([0, 0, 0, 1], dtype=complex), "R1"),
            SpecialEigenvector(triple, np.array([em * (gm - 1j * root) / (2.0 * xi), 0, 1, 0], dtype=complex), "R2"),
            SpecialEigenvector(triple, np.array([0, 1, 0, 0], dtype=complex), "R3"),
            SpecialEigenvector(complex(-3.0 * gm / 4.0),
                               np.array([-em * (gm + 1j * root) / (2.0 * xi), 0, 1, 0], dtype=complex), "R4"),
        ]

    raise ParameterError(f"Unknown locus {locus!r}; expected EL, EP4 or DL3")
