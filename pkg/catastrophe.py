"""
Control-space analysis of the depressed quartic: discriminant, cubic
resolvent, degeneracy classification and swallowtail surface sampling.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config, get_logger, resolve
from errors import ArgumentError, InputMismatchError, ParameterError
from model import ModelParams, traceless_matrix
from spectral import Quartic, Spectrum, char_poly_coeffs, eig4, spectrum_from_quartic

logger = get_logger("catastrophe")


class Kind(str, Enum):
    REGULAR = "Regular"
    S1 = "S1"
    S2 = "S2"
    EL_MINUS = "ELminus"
    EL_PLUS = "ELplus"
    DL3 = "DL3"
    EP4 = "EP4"


class Defectiveness(str, Enum):
    NOT_APPLICABLE = "NotApplicable"
    DIABOLICAL = "Diabolical"
    EXCEPTIONAL = "Exceptional"
    MIXED = "Mixed"
    UNKNOWN = "Unknown"


PARAMETRIC_MODES = ("double-real", "double-complex", "g-zero-diabolical", "g-offset-exceptional")

# Default axis ranges for each parametric mode
DEFAULT_RANGES = {
    "double-real": {"a": (-1.0, 1.0), "c": (-1.0, 1.0)},
    "double-complex": {"a": (-1.0, 1.0), "b": (0.0, 1.0)},
    "g-zero-diabolical": {"u": (-5.0, 5.0), "gamma_minus": (-5.0, 5.0)},
    "g-offset-exceptional": {"u": (0.0, 5.0), "gamma_minus": (-5.0, 5.0)},
}


# =========================
# Polynomials in (q, r, s)
# =========================
def discriminant(c: Quartic) -> float:
    """D = 256 s^3 - 128 q^2 s^2 + (16 q^4 + 144 q r^2) s - 4 q^3 r^2 - 27 r^4."""
    q, r, s = c.q, c.r, c.s
    q2 = q * q
    r2 = r * r
    return ((256.0 * s - 128.0 * q2) * s + (16.0 * q2 * q2 + 144.0 * q * r2)) * s - (4.0 * q2 * q + 27.0 * r2) * r2


def cubic_resolvent(c: Quartic) -> float:
    return c.q * (8.0 * c.s - 2.0 * c.q * c.q) - 9.0 * c.r * c.r


def discriminant_from_roots(roots: Sequence[complex]) -> float:
    """prod_{i<j} (lambda_i - lambda_j)^2, real part."""
    vals = [complex(z) for z in roots]
    out = 1.0 + 0j
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            d = vals[i] - vals[j]
            out *= d * d
    return float(out.real)


def resolvent_from_params(params: ModelParams) -> float:
    """Cubic resolvent of the simple model at delta_omega_2 = 0.

    L = (u / 8) [128 g^4 + (gamma_minus^2 - 4u)^2 - 24 g^2 (gamma_minus^2 + 4u)]
    """
    if not params.is_simple or params.delta_omega_2 != 0.0:
        raise ParameterError("Resolvent closed form needs chi = xi_2 = delta_omega_2 = 0")
    g2 = params.g ** 2
    gm2 = params.gamma_minus ** 2
    u = params.u
    return u * (128.0 * g2 * g2 + (gm2 - 4.0 * u) ** 2 - 24.0 * g2 * (gm2 + 4.0 * u)) / 8.0


def table_point(kind: str, gamma_minus: float = 0.0, g: float = 0.0) -> Quartic:
    """Control-space point of a named stratum at delta_omega_2 = 0.

    kind: EL-I (u = 0; EL+ or EL- depending on the sign of q), EL-II
    (gamma_minus = 0, u = 4 g^2), DL3 (g = 0, u = gamma_minus^2 / 4) or EP4.
    """
    key = kind.upper()
    if key == "EL-I":
        q = 2.0 * g * g - gamma_minus ** 2 / 8.0
        return Quartic(q, 0.0, (g * g - gamma_minus ** 2 / 16.0) ** 2)
    if key == "EL-II":
        return Quartic(-2.0 * g * g, 0.0, g ** 4)
    if key == "DL3":
        gm = gamma_minus
        return Quartic(-3.0 * gm ** 2 / 8.0, gm ** 3 / 8.0, -3.0 * gm ** 4 / 256.0)
    if key == "EP4":
        return Quartic(0.0, 0.0, 0.0)
    raise ArgumentError(f"Unknown stratum {kind!r}; expected EL-I, EL-II, DL3 or EP4")


# =========================
# Classification
# =========================
@dataclass(frozen=True)
class DegeneracyClass:
    kind: Kind
    defectiveness: Defectiveness
    witnesses: Dict[str, Any]
    spectrum: Spectrum

    @property
    def boundary(self) -> bool:
        return bool(self.witnesses.get("boundary", False))

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "kind": self.kind.value,
            "defectiveness": self.defectiveness.value,
            "witnesses": dict(self.witnesses),
        }
        out.update(self.spectrum.to_dict())
        return out


def _thresholds(scale: float, tol: float) -> Dict[str, float]:
    # q ~ scale, r ~ scale^(3/2), L ~ scale^3, D ~ scale^6
    # eps_r carries the weight of r (scale^1.5), not tol * scale
    return {
        "eps_D": tol * scale ** 6,
        "eps_L": tol * scale ** 3,
        "eps_q": tol * scale,
        "eps_r": tol * scale ** 1.5,
    }


def _near(value: float, eps: float) -> bool:
    return eps / 10.0 < abs(value) <= eps * 10.0


def _count_real_roots(spec: Spectrum, tol: float) -> int:
    return sum(cl.algebraic for cl in spec.clusters if abs(cl.mean.imag) <= tol)


def _defectiveness(spec: Spectrum) -> Defectiveness:
    degenerate = [cl for cl in spec.clusters if cl.algebraic > 1]
    if not degenerate:
        return Defectiveness.NOT_APPLICABLE
    states = set()
    for cl in degenerate:
        if cl.geometric == cl.algebraic:
            states.add("diabolical")
        elif cl.geometric == 1:
            states.add("exceptional")
        else:
            states.add("partial")
    if states == {"diabolical"}:
        return Defectiveness.DIABOLICAL
    if states == {"exceptional"}:
        return Defectiveness.EXCEPTIONAL
    return Defectiveness.MIXED


def check_consistent(c: Quartic, E, cfg: Optional[Config] = None) -> Quartic:
    """Raise InputMismatchError unless E's characteristic polynomial is c."""
    cfg = resolve(cfg)
    from_matrix = char_poly_coeffs(E, cfg)
    scale = max(c.scale, from_matrix.scale)
    tol = cfg.scaled("mismatch_tol")
    diffs = (
        abs(from_matrix.q - c.q) / scale,
        abs(from_matrix.r - c.r) / scale ** 1.5,
        abs(from_matrix.s - c.s) / scale ** 2,
    )
    if max(diffs) > tol:
        raise InputMismatchError(
            f"Matrix coefficients {from_matrix.as_tuple()} do not match {c.as_tuple()}"
        )
    return from_matrix


def classify(c: Quartic, E=None, cfg: Optional[Config] = None) -> DegeneracyClass:
    cfg = resolve(cfg)
    if E is not None:
        check_consistent(c, E, cfg)

    scale = c.scale
    eps = _thresholds(scale, cfg.scaled("zero_tol"))
    D = discriminant(c)
    L = cubic_resolvent(c)
    spectrum = spectrum_from_quartic(c, cfg)
    real_roots = _count_real_roots(spectrum, cfg.scaled("real_tol") * scale)

    checked = [(D, eps["eps_D"])]
    if abs(D) > eps["eps_D"]:
        kind = Kind.REGULAR
    else:
        checked.append((L, eps["eps_L"]))
        if abs(L) > eps["eps_L"]:
            kind = Kind.S1 if real_roots == 4 else Kind.S2
        else:
            checked.append((c.q, eps["eps_q"]))
            if abs(c.q) <= eps["eps_q"]:
                kind = Kind.EP4
            else:
                checked.append((c.r, eps["eps_r"]))
                if abs(c.r) <= eps["eps_r"]:
                    kind = Kind.EL_MINUS if c.q < 0 else Kind.EL_PLUS
                elif c.q < 0:
                    kind = Kind.DL3
                else:
                    # D = L = 0 with q > 0 forces r = 0; only reachable through rounding
                    logger.warning(f"Inconsistent stratum at {c.as_tuple()}; falling back to root count")
                    kind = Kind.S1 if real_roots == 4 else Kind.S2

    boundary = any(_near(val, e) for val, e in checked)
    witnesses = {"D": D, "L": L, "q": c.q, "r": c.r, "s": c.s, "scale": scale,
                 "real_roots": real_roots, "boundary": boundary}
    witnesses.update(eps)
    if boundary:
        logger.warning(f"Classification of {c.as_tuple()} as {kind.value} is within 10x of a threshold")

    if E is None:
        defect = Defectiveness.UNKNOWN
    else:
        mat_spec = eig4(E, cfg)
        defect = _defectiveness(mat_spec)
        spectrum = mat_spec
        witnesses["geometric_multiplicities"] = [int(g) for g in mat_spec.geometric_multiplicities]

    logger.debug(f"classify {c.as_tuple()} -> {kind.value} / {defect.value} (D={D:.3e}, L={L:.3e})")
    return DegeneracyClass(kind=kind, defectiveness=defect, witnesses=witnesses, spectrum=spectrum)


# =========================
# Surface sampling
# =========================
@dataclass
class SurfaceMesh:
    points: List[Tuple[float, float, float]] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)
    defectiveness: List[str] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    parameters: List[Dict[str, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"q": p[0], "r": p[1], "s": p[2], "kind": k, "defectiveness": d}
            for p, k, d in zip(self.points, self.labels, self.defectiveness)
        ]

    def to_dict(self) -> Dict[str, Any]:
        out = {"provenance": dict(self.provenance), "points": self.rows()}
        if self.parameters:
            out["parameters"] = list(self.parameters)
        return out


def grid_axis(name: str, bounds: Tuple[float, float], resolution: int) -> np.ndarray:
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ArgumentError(f"Range for {name} must be finite")
    if resolution < 2:
        raise ArgumentError(f"Resolution for {name} must be at least 2 (got {resolution})")
    if not lo < hi:
        raise ArgumentError(f"Empty range for {name}: [{lo}, {hi}]")
    return np.linspace(lo, hi, resolution)


def _resolutions(resolution, axes: Sequence[str]) -> Dict[str, int]:
    if isinstance(resolution, int):
        return {a: resolution for a in axes}
    res = dict(resolution)
    missing = [a for a in axes if a not in res]
    if missing:
        raise ArgumentError(f"Missing resolution for {missing}")
    return {a: int(res[a]) for a in axes}


def parametric_point(mode: str, **coords: float) -> Tuple[Optional[Quartic], Optional[ModelParams]]:
    """One point of a parametric family; (None, None) where the family is undefined.

    g-offset-exceptional takes an extra `branch` coordinate (+1 or -1).
    """
    if mode == "double-real":
        a, c = coords["a"], coords["c"]
        k = -c * (2.0 * a + c)
        return Quartic(k - 3.0 * a * a, 2.0 * a ** 3 - 2.0 * a * k, a * a * k), None
    if mode == "double-complex":
        a, b = coords["a"], coords["b"]
        k = a * a + b * b
        return Quartic(k - 3.0 * a * a, 2.0 * a ** 3 - 2.0 * a * k, a * a * k), None
    if mode == "g-zero-diabolical":
        u, gm = coords["u"], coords["gamma_minus"]
        if u >= 0:
            params = ModelParams.from_gamma_minus(gm, xi_1=math.sqrt(u))
        else:
            params = ModelParams.from_gamma_minus(gm, delta_omega_1=math.sqrt(-u))
        return char_poly_coeffs(traceless_matrix(params)), params
    if mode == "g-offset-exceptional":
        u, gm = coords["u"], coords["gamma_minus"]
        branch = coords.get("branch", 1.0)
        if u < 0:
            return None, None
        # only g^2 enters (q, r, s) at delta_omega_2 = 0
        g = abs(math.copysign(1.0, branch) * math.sqrt(u) / 2.0 + gm / 4.0)
        params = ModelParams.from_gamma_minus(gm, xi_1=math.sqrt(u), g=g)
        return char_poly_coeffs(traceless_matrix(params)), params
    raise ArgumentError(f"Unknown parametric mode {mode!r}; expected one of {', '.join(PARAMETRIC_MODES)}")


def _label_point(c: Quartic, params: Optional[ModelParams], with_matrix: bool,
                 cfg: Config) -> Optional[Tuple[str, str]]:
    D = discriminant(c)
    if abs(D) > cfg.scaled("mesh_tol") * c.scale ** 6:
        return None
    E = traceless_matrix(params) if (with_matrix and params is not None) else None
    res = classify(c, E, cfg)
    if res.kind is Kind.REGULAR:
        # points within mesh_tol are on the surface
        res = classify(c, E, cfg.with_overrides(zero_tol=cfg.mesh_tol))
    return res.kind.value, res.defectiveness.value


def sample_surface_parametric(mode: str, ranges: Optional[Dict[str, Tuple[float, float]]] = None,
                              resolution=50, with_matrix: bool = False,
                              cfg: Optional[Config] = None) -> SurfaceMesh:
    """Grid over a parametric family of double-root polynomials.

    with_matrix=True builds the dynamical matrix for the g-zero / g-offset
    presets so defectiveness is reported (slower).
    """
    cfg = resolve(cfg)
    if mode not in PARAMETRIC_MODES:
        raise ArgumentError(f"Unknown parametric mode {mode!r}; expected one of {', '.join(PARAMETRIC_MODES)}")
    axes_ranges = dict(DEFAULT_RANGES[mode])
    for k, v in (ranges or {}).items():
        if k not in axes_ranges:
            raise ArgumentError(f"Mode {mode} has no axis {k!r} (axes: {', '.join(axes_ranges)})")
        axes_ranges[k] = v
    names = list(axes_ranges)
    res = _resolutions(resolution, names)
    grids = [grid_axis(n, axes_ranges[n], res[n]) for n in names]
    branches = (1.0, -1.0) if mode == "g-offset-exceptional" else (None,)

    jobs = []
    for first in grids[0]:
        for second in grids[1]:
            for branch in branches:
                coords = {names[0]: float(first), names[1]: float(second)}
                if branch is not None:
                    coords["branch"] = branch
                jobs.append(coords)

    def run(coords):
        c, params = parametric_point(mode, **coords)
        if c is None:
            return None
        labelled = _label_point(c, params, with_matrix, cfg)
        if labelled is None:
            return ("dropped", coords)
        return (c, labelled, coords)

    results = parallel_map(run, jobs, cfg.threads)

    mesh = SurfaceMesh(provenance={
        "source": "parametric", "mode": mode,
        "ranges": {k: [float(v[0]), float(v[1])] for k, v in axes_ranges.items()},
        "resolution": res,
    })
    dropped = 0
    for item in results:
        if item is None:
            continue
        if item[0] == "dropped":
            dropped += 1
            continue
        c, (kind, defect), coords = item
        mesh.points.append(c.as_tuple())
        mesh.labels.append(kind)
        mesh.defectiveness.append(defect)
        mesh.parameters.append(coords)
    if dropped:
        logger.warning(f"Dropped {dropped} parametric points off the surface tolerance")
    logger.info(f"Parametric surface {mode}: {len(mesh)} points")
    return mesh


def _line_polynomial(axis: str, a: float, b: float) -> np.ndarray:
    """D as a polynomial (descending powers) in the scan coordinate, other two fixed."""
    if axis == "s":
        q, r = a, b
        return np.array([256.0, -128.0 * q * q, 16.0 * q ** 4 + 144.0 * q * r * r,
                         -4.0 * q ** 3 * r * r - 27.0 * r ** 4])
    if axis == "q":
        r, s = a, b
        return np.array([16.0 * s, -4.0 * r * r, -128.0 * s * s, 144.0 * r * r * s,
                         256.0 * s ** 3 - 27.0 * r ** 4])
    if axis == "r":
        q, s = a, b
        return np.array([-27.0, 0.0, 144.0 * q * s - 4.0 * q ** 3, 0.0,
                         16.0 * q ** 4 * s - 128.0 * q * q * s * s + 256.0 * s ** 3])
    raise ArgumentError(f"Unknown scan axis {axis!r}; expected q, r or s")


def _bisect(poly: np.ndarray, lo: float, hi: float, tol: float) -> float:
    f_lo = np.polyval(poly, lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = np.polyval(poly, mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _polish(poly: np.ndarray, x: float, target: float, max_steps: int = 20) -> float:
    """Newton on a bisected zero until |poly(x)| <= target; never returns a worse point."""
    deriv = np.polyder(poly)
    f = np.polyval(poly, x)
    for _ in range(max_steps):
        if abs(f) <= target:
            break
        d = np.polyval(deriv, x)
        if d == 0:
            break
        x_new = x - f / d
        f_new = np.polyval(poly, x_new)
        if abs(f_new) >= abs(f):
            break
        x, f = x_new, f_new
    return float(x)


def _line_roots(poly: np.ndarray, grid: np.ndarray, tol: float) -> List[Tuple[float, bool]]:
    """Candidate zeros of poly in [grid[0], grid[-1]].

    Returns (x, tangential) pairs; tangential candidates are critical points
    and still have to be checked against the surface tolerance.
    """
    vals = np.polyval(poly, grid)
    found = [(float(x), False) for x, v in zip(grid, vals) if v == 0]
    for i in range(len(grid) - 1):
        if vals[i] != 0 and vals[i + 1] != 0 and (vals[i] > 0) != (vals[i + 1] > 0):
            found.append((_bisect(poly, float(grid[i]), float(grid[i + 1]), tol), False))

    # even-order zeros never change sign; look at critical points
    deriv = np.polyder(np.trim_zeros(poly, "f")) if np.any(poly) else np.array([0.0])
    if deriv.size > 1 and np.any(deriv):
        for z in np.roots(np.trim_zeros(deriv, "f")):
            if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
                continue
            x = float(z.real)
            if grid[0] <= x <= grid[-1]:
                found.append((x, True))

    found.sort()
    out: List[Tuple[float, bool]] = []
    for x, tangential in found:
        if out and abs(x - out[-1][0]) <= 1e-9 * max(1.0, abs(x)):
            if not tangential:
                out[-1] = (x, False)
            continue
        out.append((x, tangential))
    return out


def sample_surface_implicit(box: Dict[str, Tuple[float, float]], resolution=50, axis: str = "s",
                            cfg: Optional[Config] = None) -> SurfaceMesh:
    """Zeros of D along grid lines of `axis` through a (q, r, s) box."""
    cfg = resolve(cfg)
    names = ("q", "r", "s")
    if axis not in names:
        raise ArgumentError(f"Unknown scan axis {axis!r}; expected q, r or s")
    missing = [n for n in names if n not in box]
    if missing:
        raise ArgumentError(f"Box is missing ranges for {missing}")
    res = _resolutions(resolution, names)
    grids = {n: grid_axis(n, box[n], res[n]) for n in names}
    fixed = [n for n in names if n != axis]
    scan = grids[axis]
    tol = cfg.scaled("bisection_tol")

    def run(ab):
        a, b = ab
        poly = _line_polynomial(axis, a, b)
        out = []
        for x, tangential in _line_roots(poly, scan, tol):
            coords = {fixed[0]: a, fixed[1]: b, axis: x}
            c = Quartic(coords["q"], coords["r"], coords["s"])
            if not tangential:
                coords[axis] = _polish(poly, x, cfg.scaled("zero_tol") * c.scale ** 6)
                c = Quartic(coords["q"], coords["r"], coords["s"])
            labelled = _label_point(c, None, False, cfg)
            if labelled is None and tangential:
                continue
            out.append((c, labelled))
        return out

    lines = [(float(a), float(b)) for a in grids[fixed[0]] for b in grids[fixed[1]]]
    results = parallel_map(run, lines, cfg.threads)

    mesh = SurfaceMesh(provenance={
        "source": "implicit", "axis": axis,
        "box": {n: [float(box[n][0]), float(box[n][1])] for n in names},
        "resolution": res,
    })
    dropped = 0
    for line in results:
        for c, labelled in line:
            if labelled is None:
                dropped += 1
                continue
            mesh.points.append(c.as_tuple())
            mesh.labels.append(labelled[0])
            mesh.defectiveness.append(labelled[1])
    if dropped:
        logger.warning(f"Dropped {dropped} implicit points with |D| above the mesh tolerance")
    logger.info(f"Implicit surface scan along {axis}: {len(mesh)} points from {len(lines)} lines")
    return mesh


def parallel_map(fn, items: List, threads: int) -> List:
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]
