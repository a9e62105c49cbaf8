"""
Forward map from Hamiltonian parameters to the control space (q, r, s),
its Jacobian over (gamma_minus, xi_1, g), Newton inversion, and the
pseudo-Hermitian-plane (r = 0) crossing analysis of parameter loops.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from catastrophe import discriminant, grid_axis, parallel_map
from config import Config, get_logger, resolve
from errors import (
    LocusPreconditionError,
    NoInverseFoundError,
    NumericalFailureError,
    ParameterError,
    SingularMapError,
)
from loops import LoopSpec, loop_point
from model import ModelParams, traceless_matrix
from spectral import Quartic, char_poly_coeffs

logger = get_logger("parammap")

MAP_COLUMNS = ("gamma_minus", "xi_1", "g", "delta_omega_1", "delta_omega_2", "q", "r", "s", "det_J")


# =========================
# Closed forms
# =========================
def _simple_coeffs(gm: float, xi: float, g: float, w1: float, w2: float) -> Tuple[float, float, float]:
    """(q, r, s) of the chi = xi_2 = 0 model; even in xi and g."""
    a2 = gm * gm / 16.0
    g2 = g * g
    xi2 = xi * xi
    u = xi2 - w1 * w1
    q = 2.0 * g2 - gm * gm / 8.0 - u + w2 * w2
    r = 0.5 * gm * (u + w2 * w2)
    s = (g2 - a2) ** 2 - a2 * (u - w2 * w2) - 2.0 * g2 * w1 * w2 - u * w2 * w2
    return q, r, s


def _general_coeffs(p: ModelParams) -> Tuple[float, float, float]:
    gm = p.gamma_minus
    a = gm / 4.0
    w1, w2 = p.delta_omega_1, p.delta_omega_2
    q = (-gm * gm / 8.0 + 2.0 * p.g ** 2 - p.xi_1 ** 2 - p.xi_2 ** 2 - 2.0 * p.chi ** 2
         + w1 * w1 + w2 * w2)
    r = 0.5 * gm * (p.xi_1 ** 2 - p.xi_2 ** 2 - w1 * w1 + w2 * w2)

    # Laplace expansion of the traceless matrix along its first two rows
    G = p.g * cmath.exp(1j * p.phi_g)
    X1 = p.xi_1 * cmath.exp(1j * p.phi_1)
    X2 = p.xi_2 * cmath.exp(1j * p.phi_2)
    K = p.chi * cmath.exp(1j * p.phi_chi)
    d1 = -a - 1j * w1
    d2 = a - 1j * w2
    cross = (d1 * K.conjugate() + G * X1.conjugate()) * (G * X2 - K * d2.conjugate())
    s = (abs(d1 * d2 + p.g ** 2) ** 2
         + abs(X1 * X2 - K * K) ** 2
         - abs(d1 * X2.conjugate() + G * K.conjugate()) ** 2
         - abs(G.conjugate() * K.conjugate() - X1.conjugate() * d2) ** 2
         + 2.0 * cross.real)
    return q, r, s


def forward_map(params: ModelParams, validate: bool = False, cfg: Optional[Config] = None) -> Quartic:
    """Closed-form (q, r, s); the simple-model form when chi = xi_2 = 0."""
    p = params
    if p.is_simple:
        coeffs = Quartic(*_simple_coeffs(p.gamma_minus, p.xi_1, p.g, p.delta_omega_1, p.delta_omega_2))
    else:
        coeffs = Quartic(*_general_coeffs(p))

    if validate or logger.isEnabledFor(logging.DEBUG):
        cfg = resolve(cfg)
        ref = char_poly_coeffs(traceless_matrix(p), cfg)
        scale = max(coeffs.scale, ref.scale)
        err = max(abs(coeffs.q - ref.q) / scale, abs(coeffs.r - ref.r) / scale ** 1.5,
                  abs(coeffs.s - ref.s) / scale ** 2)
        if err > cfg.scaled("zero_tol"):
            raise NumericalFailureError(
                f"Closed form {coeffs.as_tuple()} disagrees with traces {ref.as_tuple()} (rel {err:.2e})"
            )
    return coeffs


# =========================
# Jacobian
# =========================
def _simple_jacobian(gm: float, xi: float, g: float, w1: float, w2: float) -> np.ndarray:
    u = xi * xi - w1 * w1
    return np.array([
        [-gm / 4.0, -2.0 * xi, 4.0 * g],
        [0.5 * (u + w2 * w2), gm * xi, 0.0],
        [-(gm / 8.0) * (2.0 * g * g - gm * gm / 8.0 + u - w2 * w2),
         -2.0 * xi * (gm * gm / 16.0 + w2 * w2),
         4.0 * g * (g * g - gm * gm / 16.0) - 4.0 * g * w1 * w2],
    ])


def jacobian(params: ModelParams) -> Tuple[np.ndarray, float]:
    """d(q, r, s) / d(gamma_minus, xi_1, g) with both detunings held fixed."""
    if not params.is_simple:
        raise ParameterError("Jacobian is defined for the chi = xi_2 = 0 model only")
    J = _simple_jacobian(params.gamma_minus, params.xi_1, params.g,
                         params.delta_omega_1, params.delta_omega_2)
    return J, float(np.linalg.det(J))


def jacobian_det_closed_form(params: ModelParams) -> float:
    """4 g^3 xi_1 (xi_1^2 - delta_omega_1^2), valid at delta_omega_2 = 0."""
    if params.delta_omega_2 != 0.0:
        raise ParameterError("Closed-form Jacobian determinant needs delta_omega_2 = 0")
    return 4.0 * params.g ** 3 * params.xi_1 * params.u


# =========================
# Inversion
# =========================
def _weights(target: Quartic) -> np.ndarray:
    scale = target.scale
    return np.array([1.0 / scale, 1.0 / scale ** 1.5, 1.0 / scale ** 2])


def invert_local(target: Quartic, delta_omega_1: float, seed: Sequence[float],
                 delta_omega_2: float = 0.0, cfg: Optional[Config] = None) -> Tuple[float, float, float]:
    """Newton iteration for (gamma_minus, xi_1, g) with forward_map(...) = target.

    The branch is the one the seed lies in. Returns xi_1 and g as magnitudes.
    """
    cfg = resolve(cfg)
    if len(seed) != 3 or not all(math.isfinite(float(v)) for v in seed):
        raise ParameterError(f"Seed must be three finite numbers (gamma_minus, xi_1, g), got {seed!r}")
    x = np.array([float(v) for v in seed])
    w = _weights(target)
    goal = np.array(target.as_tuple())
    tol = cfg.scaled("zero_tol")

    def residual(vec):
        return w * (np.array(_simple_coeffs(vec[0], vec[1], vec[2], delta_omega_1, delta_omega_2)) - goal)

    F = residual(x)
    norm = float(np.max(np.abs(F)))
    converged_at = None
    for it in range(cfg.newton_max_iter):
        if norm <= tol:
            converged_at = it
            break
        J = w[:, None] * _simple_jacobian(x[0], x[1], x[2], delta_omega_1, delta_omega_2)
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        t = 1.0
        for _ in range(30):
            cand = x + t * step
            F_cand = residual(cand)
            n_cand = float(np.max(np.abs(F_cand)))
            if n_cand < norm:
                break
            t *= 0.5
        else:
            raise NoInverseFoundError(
                f"Newton stalled at {tuple(x)} with residual {norm:.3e} after {it} iterations"
            )
        x, F, norm = cand, F_cand, n_cand

    if converged_at is None:
        if norm > tol:
            raise NoInverseFoundError(
                f"No inverse within {cfg.newton_max_iter} iterations (residual {norm:.3e})"
            )
        converged_at = cfg.newton_max_iter

    # one more step to reach working precision
    J = w[:, None] * _simple_jacobian(x[0], x[1], x[2], delta_omega_1, delta_omega_2)
    cand = x + np.linalg.lstsq(J, -F, rcond=None)[0]
    if float(np.max(np.abs(residual(cand)))) < norm:
        x = cand

    gm, xi, g = float(x[0]), abs(float(x[1])), abs(float(x[2]))
    det = float(np.linalg.det(_simple_jacobian(gm, xi, g, delta_omega_1, delta_omega_2)))
    logger.debug(f"invert_local converged in {converged_at} iterations to {(gm, xi, g)} (det J = {det:.3e})")
    if abs(det) < cfg.scaled("singular_det_tol") * target.scale ** 3:
        raise SingularMapError(
            f"Converged to {(gm, xi, g)} where det J = {det:.3e}; the map is not invertible there",
            point=(gm, xi, g), jacobian_det=det,
        )
    return gm, xi, g


# =========================
# Pseudo-Hermitian plane
# =========================
def php_crossing_s(params: ModelParams, cfg: Optional[Config] = None) -> float:
    """s on the r = 0 plane, via the gamma_minus = 0 or the u = 0 closed form."""
    cfg = resolve(cfg)
    p = params
    if not p.is_simple:
        raise LocusPreconditionError("PHP closed forms need chi = xi_2 = 0")
    S = max(1.0, p.g, p.xi_1, abs(p.delta_omega_1), abs(p.delta_omega_2), abs(p.gamma_minus))
    tol = 1e-12 * cfg.tol_scale
    g2 = p.g ** 2
    w1, w2 = p.delta_omega_1, p.delta_omega_2

    if abs(p.gamma_minus) <= tol * S:
        u = p.u
        q = 2.0 * g2 - u + w2 * w2
        return q * q / 4.0 - 2.0 * g2 * w1 * w2 + g2 * (u - w2 * w2) - 0.25 * (u + w2 * w2) ** 2
    if abs(p.u) <= tol * S * S:
        a2 = p.gamma_minus ** 2 / 16.0
        q = 2.0 * g2 - 2.0 * a2 + w2 * w2
        return q * q / 4.0 + 2.0 * a2 * w2 * w2 - 2.0 * g2 * w1 * w2 - g2 * w2 * w2 - w2 ** 4 / 4.0
    raise LocusPreconditionError(
        f"Not on the pseudo-Hermitian plane: need gamma_minus = 0 (got {p.gamma_minus:.3e}) "
        f"or xi_1^2 = delta_omega_1^2 (u = {p.u:.3e})"
    )


@dataclass
class PhpCrossing:
    phi: float
    q: float
    s_minus_q2_4: float

    @property
    def side(self) -> str:
        return "above" if self.s_minus_q2_4 > 0 else "below"

    def to_dict(self) -> Dict[str, Any]:
        return {"phi": self.phi, "q": self.q, "s_minus_q2_over_4": self.s_minus_q2_4, "side": self.side}


@dataclass
class FeasibilityReport:
    crossings: List[PhpCrossing] = field(default_factory=list)
    winding: int = 0
    encloses: Optional[str] = None
    el_plus_possible: bool = True
    min_abs_D: float = math.inf

    @property
    def n_above(self) -> int:
        return sum(1 for c in self.crossings if c.side == "above")

    @property
    def n_below(self) -> int:
        return sum(1 for c in self.crossings if c.side == "below")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "crossings": [c.to_dict() for c in self.crossings],
            "n_above": self.n_above,
            "n_below": self.n_below,
            "winding": self.winding,
            "encloses": self.encloses,
            "el_plus_possible": self.el_plus_possible,
            "min_abs_D": self.min_abs_D,
        }


def _loop_coeffs(spec: LoopSpec, phi: float) -> Quartic:
    return forward_map(loop_point(spec, phi))


def _refine_crossing(spec: LoopSpec, lo: float, hi: float, r_lo: float, tol: float) -> float:
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        r_mid = _loop_coeffs(spec, mid).r
        if r_mid == 0:
            return mid
        if (r_mid > 0) == (r_lo > 0):
            lo, r_lo = mid, r_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def loop_feasibility(spec: LoopSpec, cfg: Optional[Config] = None) -> FeasibilityReport:
    """PHP crossings of a loop, split by the side of s = q^2 / 4, and what the loop encloses.

    The EL sits at r = 0, s = q^2 / 4; a loop links it when (r, s - q^2/4)
    winds around the origin.
    """
    cfg = resolve(cfg)
    phis = spec.phi_grid()
    coeffs = [_loop_coeffs(spec, float(phi)) for phi in phis]
    r = np.array([c.r for c in coeffs])
    h = np.array([c.s - c.q * c.q / 4.0 for c in coeffs])

    report = FeasibilityReport(el_plus_possible=spec.delta_omega_2 != 0.0)
    report.min_abs_D = float(min(abs(discriminant(c)) for c in coeffs))

    tol = cfg.scaled("bisection_tol")
    nonzero = [i for i in range(len(phis)) if r[i] != 0]
    for i, j in zip(nonzero, nonzero[1:]):
        if (r[i] > 0) == (r[j] > 0):
            continue
        if j == i + 1:
            phi = _refine_crossing(spec, float(phis[i]), float(phis[j]), float(r[i]), tol)
        else:
            # the loop sits on the plane at sample i + 1
            phi = float(phis[i + 1])
        c = _loop_coeffs(spec, phi)
        report.crossings.append(PhpCrossing(phi, c.q, c.s - c.q * c.q / 4.0))

    angles = np.unwrap(np.arctan2(h, r))
    report.winding = int(round((angles[-1] - angles[0]) / (2.0 * math.pi)))

    if report.winding != 0:
        qs = [c.q for c in report.crossings]
        if qs and all(q > 0 for q in qs):
            report.encloses = "ELplus"
        elif qs and all(q < 0 for q in qs):
            report.encloses = "ELminus"
        else:
            report.encloses = "EL"

    if not report.el_plus_possible:
        logger.warning("delta_omega_2 = 0: only loops around EL(-) are possible")
        if report.encloses == "ELplus":
            logger.warning("Loop reports EL(+) enclosure at delta_omega_2 = 0; check the sampling")
    logger.info(
        f"Loop feasibility: {len(report.crossings)} PHP crossings "
        f"({report.n_above} above, {report.n_below} below), winding {report.winding}, "
        f"encloses {report.encloses}"
    )
    return report


# =========================
# Map points and sweeps
# =========================
@dataclass(frozen=True)
class MapPoint:
    params: ModelParams
    coeffs: Quartic
    jacobian_det: Optional[float] = None

    def row(self) -> Dict[str, Any]:
        p = self.params
        return {
            "gamma_minus": p.gamma_minus, "xi_1": p.xi_1, "g": p.g,
            "delta_omega_1": p.delta_omega_1, "delta_omega_2": p.delta_omega_2,
            "q": self.coeffs.q, "r": self.coeffs.r, "s": self.coeffs.s,
            "det_J": self.jacobian_det,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {"params": self.params.to_dict(), "coeffs": self.coeffs.to_dict(),
                "jacobian_det": self.jacobian_det}


def map_point(params: ModelParams, cfg: Optional[Config] = None) -> MapPoint:
    coeffs = forward_map(params, cfg=cfg)
    det = jacobian(params)[1] if params.is_simple else None
    return MapPoint(params=params, coeffs=coeffs, jacobian_det=det)


def map_sweep(gamma_range: Tuple[float, float], xi_range: Tuple[float, float], g: float,
              delta_omega_1: float = 0.0, delta_omega_2: float = 0.0, resolution: int = 50,
              cfg: Optional[Config] = None) -> List[MapPoint]:
    """Forward map over a (gamma_minus, xi_1) grid at fixed g, in grid order."""
    cfg = resolve(cfg)
    if g < 0 or not math.isfinite(g):
        raise ParameterError(f"g must be a finite magnitude, got {g}")
    gammas = grid_axis("gamma_minus", gamma_range, resolution)
    xis = grid_axis("xi_1", xi_range, resolution)
    if xis[0] < 0:
        raise ParameterError("xi_1 range must be non-negative")

    def run(pair):
        gm, xi = pair
        params = ModelParams.from_gamma_minus(float(gm), xi_1=float(xi), g=g,
                                              delta_omega_1=delta_omega_1, delta_omega_2=delta_omega_2)
        return map_point(params, cfg)

    points = parallel_map(run, [(gm, xi) for gm in gammas for xi in xis], cfg.threads)
    logger.info(f"Map sweep: {len(points)} points at g={g}")
    return points
