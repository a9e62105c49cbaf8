"""
Two-mode driven-dissipative bosonic model: parameters, dynamical matrix,
input coupling and symmetry checks.

Basis order is (a1, a2, a1^dag, a2^dag) everywhere; the tau matrices below
are written for that order.
"""

import cmath
import math
from typing import Any, Dict, Iterable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config import Config, resolve
from errors import MalformedMatrixError, ParameterError

PARAM_FIELDS = (
    "delta_omega_1", "delta_omega_2",
    "g", "phi_g",
    "xi_1", "phi_1",
    "xi_2", "phi_2",
    "chi", "phi_chi",
    "gamma_1", "gamma_2",
)

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
TAU_X = np.kron(_SIGMA_X, np.eye(2))
TAU_Z = np.kron(_SIGMA_Z, np.eye(2))


def reduce_phase(phi: float) -> float:
    """Map a phase into (-pi, pi]."""
    if phi > -math.pi and phi <= math.pi:
        return float(phi)
    return float(phi - 2.0 * math.pi * math.ceil((phi - math.pi) / (2.0 * math.pi)))


# =========================
# Parameters
# =========================
class ModelParams(BaseModel):
    """Hamiltonian and loss parameters of the general two-mode model.

    Magnitudes are non-negative, phases live in (-pi, pi]. Missing fields
    default to zero when loading from JSON.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    delta_omega_1: float = 0.0
    delta_omega_2: float = 0.0
    g: float = Field(default=0.0, ge=0.0)
    phi_g: float = 0.0
    xi_1: float = Field(default=0.0, ge=0.0)
    phi_1: float = 0.0
    xi_2: float = Field(default=0.0, ge=0.0)
    phi_2: float = 0.0
    chi: float = Field(default=0.0, ge=0.0)
    phi_chi: float = 0.0
    gamma_1: float = Field(default=0.0, ge=0.0)
    gamma_2: float = Field(default=0.0, ge=0.0)

    @field_validator("phi_g", "phi_1", "phi_2", "phi_chi")
    @classmethod
    def _reduce(cls, v: float) -> float:
        return reduce_phase(v)

    @property
    def gamma_plus(self) -> float:
        return self.gamma_1 + self.gamma_2

    @property
    def gamma_minus(self) -> float:
        return self.gamma_1 - self.gamma_2

    @property
    def u(self) -> float:
        """xi_1^2 - delta_omega_1^2."""
        return self.xi_1 ** 2 - self.delta_omega_1 ** 2

    @property
    def is_simple(self) -> bool:
        return self.chi == 0.0 and self.xi_2 == 0.0

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelParams":
        try:
            return cls(**data)
        except ValidationError as e:
            raise ParameterError(f"Invalid model parameters: {e}") from e

    @classmethod
    def from_gamma_minus(cls, gamma_minus: float, **fields: Any) -> "ModelParams":
        """Build parameters from a signed loss difference, keeping both rates non-negative."""
        fields["gamma_1"] = max(gamma_minus, 0.0)
        fields["gamma_2"] = max(-gamma_minus, 0.0)
        return cls.from_dict(fields)

    def to_dict(self) -> Dict[str, float]:
        return {k: float(getattr(self, k)) for k in PARAM_FIELDS}


# =========================
# Matrices
# =========================
def ensure_matrix4(M: Any) -> np.ndarray:
    try:
        arr = np.asarray(M, dtype=complex)
    except (TypeError, ValueError) as e:
        raise MalformedMatrixError(f"Not a complex matrix: {e}") from e
    if arr.shape != (4, 4):
        raise MalformedMatrixError(f"Expected a 4x4 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MalformedMatrixError("Matrix has non-finite entries")
    return arr


def frobenius(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, "fro"))


def build_dynamical_matrix(params: ModelParams) -> np.ndarray:
    """Raw dynamical matrix of the general two-mode model (trace -gamma_plus)."""
    p = params
    G = p.g * cmath.exp(1j * p.phi_g)
    X1 = p.xi_1 * cmath.exp(1j * p.phi_1)
    X2 = p.xi_2 * cmath.exp(1j * p.phi_2)
    K = p.chi * cmath.exp(1j * p.phi_chi)
    h1 = p.gamma_1 / 2.0
    h2 = p.gamma_2 / 2.0
    w1 = p.delta_omega_1
    w2 = p.delta_omega_2

    # lower blocks are the entrywise conjugates of the upper ones
    return np.array([
        [-h1 - 1j * w1, G.conjugate(), X1.conjugate(), K.conjugate()],
        [-G, -h2 - 1j * w2, K.conjugate(), X2.conjugate()],
        [X1, K, -h1 + 1j * w1, G],
        [K, X2, -G.conjugate(), -h2 + 1j * w2],
    ], dtype=complex)


def tracelessize(M: Any, cfg: Optional[Config] = None) -> np.ndarray:
    """Shift M by -Tr(M)/4 so the result is traceless.

    A dynamical matrix has a real trace (-gamma_plus); anything else is rejected.
    The result satisfies |Tr| <= trace_tol * max(1, ||M||).
    """
    arr = ensure_matrix4(M)
    tol = resolve(cfg).scaled("trace_tol") * max(1.0, frobenius(arr))
    tr = complex(np.trace(arr))
    if abs(tr.imag) > tol:
        raise MalformedMatrixError(f"Trace {tr} is not real; not a dynamical matrix")
    out = arr - (tr.real / 4.0) * np.eye(4, dtype=complex)
    left = abs(np.trace(out))
    if left > tol:
        raise MalformedMatrixError(f"Shifted trace {left:.3e} exceeds {tol:.3e}")
    return out


def traceless_matrix(params: ModelParams, cfg: Optional[Config] = None) -> np.ndarray:
    return tracelessize(build_dynamical_matrix(params), cfg)


def input_coupling_matrix(params: ModelParams) -> np.ndarray:
    r1 = math.sqrt(params.gamma_1)
    r2 = math.sqrt(params.gamma_2)
    return np.diag([r1, r2, r1, r2]).astype(complex)


def physical_eigenvalues(roots: Iterable[complex], params: ModelParams) -> np.ndarray:
    """Undo the traceless shift: eigenvalues of the raw matrix."""
    return np.asarray(list(roots), dtype=complex) - params.gamma_plus / 4.0


# =========================
# Symmetry residuals
# =========================
def particle_hole_residual(M: Any) -> float:
    """||M - tau_x M* tau_x||_F."""
    arr = ensure_matrix4(M)
    return frobenius(arr - TAU_X @ arr.conj() @ TAU_X)


def pseudo_hermiticity_residual(M: Any) -> float:
    """||M^dag + tau_z M tau_z||_F."""
    arr = ensure_matrix4(M)
    return frobenius(arr.conj().T + TAU_Z @ arr @ TAU_Z)
