"""
Parameter loops: modulation of (xi_1, g, gamma_minus) by an angle phi.

    xi_1        = a_xi    (1 + m_xi    cos phi)
    g           = a_g     (1 + m_g     sin phi)
    gamma_minus = a_gamma (1 + m_gamma cos phi)

All phases are zero and chi = xi_2 = 0 along a loop.
"""

import math
from typing import Any, Dict, Optional

import jsonschema
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import get_logger, load_json_file
from errors import ParameterError
from model import ModelParams

logger = get_logger("loops")

TWO_PI = 2.0 * math.pi

LOOP_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "a_xi": {"type": "number"},
        "m_xi": {"type": "number"},
        "a_g": {"type": "number"},
        "m_g": {"type": "number"},
        "a_gamma": {"type": "number"},
        "m_gamma": {"type": "number"},
        "delta_omega_1": {"type": "number"},
        "delta_omega_2": {"type": "number"},
        "n_samples": {"type": "integer", "minimum": 64},
    },
    "required": ["a_xi", "m_xi", "a_g", "m_g", "a_gamma", "m_gamma"],
    "additionalProperties": False,
}


class LoopSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    a_xi: float
    m_xi: float
    a_g: float
    m_g: float
    a_gamma: float
    m_gamma: float
    delta_omega_1: float = 0.0
    delta_omega_2: float = 0.0
    n_samples: int = Field(default=1024, ge=64)
    name: Optional[str] = None

    @model_validator(mode="after")
    def _magnitudes_keep_sign(self) -> "LoopSpec":
        # xi_1 and g are magnitudes; only gamma_minus may change sign along the loop
        for label, amp, depth in (("xi_1", self.a_xi, self.m_xi), ("g", self.a_g, self.m_g)):
            if amp < 0:
                raise ValueError(f"{label} amplitude must be >= 0 (got {amp})")
            if abs(depth) > 1.0:
                raise ValueError(f"{label} modulation depth |m| = {abs(depth)} > 1 turns {label} negative")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LoopSpec":
        try:
            jsonschema.validate(instance=data, schema=LOOP_SCHEMA)
        except jsonschema.ValidationError as e:
            raise ParameterError(f"Loop config does not match schema: {e.message}") from e
        try:
            return cls(**data)
        except ValidationError as e:
            raise ParameterError(f"Invalid loop spec: {e}") from e

    @classmethod
    def from_json_file(cls, path: str) -> "LoopSpec":
        spec = cls.from_dict(load_json_file(path))
        logger.debug(f"Loaded loop spec {spec.name or path}")
        return spec

    def with_overrides(self, **overrides: Any) -> "LoopSpec":
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return LoopSpec(**data)
        except ValidationError as e:
            raise ParameterError(f"Invalid loop override: {e}") from e

    def phi_grid(self) -> np.ndarray:
        return np.linspace(0.0, TWO_PI, self.n_samples + 1)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


def loop_point(spec: LoopSpec, phi: float) -> ModelParams:
    """Model parameters at angle phi (taken mod 2 pi)."""
    phi = math.fmod(phi, TWO_PI)
    xi = spec.a_xi * (1.0 + spec.m_xi * math.cos(phi))
    g = spec.a_g * (1.0 + spec.m_g * math.sin(phi))
    gm = spec.a_gamma * (1.0 + spec.m_gamma * math.cos(phi))
    return ModelParams.from_gamma_minus(
        gm,
        xi_1=abs(xi),
        g=abs(g),
        delta_omega_1=spec.delta_omega_1,
        delta_omega_2=spec.delta_omega_2,
    )
