"""Numerical tolerances shared by every check; all overridable per manifest."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class Tolerances:
    rank_tol: float = 1e-9
    intersection_tol: float = 1e-9
    angle_tol: float = 1e-7
    ortho_tol: float = 1e-9
    ambient_tol: float = 1e-12
    structure_tol: float = 1e-10
    weingarten_tol: float = 1e-6
    lemma_tol: float = 1e-8
    jet_tol: float = 1e-9
    fd_tol: float = 1e-5
    fd_step: float = 1e-4
    grad_tol: float = 1e-7
    warp_tol: float = 1e-9
    connection_tol: float = 1e-8
    branch_tol: float = 1e-9

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_overrides(cls, overrides: dict | None) -> "Tolerances":
        overrides = dict(overrides or {})
        unknown = sorted(set(overrides) - set(cls.names()))
        if unknown:
            raise KeyError(f"unknown tolerance(s): {', '.join(unknown)}")
        for k, v in overrides.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ValueError(f"tolerance {k} must be a positive number")
        return cls(**{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> dict:
        return asdict(self)
