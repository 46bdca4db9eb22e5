"""
system_state.py

The principal variables of one time level on the reference annulus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nemacol.rigid.rigid_body import RigidState2D
from nemacol.transform.flow_map import TransformField


@dataclass
class SystemState:
    t: float
    v: np.ndarray
    p: np.ndarray
    d: np.ndarray
    rigid: RigidState2D
    transform: TransformField
    step_index: int = 0
    div_max: float = 0.0

    @property
    def grid(self):
        return self.transform.grid

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.d)))
