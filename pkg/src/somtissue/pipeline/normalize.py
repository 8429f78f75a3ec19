"""Online min-max scaling into the tissue's [0, 1] weight domain."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import InputError


@dataclass
class NormState:
    mins: Optional[np.ndarray] = None
    maxs: Optional[np.ndarray] = None
    count: int = 0

    @property
    def dim(self) -> Optional[int]:
        return None if self.mins is None else self.mins.shape[0]

    def copy(self) -> "NormState":
        return NormState(
            None if self.mins is None else self.mins.copy(),
            None if self.maxs is None else self.maxs.copy(),
            self.count,
        )


def normalize(raw_values: Sequence[float], state: NormState) -> tuple[np.ndarray, NormState]:
    """Widen the running range with ``raw_values``, then scale them into it.

    The state is updated in place and also returned. A dimension whose range
    is still degenerate maps to 0.5.
    """
    v = np.asarray(raw_values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] == 0:
        raise InputError(f"feature values must be a non-empty flat list, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError("feature values must be finite")
    if state.mins is None:
        state.mins = v.copy()
        state.maxs = v.copy()
    elif v.shape[0] != state.dim:
        raise InputError(f"feature dimension changed from {state.dim} to {v.shape[0]}")
    else:
        np.minimum(state.mins, v, out=state.mins)
        np.maximum(state.maxs, v, out=state.maxs)
    state.count += 1

    span = state.maxs - state.mins
    degenerate = span == 0
    out = np.where(degenerate, 0.5, (v - state.mins) / np.where(degenerate, 1.0, span))
    return np.clip(out, 0.0, 1.0), state
