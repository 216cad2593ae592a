"""Named parameter sets used by the CLI, the acceptance suite and the demos."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .construction import ConstructionParams
from .resonance import coupled_N, kappa_for

CONSTRUCTION_PRESETS = {
    "n1e6": ConstructionParams(10**6, 0.5, a=1.5, budget=10**5),
    "n1e8": ConstructionParams(10**8, 0.9, a=1.05, budget=10**5),
    "n1e10": ConstructionParams(10**10, 0.5, budget=10**5),
}


@dataclass(frozen=True)
class ResonancePreset:
    construction: ConstructionParams
    T: float
    beta: float
    scan_budget: int = 20_000

    def check_coupling(self) -> bool:
        """True when N = floor(T^kappa); warn otherwise."""
        ok = self.construction.N == coupled_N(self.T, self.beta)
        if not ok:
            warnings.warn(
                f"N={self.construction.N} is decoupled from T={self.T:g} "
                f"(coupled value floor(T^{kappa_for(self.beta):g}) = {coupled_N(self.T, self.beta)})",
                stacklevel=2,
            )
        return ok


RESONANCE_PRESETS = {
    "t1e3": ResonancePreset(CONSTRUCTION_PRESETS["n1e6"], 1e3, 0.4),
    "t1e4": ResonancePreset(CONSTRUCTION_PRESETS["n1e6"], 1e4, 0.4),
}

SMOOTHED_SUM_GRID = (1.0, 10.0, 100.0, 1000.0, 2000.0)


def coupled_preset(T: float, beta: float, gamma: float = 0.5, budget: int = 10**5) -> ResonancePreset:
    """N tied to T through N = floor(T^kappa); tiny at desk-scale T."""
    # ConstructionParams rejects N too small for a prime window
    return ResonancePreset(ConstructionParams(coupled_N(T, beta), gamma, budget=budget), T, beta)
