"""Energy-efficient full-duplex UAV secrecy relaying.

A UAV relays a ground source's confidential data while jamming a ground
eavesdropper. The package maximizes secure bits per joule of propulsion
energy over source power, jamming power and the UAV path, and provides
the three reference schemes used for comparison.
"""

from .baselines import (SchemeId, build_best_effort_trajectory, solve_njt, solve_npt,
                        solve_pbet, solve_scheme)
from .bcd import SolveResult, solve_pt
from .energy import energy_efficiency, propulsion_power
from .metrics import evaluate, reporting_ee
from .scenario import Scenario, ScenarioError, default_scenario, load_scenario, read_scenario

__version__ = "0.1.0"

__all__ = [
    "Scenario",
    "ScenarioError",
    "SchemeId",
    "SolveResult",
    "build_best_effort_trajectory",
    "default_scenario",
    "energy_efficiency",
    "evaluate",
    "load_scenario",
    "propulsion_power",
    "read_scenario",
    "reporting_ee",
    "solve_njt",
    "solve_npt",
    "solve_pbet",
    "solve_pt",
    "solve_scheme",
]
