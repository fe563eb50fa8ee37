"""Shrink free pro-p operator groups to kill Tate cohomology classes.

Functions:
    prop2_solve: Find a linear surjection killing block tensors.
    prop6_annihilate: Kill Tate classes of a layer of a free operator group.
    prop7_annihilate: Kill H₁ classes of a truncated semidirect product.
    run_scenario: Run a validated scenario and return its report.
"""

from typing import List

from shrinklab.services import run_scenario
from shrinklab.shrink import prop2_solve, prop6_annihilate, prop7_annihilate

__all__: List[str] = [
    "prop2_solve",
    "prop6_annihilate",
    "prop7_annihilate",
    "run_scenario",
]
