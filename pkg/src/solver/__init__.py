"""
Решатель переноса с диффузией на сетке с вложенной границей.
"""
from src.solver.fluxes import (
    Discretization, advective_flux, diffusive_flux, provisional_update,
)
from src.solver.stepping import Simulation, compute_dt
