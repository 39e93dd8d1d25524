"""
Перераспределение состояний (SRD): исходный и взвешенный варианты.
"""
from src.srd.neighborhoods import build_neighborhoods, compute_overlaps
from src.srd.plan import NeighborhoodPlan, Stencil
from src.srd.weights import (
    assemble_weight_matrix, compute_weights_original, compute_weights_weighted,
)
from src.srd.preprocessing import VARIANTS, build_plan, build_stencils
from src.srd.redistribution import (
    framework_apply, neighborhood_averages, neighborhood_gradients,
    srd_apply, srd_init, weight_matrix_from,
)
from src.srd.tracking import ReadTracker
