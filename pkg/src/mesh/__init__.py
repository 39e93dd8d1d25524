"""
Сетка, поля и декомпозиция области.
"""
from src.mesh.ebgrid import (
    COVERED_CODE, CUT_CODE, REGULAR_CODE, EBGrid, build_ebgrid,
)
from src.mesh.field import Field
from src.mesh.patches import (
    GhostSchedule, Patch, decompose, fill_ghost, gather_fields, scatter_field,
)
