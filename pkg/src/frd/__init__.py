"""
Перераспределение потоков (FRD).
"""
from src.frd.redistribution import FrdPlan, build_frd_plan, frd_apply
