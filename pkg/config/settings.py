"""
Конфигурация численных параметров.
"""
import os
from typing import Dict, Any

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

# Константы решателя и параметры перераспределения
SOLVER_CONFIG: Dict[str, Any] = {
    'kappa_min': float(os.getenv('EB_KAPPA_MIN', '1e-6')),
    'v_target': float(os.getenv('SRD_V_TARGET', '0.5')),
    'tol_sym': float(os.getenv('SRD_TOL_SYM', '1e-8')),
    'merge_tol': float(os.getenv('SRD_MERGE_TOL', '1e-12')),
    'subdivision_depth': int(os.getenv('EB_SUBDIVISION_DEPTH', '6')),
    'ghost_preprocess': int(os.getenv('GHOST_PREPROCESS', '5')),
    'ghost_postprocess': int(os.getenv('GHOST_POSTPROCESS', '3')),
    'blowup_limit': float(os.getenv('BLOWUP_LIMIT', '1e100')),
}

LOG_CONFIG: Dict[str, Any] = {
    'file': os.getenv('LOG_FILE', 'eb_srd.log'),
    'level': os.getenv('LOG_LEVEL', 'INFO'),
}

REPORTS_DIR: str = os.getenv('REPORTS_DIR', 'reports')
