"""
Утилиты для работы с каталогами результатов.
"""
import os
from datetime import datetime
from typing import Optional

from config.settings import REPORTS_DIR

ARTIFACTS = {
    'field': 'field.csv',
    'profile': 'profile.csv',
    'plan': 'plan.txt',
    'matrix': 'matrix.csv',
    'workbook': 'matrix.xlsx',
    'summary': 'summary.txt',
    'geometry': 'eb_database.csv',
    'config': 'experiment.ini',
    'sweep': 'sweep.csv',
    'report': 'report.pdf',
}


def get_reports_directory(base: Optional[str] = None) -> str:
    """Возвращает путь к директории результатов, создавая ее"""
    reports_dir = base or os.path.join(os.getcwd(), REPORTS_DIR)
    os.makedirs(reports_dir, exist_ok=True)
    return reports_dir


def generate_run_name(experiment: str, custom_name: Optional[str] = None) -> str:
    """
    Имя каталога запуска.

    Args:
        experiment: Имя эксперимента
        custom_name: Пользовательское имя (опционально)
    """
    if custom_name:
        return custom_name
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return f"{experiment}_{timestamp}"


def artifact_path(directory: str, kind: str) -> str:
    """Путь к артефакту заданного вида в каталоге запуска"""
    return os.path.join(directory, ARTIFACTS[kind])


def ensure_directory_exists(filepath: str) -> str:
    """Создает директорию для файла, если она не существует"""
    directory = os.path.dirname(filepath)
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)
    return filepath
