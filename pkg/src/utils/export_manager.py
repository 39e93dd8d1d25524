"""
Менеджер экспорта отчетов по сериям запусков.
"""
import asyncio
import logging
from typing import Dict, Optional, Sequence

from src.utils.reports import artifact_path, get_reports_directory

logger = logging.getLogger(__name__)


class ExportManager:
    """Менеджер для выгрузки отчетов в каталог результатов"""

    def __init__(self, reports_dir: Optional[str] = None):
        self.reports_dir = get_reports_directory(reports_dir)

    def get_default_path(self, kind: str) -> str:
        """Путь по умолчанию для отчета заданного вида"""
        return artifact_path(self.reports_dir, kind)

    async def export_sweep_report(self, experiment: str, rows: Sequence[Dict],
                                  filepath: Optional[str] = None) -> bool:
        """
        PDF отчет по серии запусков.

        Генерация выполняется в пуле потоков, чтобы не блокировать цикл событий.
        """
        filepath = filepath or self.get_default_path('report')
        try:
            from src.export_to_pdf import SweepReport
            report = SweepReport(experiment, rows)
            loop = asyncio.get_running_loop()
            return await loop.run_in_executor(None, report.generate_report, filepath)
        except Exception as e:
            logger.error(f"Ошибка экспорта отчета по серии: {e}")
            return False
