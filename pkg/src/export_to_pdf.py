"""
Модуль для генерации PDF отчета по серии запусков.

Используемые библиотеки:
- reportlab: генерация PDF документов
  - reportlab.platypus: SimpleDocTemplate, Table, Paragraph
  - reportlab.pdfbase.ttfonts: TTF шрифты для поддержки кириллицы
Отчет содержит только таблицы, без графиков.
"""
import os
import logging
from typing import Dict, List, Sequence

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.pdfbase import pdfmetrics
from reportlab.pdfbase.ttfonts import TTFont
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ('stabilizer', 'exit_code', 'min', 'max', 'total_drift', 'merged_cells',
                 'max_overlap', 'min_v_hat')


class PDFReporter:
    """Базовый класс для генерации PDF отчетов"""

    def __init__(self):
        self.cyrillic_font = self.setup_fonts()
        self.styles = getSampleStyleSheet()
        self.setup_styles()

    def setup_fonts(self):
        """Регистрация кириллических шрифтов"""
        font_paths = [
            '/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf',
            '/usr/share/fonts/truetype/freefont/FreeSans.ttf',
            '/usr/share/fonts/truetype/liberation/LiberationSans-Regular.ttf',
            'C:/Windows/Fonts/arial.ttf',
            '/Library/Fonts/Arial.ttf',
        ]
        try:
            for font_path in font_paths:
                if os.path.exists(font_path):
                    pdfmetrics.registerFont(TTFont('CyrillicFont', font_path))
                    logger.info(f"Используется кириллический шрифт: {font_path}")
                    return 'CyrillicFont'
            logger.warning("Кириллические шрифты не найдены, используем Helvetica")
        except Exception as e:
            logger.error(f"Ошибка настройки шрифтов: {e}")
        return 'Helvetica'

    def setup_styles(self):
        """Стили заголовка, текста и ячеек таблицы"""
        self.title_style = self._style('SweepTitle', 'Heading1', fontSize=16, spaceAfter=20,
                                       alignment=1, textColor=colors.darkblue)
        self.normal_style = self._style('SweepText', 'Normal', fontSize=10, leading=12)
        self.cell_style = self._style('SweepCell', 'Normal', fontSize=8, leading=10, alignment=1)

    def _style(self, name: str, parent: str, **options) -> ParagraphStyle:
        return ParagraphStyle(name, parent=self.styles[parent], fontName=self.cyrillic_font,
                              **options)


class SweepReport(PDFReporter):
    """Таблица сравнения стабилизаторов в одной серии"""

    def __init__(self, experiment: str, rows: Sequence[Dict]):
        super().__init__()
        self.experiment = experiment
        self.rows = list(rows)

    def create_table(self) -> Table:
        data: List[list] = [[Paragraph(c, self.cell_style) for c in SWEEP_COLUMNS]]
        for row in self.rows:
            data.append([Paragraph(_format(row.get(c, '')), self.cell_style) for c in SWEEP_COLUMNS])
        table = Table(data, repeatRows=1)
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#4A90A4')),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.white),
            ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
            ('BACKGROUND', (0, 1), (-1, -1), colors.HexColor('#E8F4F8')),
            ('GRID', (0, 0), (-1, -1), 1, colors.HexColor('#CCCCCC')),
            ('LEFTPADDING', (0, 0), (-1, -1), 4),
            ('RIGHTPADDING', (0, 0), (-1, -1), 4),
        ]))
        return table

    def generate_report(self, filename: str) -> bool:
        """Генерация отчета"""
        try:
            doc = SimpleDocTemplate(filename, pagesize=A4, topMargin=1 * inch, invariant=1)
            story = [
                Paragraph(f"Серия запусков: {self.experiment}", self.title_style),
                Paragraph(f"Стабилизаторов: {len(self.rows)}", self.normal_style),
                Spacer(1, 0.3 * inch),
                self.create_table(),
            ]
            doc.build(story)
            logger.info(f"PDF отчет создан: {filename}")
            return True
        except Exception as e:
            logger.error(f"Ошибка создания PDF отчета: {e}")
            return False


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
