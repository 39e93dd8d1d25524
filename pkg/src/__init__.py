"""
Инструментарий конечных объемов на сетках с вложенной границей:
перераспределение состояний (SRD) и потоков (FRD).
"""

__version__ = "0.3.0"
