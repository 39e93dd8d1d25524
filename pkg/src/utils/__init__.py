"""
Вспомогательные функции.
"""

