"""
Модуль конфигурации приложения.
"""
