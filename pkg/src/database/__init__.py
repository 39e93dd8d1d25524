"""
Текстовые дампы геометрии, полей и планов.
"""
from src.database.eb_dump import (
    FIELD_HEADER, eb_database_header, plan_lines, read_field, write_eb_database,
    write_field, write_plan,
)
