"""
Командная строка инструментария.

    python -m src.main run config/presets/ramp40.ini --stabilizer frd,srd-original,srd-weighted
    python -m src.main compare reports/a reports/b
    python -m src.main dump-plan config/presets/ramp45.ini
"""
import argparse
import asyncio
import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config.settings import LOG_CONFIG
from src.errors import ConfigError, EBError
from src.utils.reports import generate_run_name, get_reports_directory
from src.utils.validators import load_experiment, validate_stabilizers

logger = logging.getLogger('src.main')


def setup_logging(level: str = None):
    """Настройка логирования: файл и консоль"""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_CONFIG['level']).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(LOG_CONFIG['file'], encoding='utf-8'),
            logging.StreamHandler()
        ],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='eb-srd', description='Перераспределение состояний на сетках с вложенной границей')
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING, ERROR')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='запуск эксперимента')
    run.add_argument('config', help='файл описания эксперимента (INI)')
    run.add_argument('--out', default=None, help='каталог результатов')
    run.add_argument('--patches', type=int, default=None, help='число патчей')
    run.add_argument('--stabilizer', default=None,
                     help='стабилизатор или список через запятую для серии')
    run.add_argument('--check-reads', action='store_true', help='проверка чтений за фиктивным слоем')

    compare = commands.add_parser('compare', help='сравнение двух запусков')
    compare.add_argument('dir_a')
    compare.add_argument('dir_b')
    compare.add_argument('--out', default=None, help='файл для строки отчета')

    plan = commands.add_parser('dump-plan', help='дамп плана перераспределения')
    plan.add_argument('config')
    plan.add_argument('--out', default=None, help='каталог для plan.txt и matrix.csv')
    return parser


def command_run(args) -> int:
    from src.api import run_experiment, sweep

    config = load_experiment(args.config)
    out = args.out or os.path.join(get_reports_directory(), generate_run_name(config.name))
    check_reads = True if args.check_reads else None
    if args.stabilizer:
        ok, message = validate_stabilizers(args.stabilizer)
        if not ok:
            raise ConfigError(message, key='--stabilizer')
        names = [s.strip() for s in args.stabilizer.split(',') if s.strip()]
        if len(names) > 1:
            rows = asyncio.run(sweep(config, names, out, args.patches, check_reads))
            for row in rows:
                print(f"{row['stabilizer']}: exit={row['exit_code']}")
            return max(row['exit_code'] for row in rows)
        config = config.with_stabilizer(names[0])
    result = run_experiment(config, out, args.patches, check_reads)
    summary = result.summary()
    print(f"{config.scheme.stabilizer}: min={summary['min']!r} max={summary['max']!r} -> {out}")
    return 0


def command_compare(args) -> int:
    from src.api import compare, compare_line

    line = compare_line(*compare(args.dir_a, args.dir_b))
    print(line)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(line + '\n')
    return 0


def command_dump_plan(args) -> int:
    from src.api import dump_plan

    config = load_experiment(args.config)
    for line in dump_plan(config, args.out):
        print(line)
    return 0


COMMANDS = {
    'run': command_run,
    'compare': command_compare,
    'dump-plan': command_dump_plan,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except EBError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except ValueError as e:
        logger.error(f"Неверные параметры: {e}")
        return ConfigError.exit_code


if __name__ == '__main__':
    sys.exit(main())
