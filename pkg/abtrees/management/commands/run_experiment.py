from django.core.management.base import BaseCommand, CommandError
import yaml
import logging

from abtrees.exceptions import ABTreeError
from abtrees.keygen import DISTRIBUTIONS
from abtrees.models import ExperimentRun
from abtrees.services import ExperimentRunner, ExperimentService, write_metrics
from abtrees.validators import ALGORITHMS

logger = logging.getLogger(__name__)

CONFIG_OPTIONS = ('tree_size', 'bulk_size', 'iterations', 'workers', 'dist', 'seed', 'algo', 'skew_factor')


class Command(BaseCommand):
    help = 'Run an (a,b)-tree experiment and emit one metrics row per iteration as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--tree-size', type=int, help='Initial tree size T')
        parser.add_argument('--bulk-size', type=int, help='Bulk update size B')
        parser.add_argument('--iterations', type=int, help='Iterations I (default derived from B)')
        parser.add_argument('--workers', type=int, help='Worker count p (default ABTREE_WORKERS)')
        parser.add_argument('--dist', choices=DISTRIBUTIONS, help='Key distribution')
        parser.add_argument('--seed', type=int, help='Random seed')
        parser.add_argument('--algo', choices=ALGORITHMS, help='Algorithm to measure')
        parser.add_argument('--skew-factor', type=int, help='Skewed-uniform range divisor')
        parser.add_argument('--counters', dest='counters', action='store_true', default=None,
                            help='Report work counters (default)')
        parser.add_argument('--no-counters', dest='counters', action='store_false',
                            help='Write the counter columns as 0')
        parser.add_argument('--no-timing', action='store_true',
                            help='Write the time columns as 0.0 for bit-stable output')
        parser.add_argument('--compare-sequential', action='store_true',
                            help='Also run each bulk iteration at p=1 and report the speedup')
        parser.add_argument('--config', help='YAML file with experiment settings')
        parser.add_argument('--out', help='Output path (.csv or .xlsx); standard output when omitted')
        parser.add_argument('--save', action='store_true', help='Persist the run and its metrics')

    def handle(self, *args, **options):
        config = self._load_config(options.get('config'))
        for option in CONFIG_OPTIONS:
            if options.get(option) is not None:
                config[option] = options[option]
        if options.get('counters') is not None:
            config['counters'] = options['counters']
        if options['no_timing']:
            config['timing'] = False
        if options['compare_sequential']:
            config['compare_sequential'] = True

        try:
            if options['save']:
                frame = self._run_saved(config)
            else:
                frame = ExperimentRunner(config).run()
        except CommandError:
            raise
        except ABTreeError as e:
            raise CommandError(str(e))
        except Exception as e:
            logger.error(f"Experiment failed: {str(e)}")
            raise CommandError(f"Experiment failed: {str(e)}")

        if options.get('out'):
            write_metrics(frame, options['out'])
            self.stdout.write(self.style.SUCCESS(f"Wrote {len(frame)} rows to {options['out']}"))
        else:
            self.stdout.write(frame.to_csv(index=False), ending='')

        if not frame['valid'].all():
            raise CommandError('Some iterations produced an invalid tree')

    def _load_config(self, path) -> dict:
        if not path:
            return {}
        try:
            with open(path) as handle:
                loaded = yaml.safe_load(handle) or {}
        except (OSError, yaml.YAMLError) as e:
            raise CommandError(f"Cannot read config file {path}: {str(e)}")
        if not isinstance(loaded, dict):
            raise CommandError(f"Config file {path} must hold a mapping")
        return loaded

    def _run_saved(self, config: dict):
        run = ExperimentRun.objects.create(
            algorithm=config.get('algo', ''),
            distribution=config.get('dist', 'uniform'),
            tree_size=config.get('tree_size', 0),
            bulk_size=config.get('bulk_size', 0),
            iterations=config.get('iterations'),
            workers=config.get('workers'),
            seed=config.get('seed', 0),
            config={key: value for key, value in config.items()
                    if key in ('skew_factor', 'a', 'b', 'counters', 'timing', 'compare_sequential')},
        )
        frame = ExperimentService.execute(run)
        if frame is None:
            raise CommandError(f"Run {run.job_id} failed: {run.error_message}")
        self.stderr.write(f"Saved run {run.job_id}")
        return frame
