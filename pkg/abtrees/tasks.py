from celery import shared_task
import logging

from .models import ExperimentRun
from .services import ExperimentService

logger = logging.getLogger(__name__)


@shared_task
def execute_experiment_run(run_pk: int) -> str:
    """Execute a persisted run in a worker process"""
    try:
        run = ExperimentRun.objects.get(pk=run_pk)
    except ExperimentRun.DoesNotExist:
        logger.error(f"Experiment run {run_pk} does not exist")
        return 'missing'
    ExperimentService.execute(run)
    return run.status
