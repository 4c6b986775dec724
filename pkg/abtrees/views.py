from rest_framework import viewsets, status
from rest_framework.decorators import action, api_view
from rest_framework.response import Response
from django.conf import settings
from django.http import HttpResponse
import pandas as pd
import logging

from .models import ExperimentRun
from .serializers import ExperimentRunSerializer, MetricsRecordSerializer
from .services import METRIC_COLUMNS, ExperimentService
from .tasks import execute_experiment_run

logger = logging.getLogger(__name__)


class ExperimentRunViewSet(viewsets.ModelViewSet):
    """ViewSet for experiment runs"""
    queryset = ExperimentRun.objects.all()
    serializer_class = ExperimentRunSerializer

    @action(detail=True, methods=['post'])
    def execute(self, request, pk=None):
        """Run the experiment, or queue it with ?background=1"""
        run = self.get_object()
        if run.status == 'processing':
            return Response(
                {'error': 'Run is already processing'},
                status=status.HTTP_409_CONFLICT
            )

        if request.query_params.get('background') in ('1', 'true'):
            try:
                execute_experiment_run.delay(run.pk)
            except Exception as e:
                logger.error(f"Failed to queue run {run.job_id}: {str(e)}")
                return Response(
                    {'error': 'Task queue not available'},
                    status=status.HTTP_503_SERVICE_UNAVAILABLE
                )
            return Response(
                {'message': 'Run queued', 'job_id': str(run.job_id)},
                status=status.HTTP_202_ACCEPTED
            )

        ExperimentService.execute(run)
        run.refresh_from_db()
        serializer = self.get_serializer(run)
        if run.status == 'failed':
            return Response(serializer.data, status=status.HTTP_400_BAD_REQUEST)
        return Response(serializer.data)

    @action(detail=True, methods=['get'])
    def metrics(self, request, pk=None):
        """Per-iteration metrics of a run"""
        run = self.get_object()
        serializer = MetricsRecordSerializer(run.metrics.all(), many=True)
        return Response(serializer.data)

    @action(detail=True, methods=['get'])
    def csv(self, request, pk=None):
        """Per-iteration metrics as a CSV download"""
        run = self.get_object()
        rows = list(run.metrics.values(*METRIC_COLUMNS))
        frame = pd.DataFrame(rows, columns=METRIC_COLUMNS)
        response = HttpResponse(frame.to_csv(index=False), content_type='text/csv')
        response['Content-Disposition'] = f'attachment; filename="run-{run.job_id}.csv"'
        return response


@api_view(['GET'])
def health_check(request):
    """Health check endpoint"""
    return Response({
        'status': 'healthy',
        'default_a': settings.ABTREE_DEFAULT_A,
        'default_b': settings.ABTREE_DEFAULT_B,
        'workers': settings.ABTREE_WORKERS,
        'runs': ExperimentRun.objects.count(),
    })
