from rest_framework import serializers
from .models import ExperimentRun, MetricsRecord
from .services import METRIC_COLUMNS
from .validators import ExperimentConfigValidator


class MetricsRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = MetricsRecord
        fields = ['id'] + METRIC_COLUMNS


class ExperimentRunSerializer(serializers.ModelSerializer):
    elapsed_time = serializers.SerializerMethodField()

    class Meta:
        model = ExperimentRun
        fields = [
            'id', 'job_id', 'algorithm', 'distribution', 'tree_size', 'bulk_size',
            'iterations', 'workers', 'seed', 'config', 'summary', 'status',
            'error_message', 'elapsed_time', 'created_at', 'started_at', 'completed_at'
        ]
        read_only_fields = [
            'job_id', 'summary', 'status', 'error_message', 'elapsed_time',
            'created_at', 'started_at', 'completed_at'
        ]

    def get_elapsed_time(self, obj):
        return obj.get_elapsed_time()

    def validate(self, attrs):
        instance = ExperimentRun(**{**self._current(), **attrs})
        is_valid, error = ExperimentConfigValidator.validate_config(
            {key: value for key, value in instance.build_config().items() if value is not None}
        )
        if not is_valid:
            raise serializers.ValidationError({'config': error})
        return attrs

    def _current(self) -> dict:
        if self.instance is None:
            return {}
        return {
            field: getattr(self.instance, field)
            for field in ['algorithm', 'distribution', 'tree_size', 'bulk_size',
                          'iterations', 'workers', 'seed', 'config']
        }
