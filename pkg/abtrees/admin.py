from django.contrib import admin
from .models import ExperimentRun, MetricsRecord


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['job_id', 'algorithm', 'distribution', 'tree_size', 'bulk_size', 'status', 'created_at']
    list_filter = ['status', 'algorithm', 'distribution', 'created_at']
    search_fields = ['job_id', 'error_message']


@admin.register(MetricsRecord)
class MetricsRecordAdmin(admin.ModelAdmin):
    list_display = ['run', 'iteration', 'algo', 'wall_time', 'visited_nodes', 'valid']
    list_filter = ['algo', 'valid']
    search_fields = ['run__job_id']
