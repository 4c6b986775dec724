from django.db import models
from django.utils import timezone
import uuid

from .keygen import DISTRIBUTION_CHOICES
from .validators import ALGORITHMS


class ExperimentRun(models.Model):
    """Track a configured experiment and its execution"""
    RUN_STATUS = [
        ('pending', 'Pending'),
        ('processing', 'Processing'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]
    ALGORITHM_CHOICES = [(algo, algo) for algo in ALGORITHMS]

    job_id = models.UUIDField(default=uuid.uuid4, unique=True, editable=False, db_index=True)
    algorithm = models.CharField(max_length=32, choices=ALGORITHM_CHOICES)
    distribution = models.CharField(max_length=32, choices=DISTRIBUTION_CHOICES, default='uniform')
    tree_size = models.IntegerField()
    bulk_size = models.IntegerField(default=0)
    iterations = models.IntegerField(null=True, blank=True)
    workers = models.IntegerField(null=True, blank=True)
    seed = models.IntegerField(default=0)
    config = models.JSONField(default=dict)  # Full experiment configuration
    summary = models.JSONField(null=True, blank=True)
    status = models.CharField(max_length=20, choices=RUN_STATUS, default='pending')
    error_message = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(null=True, blank=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.algorithm} run {str(self.job_id)[:8]}... ({self.get_status_display()})"

    def get_elapsed_time(self):
        """Calculate elapsed time in seconds"""
        if self.started_at:
            end_time = self.completed_at or timezone.now()
            return (end_time - self.started_at).total_seconds()
        return 0

    def build_config(self) -> dict:
        """Experiment configuration from the model fields, merged over ``config``"""
        config = dict(self.config or {})
        config.update({
            'algo': self.algorithm,
            'dist': self.distribution,
            'tree_size': self.tree_size,
            'bulk_size': self.bulk_size,
            'iterations': self.iterations,
            'workers': self.workers,
            'seed': self.seed,
        })
        return config


class MetricsRecord(models.Model):
    """One iteration's metrics row"""
    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name='metrics'
    )
    iteration = models.IntegerField()
    algo = models.CharField(max_length=32)
    dist = models.CharField(max_length=32)
    tree_size = models.IntegerField()
    bulk_size = models.IntegerField()
    workers = models.IntegerField()
    seed = models.IntegerField()
    wall_time = models.FloatField()
    split_time = models.FloatField(default=0.0)
    update_time = models.FloatField(default=0.0)
    join_time = models.FloatField(default=0.0)
    visited_nodes = models.BigIntegerField(default=0)
    node_splits = models.BigIntegerField(default=0)
    stack_pops = models.BigIntegerField(default=0)
    stack_combines = models.BigIntegerField(default=0)
    pj_iterations = models.IntegerField(default=0)
    peak_rank = models.IntegerField(default=0)
    result_size = models.BigIntegerField(default=0)
    valid = models.BooleanField(default=True)
    speedup = models.FloatField(null=True, blank=True)

    class Meta:
        ordering = ['run', 'iteration']

    def __str__(self):
        return f"{self.algo} iteration {self.iteration} ({self.wall_time:.4f}s)"
