import django.db.models.deletion
import uuid
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('job_id', models.UUIDField(db_index=True, default=uuid.uuid4, editable=False, unique=True)),
                ('algorithm', models.CharField(choices=[('SJ', 'SJ'), ('PPJ', 'PPJ'), ('PJ', 'PJ'), ('OPJ', 'OPJ'), ('seq_split', 'seq_split'), ('par_split', 'par_split'), ('seq_bulk', 'seq_bulk'), ('ps_ppj', 'ps_ppj'), ('ps_pj', 'ps_pj'), ('ps_ppj_db', 'ps_ppj_db'), ('union', 'union'), ('intersection', 'intersection'), ('difference', 'difference'), ('symmetric_difference', 'symmetric_difference')], max_length=32)),
                ('distribution', models.CharField(choices=[('uniform', 'Uniform'), ('skewed_uniform', 'Skewed uniform'), ('normal', 'Normal'), ('increasing_uniform', 'Increasing uniform')], default='uniform', max_length=32)),
                ('tree_size', models.IntegerField()),
                ('bulk_size', models.IntegerField(default=0)),
                ('iterations', models.IntegerField(blank=True, null=True)),
                ('workers', models.IntegerField(blank=True, null=True)),
                ('seed', models.IntegerField(default=0)),
                ('config', models.JSONField(default=dict)),
                ('summary', models.JSONField(blank=True, null=True)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('processing', 'Processing'), ('completed', 'Completed'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('error_message', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('started_at', models.DateTimeField(blank=True, null=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='MetricsRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('iteration', models.IntegerField()),
                ('algo', models.CharField(max_length=32)),
                ('dist', models.CharField(max_length=32)),
                ('tree_size', models.IntegerField()),
                ('bulk_size', models.IntegerField()),
                ('workers', models.IntegerField()),
                ('seed', models.IntegerField()),
                ('wall_time', models.FloatField()),
                ('split_time', models.FloatField(default=0.0)),
                ('update_time', models.FloatField(default=0.0)),
                ('join_time', models.FloatField(default=0.0)),
                ('visited_nodes', models.BigIntegerField(default=0)),
                ('node_splits', models.BigIntegerField(default=0)),
                ('stack_pops', models.BigIntegerField(default=0)),
                ('stack_combines', models.BigIntegerField(default=0)),
                ('pj_iterations', models.IntegerField(default=0)),
                ('peak_rank', models.IntegerField(default=0)),
                ('result_size', models.BigIntegerField(default=0)),
                ('valid', models.BooleanField(default=True)),
                ('speedup', models.FloatField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='metrics', to='abtrees.experimentrun')),
            ],
            options={
                'ordering': ['run', 'iteration'],
            },
        ),
    ]
