"""
Celery application for background experiment runs.
"""

import os

from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'abtree_lab.settings')

app = Celery('abtree_lab')
app.config_from_object('django.conf:settings', namespace='CELERY')
app.autodiscover_tasks()
