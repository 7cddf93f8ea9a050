import os

try:
    from celery import Celery
except ImportError:
    Celery = None

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "pstlab.settings")

if Celery:
    app = Celery("pstlab")
    app.config_from_object("django.conf:settings", namespace="CELERY")
    app.autodiscover_tasks()
