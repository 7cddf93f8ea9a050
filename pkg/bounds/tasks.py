from celery import group, shared_task
from celery.utils.log import get_task_logger
from django.conf import settings

from bounds.services import column_branch

logger = get_task_logger(__name__)


@shared_task
def search_column_branch(D: int, k: int, first_row: int):
    """
    Search one first-row branch of the column-count problem.
    """
    found = column_branch(D, k, first_row)
    if found:
        logger.info("Column branch D=%s k=%s row=%s found %s", D, k, first_row, list(found))
    return list(found) if found else None


def fan_out_branches(D: int, k: int, first_rows) -> list:
    """Run every branch as a task and collect the results in branch order."""
    if getattr(settings, "CELERY_TASK_ALWAYS_EAGER", False):
        results = [search_column_branch.apply(args=(D, k, row)).get() for row in first_rows]
    else:
        job = group(search_column_branch.s(D, k, row) for row in first_rows)
        results = job.apply_async().get()
    return [tuple(result) if result else None for result in results]
