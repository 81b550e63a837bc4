"""
Monitoring and metrics collection for the application
"""
from prometheus_client import Counter, Histogram, generate_latest, REGISTRY
from functools import wraps
from pathlib import Path
import time
import logging
from typing import Callable, Any, Optional

from app.core.config import settings

logger = logging.getLogger(__name__)

# Define metrics
operations_total = Counter(
    'thetaspec_operations_total',
    'Total monitored operations',
    ['operation', 'status']
)

operation_duration_seconds = Histogram(
    'thetaspec_operation_duration_seconds',
    'Monitored operation duration in seconds',
    ['operation'],
    buckets=(0.001, 0.01, 0.1, 0.5, 1.0, 5.0, 15.0, 60.0, 180.0)
)

zeros_found_total = Counter(
    'thetaspec_zeros_found_total',
    'Constant-term zeros located on the critical line'
)

roots_solved_total = Counter(
    'thetaspec_roots_solved_total',
    'Discrete-spectrum roots solved, one per bracket'
)

height_adjustments_total = Counter(
    'thetaspec_height_adjustments_total',
    'Truncation height bumps caused by a vanishing period'
)


def monitor_function(func_name: str = None):
    """Decorator to monitor function execution"""
    def decorator(func: Callable) -> Callable:
        name = func_name or f"{func.__module__}.{func.__name__}"

        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            start_time = time.time()
            status = "success"
            try:
                return func(*args, **kwargs)
            except Exception as e:
                status = "error"
                logger.error(f"Error in {name}: {str(e)}")
                raise
            finally:
                duration = time.time() - start_time
                if settings.METRICS_ENABLED:
                    operations_total.labels(operation=name, status=status).inc()
                    operation_duration_seconds.labels(operation=name).observe(duration)
                logger.debug(f"{name} completed in {duration:.2f}s with status: {status}")

        return wrapper

    return decorator


def record_zeros(count: int) -> None:
    if settings.METRICS_ENABLED and count > 0:
        zeros_found_total.inc(count)


def record_roots(count: int) -> None:
    if settings.METRICS_ENABLED and count > 0:
        roots_solved_total.inc(count)


def record_height_adjustment() -> None:
    if settings.METRICS_ENABLED:
        height_adjustments_total.inc()


def write_metrics(path: Optional[Path]) -> None:
    """Write the prometheus text exposition of the default registry"""
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(generate_latest(REGISTRY))
    logger.info(f"Metrics written to {path}")
