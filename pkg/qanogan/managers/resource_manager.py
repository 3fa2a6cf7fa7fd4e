"""Process resource sampling for run summaries."""
import logging
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import psutil


@dataclass(frozen=True)
class ResourceSnapshot:
    memory_rss: int
    cpu_percent: float
    num_threads: int
    elapsed: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ResourceMonitor:
    """Samples memory, CPU and thread usage of the current process."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.process = psutil.Process()
        self.started = time.perf_counter()
        self.start_snapshot: Optional[ResourceSnapshot] = None
        # primes psutil's CPU counter so the next reading covers this interval
        self.process.cpu_percent()

    def snapshot(self) -> ResourceSnapshot:
        with self.process.oneshot():
            return ResourceSnapshot(
                memory_rss=int(self.process.memory_info().rss),
                cpu_percent=float(self.process.cpu_percent()),
                num_threads=int(self.process.num_threads()),
                elapsed=time.perf_counter() - self.started,
            )

    def start(self) -> ResourceSnapshot:
        self.started = time.perf_counter()
        self.start_snapshot = self.snapshot()
        self.logger.debug(f"Resource usage at start: {self.start_snapshot}")
        return self.start_snapshot

    def stop(self) -> Dict[str, Any]:
        """Final usage, with the start sample under `start_` keys when one was taken."""
        usage: Dict[str, Any] = {}
        try:
            final = self.snapshot()
            usage.update(final.to_dict())
            if self.start_snapshot is not None:
                usage.update({f"start_{k}": v for k, v in self.start_snapshot.to_dict().items()})
        except psutil.Error as e:
            self.logger.warning(f"Failed to monitor resources: {e}")
        self.logger.info(f"Final resource usage: {usage}")
        return usage
