"""
Stage Runner
============
Drives frames through the ordered stage list, either sequentially or with
one worker thread per stage connected by bounded FIFO queues. A full queue
blocks its producer; frames leave every stage in the order they entered.
"""

import queue
import threading
from typing import Iterable, List, Optional

from config.settings import QUEUE_POLL_INTERVAL
from pipeline.base_stage import FramePacket, PipelineStage, PipelineStopped, StageFailure
from utils.logger import setup_logger

_END = object()


class PoseFeed:
    """
    Counts frames whose pose the odometry has published.

    The tracking stage needs the pose prediction made from every earlier
    frame, so it waits here until the odometry has caught up.
    """

    def __init__(self, stop_event: Optional[threading.Event] = None, poll_interval: float = QUEUE_POLL_INTERVAL):
        self.published = 0
        self.stop_event = stop_event or threading.Event()
        self.poll_interval = poll_interval
        self._condition = threading.Condition()

    def publish(self, count: int) -> None:
        with self._condition:
            self.published = max(self.published, int(count))
            self._condition.notify_all()

    def wait_for(self, count: int) -> None:
        """Block until at least count poses are published."""
        with self._condition:
            while self.published < count:
                if self.stop_event.is_set():
                    raise PipelineStopped()
                self._condition.wait(self.poll_interval)


class StageRunner:
    """
    Runs packets through stages in order.
    """

    def __init__(self, stages: List[PipelineStage], capacity: int = 4, sequential: bool = False,
                 stop_event: Optional[threading.Event] = None, poll_interval: float = QUEUE_POLL_INTERVAL):
        if capacity < 1:
            raise ValueError(f"queue capacity must be >= 1, got {capacity}")
        self.stages = stages
        self.capacity = capacity
        self.sequential = sequential
        self.stop_event = stop_event or threading.Event()
        self.poll_interval = poll_interval
        self.logger = setup_logger("StageRunner")
        self.failure: Optional[BaseException] = None
        self.completed = 0
        self.max_depths: List[int] = []

    def run(self, packets: Iterable[FramePacket]) -> int:
        """
        Process all packets.

        Args:
            packets: Source packets in timestamp order

        Returns:
            Number of packets that left the last stage

        Raises:
            StageFailure: The first failure of any stage
        """
        if self.sequential:
            return self._run_sequential(packets)
        return self._run_threaded(packets)

    def _run_sequential(self, packets: Iterable[FramePacket]) -> int:
        for packet in packets:
            for stage in self.stages:
                packet = stage.run(packet)
            self.completed += 1
        for stage in self.stages:
            stage.finish()
        return self.completed

    def _put(self, q: queue.Queue, item) -> bool:
        while not self.stop_event.is_set():
            try:
                q.put(item, timeout=self.poll_interval)
                return True
            except queue.Full:
                continue
        return False

    def _get(self, q: queue.Queue):
        while not self.stop_event.is_set():
            try:
                return q.get(timeout=self.poll_interval)
            except queue.Empty:
                continue
        return _END

    def _fail(self, error: BaseException) -> None:
        if self.failure is None:
            self.failure = error
        self.stop_event.set()

    def _source(self, packets: Iterable[FramePacket], out: queue.Queue) -> None:
        try:
            for packet in packets:
                if not self._put(out, packet):
                    return
        except Exception as e:
            self._fail(StageFailure("source", None, e))
            return
        self._put(out, _END)

    def _worker(self, stage: PipelineStage, inbox: queue.Queue, outbox: Optional[queue.Queue], index: int) -> None:
        while True:
            item = self._get(inbox)
            self.max_depths[index] = max(self.max_depths[index], inbox.qsize())
            if item is _END:
                break
            try:
                result = stage.run(item)
            except PipelineStopped:
                return
            except StageFailure as e:
                self._fail(e)
                return
            if outbox is not None:
                if not self._put(outbox, result):
                    return
            else:
                self.completed += 1
        try:
            stage.finish()
        except Exception as e:
            self._fail(StageFailure(stage.name, None, e))
            return
        if outbox is not None:
            self._put(outbox, _END)

    def _run_threaded(self, packets: Iterable[FramePacket]) -> int:
        queues = [queue.Queue(maxsize=self.capacity) for _ in self.stages]
        self.max_depths = [0] * len(self.stages)
        threads = [threading.Thread(target=self._source, args=(packets, queues[0]), name="source", daemon=True)]
        for i, stage in enumerate(self.stages):
            outbox = queues[i + 1] if i + 1 < len(self.stages) else None
            threads.append(threading.Thread(target=self._worker, args=(stage, queues[i], outbox, i),
                                            name=f"stage-{stage.name}", daemon=True))
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        if self.failure is not None:
            raise self.failure
        self.logger.debug(f"Max queue depths: {dict(zip((s.name for s in self.stages), self.max_depths))}")
        return self.completed
