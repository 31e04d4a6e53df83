from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

from loguru import logger

from iacd.traces.packet_record import CapturePoint, ConnectionKey, TraceFile


@dataclass(frozen=True)
class RawCapture:
    """
    Bytes of a trace file as loaded from disk, before decoding.
    """
    content: bytes
    source: str
    file_format: str

    @property
    def size(self) -> int:
        return len(self.content)


class AbstractTraceReader(ABC):
    """
    Abstract base class for trace file readers.
    """

    def __init__(self, path_to_file: str, capture_point: Optional[CapturePoint] = None,
                 connection: Optional[ConnectionKey] = None):
        """
        Initialize the AbstractTraceReader.

        Args:
            path_to_file (str): Path to the trace file to be read.
            capture_point (CapturePoint): Capture point for formats that do not record it.
            connection (ConnectionKey): Explicit connection to select from multi-connection captures.
        """
        self.path_to_file = path_to_file
        self.capture_point = capture_point
        self.connection = connection

    # ------------------------------------------------------------------------------------------------------------------
    # Abstract Methods
    # ------------------------------------------------------------------------------------------------------------------

    @abstractmethod
    def load_file(self) -> RawCapture:
        """
        Read the raw bytes of the trace file.

        Return:
            (RawCapture): Loaded file content
        """
        pass

    @abstractmethod
    def parse(self, raw_capture: RawCapture) -> TraceFile:
        """
        Decode the loaded content into a trace.

        Arg:
            raw_capture (RawCapture): Content of the file.
        Return:
            (TraceFile): Decoded trace.
        """
        pass

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def read_trace(self) -> TraceFile:
        """
        Load and decode the file into a trace.

        Return:
            (TraceFile): Decoded trace.
        """
        raw_capture = self.load_file()
        trace = self.parse(raw_capture)

        data_packets = sum(1 for packet in trace.packets if packet.is_data)
        elapsed_ms = (trace.packets[-1].timestamp - trace.packets[0].timestamp) / 1000.0
        logger.info(
            f"\n"
            f"====================================================================\n"
            f"Summary for trace: {self.path_to_file} ({raw_capture.file_format}, {raw_capture.size} bytes) \n"
            f"    Capture point: {trace.capture_point.value}, \n"
            f"    Connection: {tuple(trace.connection_key)}, \n"
            f"    Packets: {len(trace)} ({data_packets} carrying data), \n"
            f"    Elapsed: {elapsed_ms:.3f} ms\n"
            f"===================================================================="
            f"\n")
        return trace
