from typing import Optional

from iacd.traces.abstract_trace_reader import AbstractTraceReader
from iacd.traces.canonical_trace_reader import CanonicalTraceReader
from iacd.traces.packet_record import CapturePoint, ConnectionKey
from iacd.traces.pcap_trace_reader import PcapTraceReader

PCAP_EXTENSIONS = ("pcap", "cap")
CANONICAL_EXTENSIONS = ("trace", "txt")


class TraceReaderFactory:

    @staticmethod
    def create_based_on_file_type(path_to_file: str, capture_point: Optional[CapturePoint] = None,
                                  connection: Optional[ConnectionKey] = None) -> AbstractTraceReader:
        """
        Factory method to create a trace reader based on the file extension.

        Args:
            path_to_file (str): Path to the trace file.
            capture_point (CapturePoint): Capture point, used by formats that do not record it.
            connection (ConnectionKey): Optional explicit connection to select.

        Return:
            (AbstractTraceReader): An instance of a reader for the specified file type.
        """
        file_type = path_to_file.split('.')[-1].lower().rstrip()
        if file_type in PCAP_EXTENSIONS:
            return PcapTraceReader(path_to_file, capture_point=capture_point, connection=connection)
        elif file_type in CANONICAL_EXTENSIONS:
            return CanonicalTraceReader(path_to_file, capture_point=capture_point, connection=connection)
        else:
            raise ValueError(f"Unsupported trace file type: {file_type}")
