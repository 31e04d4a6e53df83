from dataclasses import dataclass, field
from typing import Optional

from loguru import logger
from pydantic import BaseModel

from iacd.classifiers.classifier_bundle import ClassifierBundle
from iacd.signature.signature import check_trace_pair, connection_source_id, extract_features
from iacd.traces.packet_record import TraceFile

LINK_FAULTY_STATUS = "FAULTY"
LINK_HEALTHY_STATUS = "HEALTHY"
LINK_PROBLEM = "LINK_PROBLEM"
CLIENT_FAULTS = "CLIENT_FAULTS"
CLIENT_HEALTHY = "CLIENT_HEALTHY"


class DiagnosisReportDocument(BaseModel):
    source_id: str
    overall: str
    link_status: str
    lpd_decision_value: float
    client_faults: list[str]
    client_fault_names: list[str]
    module_decision_values: dict[str, float]
    cf_modules_run: bool
    summary: str


@dataclass(frozen=True)
class DiagnosisReport:
    """
    Outcome of diagnosing one trace pair. client_faults lists the positive CF modules in module
    order; module_decision_values is empty when the CF stage was skipped.
    """
    link_status: str
    lpd_decision_value: float
    client_faults: tuple
    overall: str
    module_decision_values: dict = field(default_factory=dict)
    fault_names: tuple = ()
    source_id: str = ""

    @property
    def cf_modules_run(self) -> bool:
        return bool(self.module_decision_values)

    def summary(self) -> str:
        """
        One-line human summary, e.g. "CLIENT_FAULTS: RBuf, WBuf".
        """
        if self.overall == CLIENT_FAULTS:
            return f"{CLIENT_FAULTS}: {', '.join(self.fault_names)}"
        return self.overall

    def to_document(self) -> DiagnosisReportDocument:
        return DiagnosisReportDocument(
            source_id=self.source_id,
            overall=self.overall,
            link_status=self.link_status,
            lpd_decision_value=self.lpd_decision_value,
            client_faults=[str(label) for label in self.client_faults],
            client_fault_names=list(self.fault_names),
            module_decision_values=dict(self.module_decision_values),
            cf_modules_run=self.cf_modules_run,
            summary=self.summary(),
        )


def diagnose(bundle: ClassifierBundle, client: TraceFile, server: TraceFile, run_both: bool = False) -> DiagnosisReport:
    """
    Diagnose a client/server trace pair: the LPD decides whether the link is faulty; unless it is (or
    run_both is set) every CF module runs and the positive ones form the client fault set.

    Args:
        bundle (ClassifierBundle): Trained classifiers.
        client (TraceFile): Trace captured at the client.
        server (TraceFile): Trace captured at the server.
        run_both (bool): Run the CF modules even when the link is faulty.
    Return:
        (DiagnosisReport): The diagnosis.
    Raises:
        TracePairMismatch: When the traces describe different connections.
    """
    check_trace_pair(client, server)
    report = diagnose_features(bundle, extract_features(client, server), run_both, connection_source_id(client))
    logger.info(f"Diagnosis of {report.source_id}: {report.summary()} (LPD decision {report.lpd_decision_value:.4f})")
    return report


def diagnose_features(bundle: ClassifierBundle, features, run_both: bool = False,
                      source_id: Optional[str] = None) -> DiagnosisReport:
    """
    Diagnose a raw signature vector; see diagnose().
    """
    scaled = bundle.scale(features)
    lpd_value = float(bundle.lpd_decision(scaled))
    link_faulty = lpd_value >= 0
    link_status = LINK_FAULTY_STATUS if link_faulty else LINK_HEALTHY_STATUS
    if link_faulty and not run_both:
        return DiagnosisReport(link_status=link_status, lpd_decision_value=lpd_value, client_faults=(),
                               overall=LINK_PROBLEM, source_id=source_id or "")

    decisions = {label: float(value) for label, value in bundle.module_decisions(scaled).items()}
    faults = tuple(label for label in bundle.fault_classes if decisions[str(label)] >= 0)
    if faults:
        overall = CLIENT_FAULTS
    else:
        overall = LINK_PROBLEM if link_faulty else CLIENT_HEALTHY
    return DiagnosisReport(
        link_status=link_status,
        lpd_decision_value=lpd_value,
        client_faults=faults,
        overall=overall,
        module_decision_values=decisions,
        fault_names=tuple(bundle.label_map.get(str(label), label.short_name) for label in faults),
        source_id=source_id or "",
    )


def write_report(report: DiagnosisReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(report.to_document().model_dump_json(indent=2) + "\n")
