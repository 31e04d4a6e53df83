from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from iacd.classifiers.classifier_bundle import ClassifierBundle
from iacd.global_settings import FAULT_CLASSES
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase


class ConfusionCounts(BaseModel):
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    false_positive_rate: float
    true_positive_rate: float


class EvaluationMetrics(BaseModel):
    """
    Metrics of one labelled data set. Class accuracy counts a client-fault sample as correct only
    when the set of positive modules equals the class's expected fault set (empty for cf_0).
    """
    dataset: str
    samples: int
    class_counts: dict[str, int]
    class_accuracy: dict[str, float]
    class_detection_rate: dict[str, float]
    healthy_accuracy: Optional[float] = None
    lpd: Optional[ConfusionCounts] = None
    cf_modules: dict[str, ConfusionCounts]


class EvaluationReport(BaseModel):
    datasets: list[EvaluationMetrics]


@dataclass(frozen=True)
class SampleOutcome:
    """
    Raw classifier output for one labelled signature: the LPD decision for link-labelled samples,
    every CF module's decision for client-fault samples.
    """
    source_id: str
    label: ClassLabel
    lpd_decision_value: Optional[float] = None
    module_decision_values: dict = field(default_factory=dict)

    @property
    def positive_faults(self) -> frozenset:
        return frozenset(ClassLabel.parse(name).index for name, value in self.module_decision_values.items()
                         if value >= 0)

    def predicted(self, label_map: dict) -> str:
        """
        Text of the predicted diagnosis: a link class, the healthy class name or the '+'-joined fault names.
        """
        if self.label.is_link:
            return str(ClassLabel.link_faulty() if self.lpd_decision_value >= 0 else ClassLabel.link_healthy())
        if not self.positive_faults:
            return label_map.get(str(ClassLabel.cf(0)), ClassLabel.cf(0).short_name)
        return "+".join(label_map.get(f"cf_{j}", ClassLabel.cf(j).short_name) for j in sorted(self.positive_faults))


def expected_faults(label: ClassLabel) -> frozenset:
    """
    CF modules expected to fire for a client-fault class (cf_5 expects the two buffer modules).
    """
    if label.index in FAULT_CLASSES:
        return frozenset(FAULT_CLASSES[label.index][1])
    return frozenset((label.index,))


def collect_outcomes(bundle: ClassifierBundle, database: SignatureDatabase) -> list:
    """
    Run the LPD on link-labelled and every CF module on client-fault-labelled signatures.
    """
    scaled = bundle.scale(database.matrix())
    lpd_values = np.atleast_1d(bundle.lpd_decision(scaled))
    module_values = {name: np.atleast_1d(values) for name, values in bundle.module_decisions(scaled).items()}
    outcomes = []
    for row, signature in enumerate(database.signatures):
        if signature.label.is_link:
            outcomes.append(SampleOutcome(signature.source_id, signature.label,
                                          lpd_decision_value=float(lpd_values[row])))
        else:
            outcomes.append(SampleOutcome(signature.source_id, signature.label, module_decision_values={
                name: float(values[row]) for name, values in module_values.items()}))
    return outcomes


def metrics_from_outcomes(outcomes: list, fault_classes: list, dataset: str = "") -> EvaluationMetrics:
    """
    Per-class accuracy and detection rate, LPD confusion counts and per-module confusion counts.

    A module's confusion counts cover the healthy client samples and the classes expecting it to fire.
    """
    labels = sorted({outcome.label for outcome in outcomes})
    class_counts, class_accuracy, class_detection_rate = {}, {}, {}
    for label in labels:
        members = [outcome for outcome in outcomes if outcome.label == label]
        class_counts[str(label)] = len(members)
        if label.is_link:
            faulty = label == ClassLabel.link_faulty()
            correct = [(outcome.lpd_decision_value >= 0) == faulty for outcome in members]
        else:
            expected = expected_faults(label)
            correct = [outcome.positive_faults == expected for outcome in members]
            if expected:
                class_detection_rate[str(label)] = _fraction(
                    [expected <= outcome.positive_faults for outcome in members])
        class_accuracy[str(label)] = _fraction(correct)

    link_outcomes = [outcome for outcome in outcomes if outcome.label.is_link]
    lpd = None
    if link_outcomes:
        lpd = _confusion([(outcome.label == ClassLabel.link_faulty(), outcome.lpd_decision_value >= 0)
                          for outcome in link_outcomes])

    cf_modules = {}
    for fault in fault_classes:
        pairs = [(fault.index in expected_faults(outcome.label), fault.index in outcome.positive_faults)
                 for outcome in outcomes
                 if not outcome.label.is_link
                 and (outcome.label.index == 0 or fault.index in expected_faults(outcome.label))]
        if pairs:
            cf_modules[str(fault)] = _confusion(pairs)

    return EvaluationMetrics(
        dataset=dataset,
        samples=len(outcomes),
        class_counts=class_counts,
        class_accuracy=class_accuracy,
        class_detection_rate=class_detection_rate,
        healthy_accuracy=class_accuracy.get(str(ClassLabel.cf(0))),
        lpd=lpd,
        cf_modules=cf_modules,
    )


def evaluate(bundle: ClassifierBundle, database: SignatureDatabase, dataset: str = "") -> EvaluationMetrics:
    """
    Evaluate a bundle on a labelled database.

    Args:
        bundle (ClassifierBundle): Trained classifiers.
        database (SignatureDatabase): Labelled signatures (link and/or client-fault classes).
        dataset (str): Name of the data set in the metrics.
    Return:
        (EvaluationMetrics): Per-class accuracy, LPD and per-module confusion counts.
    """
    metrics = metrics_from_outcomes(collect_outcomes(bundle, database), bundle.fault_classes, dataset)
    logger.info(
        f"\n"
        f"====================================================================\n"
        f"Evaluation of {dataset or 'data set'} ({metrics.samples} signatures) \n"
        + "".join(f"    {label}: {accuracy:.2%} of {metrics.class_counts[label]}\n"
                  for label, accuracy in metrics.class_accuracy.items())
        + f"===================================================================="
        f"\n")
    return metrics


def confusion_frame(outcomes: list, label_map: dict) -> pd.DataFrame:
    """
    Actual class (rows) against predicted diagnosis (columns).
    """
    actual = pd.Series([str(outcome.label) for outcome in outcomes], name="actual")
    predicted = pd.Series([outcome.predicted(label_map) for outcome in outcomes], name="predicted")
    return pd.crosstab(actual, predicted)


def accuracy_table(metrics: list, label_map: dict) -> pd.DataFrame:
    """
    Accuracy in percent with one row per data set and one column per class.
    """
    labels = sorted({ClassLabel.parse(label) for entry in metrics for label in entry.class_accuracy})
    columns = [label_map.get(str(label), label.short_name) for label in labels]
    rows = [[round(100.0 * entry.class_accuracy[str(label)], 2) if str(label) in entry.class_accuracy else np.nan
             for label in labels] for entry in metrics]
    return pd.DataFrame(rows, columns=columns, index=pd.Index([entry.dataset for entry in metrics], name="dataset"))


def write_metrics(metrics: list, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(EvaluationReport(datasets=metrics).model_dump_json(indent=2) + "\n")


# ----------------------------------------------------------------------------------------------------------------------
# Private helpers
# ----------------------------------------------------------------------------------------------------------------------

def _fraction(flags: list) -> float:
    return float(sum(flags)) / len(flags) if flags else 0.0


def _confusion(pairs: list) -> ConfusionCounts:
    """
    Counts from (actual positive, predicted positive) pairs.
    """
    tp = sum(1 for actual, predicted in pairs if actual and predicted)
    fp = sum(1 for actual, predicted in pairs if not actual and predicted)
    tn = sum(1 for actual, predicted in pairs if not actual and not predicted)
    fn = sum(1 for actual, predicted in pairs if actual and not predicted)
    return ConfusionCounts(
        tp=tp, fp=fp, tn=tn, fn=fn,
        accuracy=(tp + tn) / len(pairs),
        false_positive_rate=fp / (fp + tn) if fp + tn else 0.0,
        true_positive_rate=tp / (tp + fn) if tp + fn else 0.0,
    )
