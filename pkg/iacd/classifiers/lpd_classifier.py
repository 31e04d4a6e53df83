from dataclasses import dataclass
from typing import Optional

from iacd.classifiers.module_training import SvmModule, fit_module
from iacd.classifiers.training_config import TrainingConfig, create_default_training_config
from iacd.common.errors import SingleClass
from iacd.preprocess.label_encoder import encode_labels
from iacd.preprocess.min_max_scaler import ScalerParams, apply_scaler, fit_scaler
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase


@dataclass(frozen=True, eq=False)
class LpdModel(SvmModule):
    """
    Link problem detector: positive decision values mean a faulty access link.
    """


def train_lpd(database: SignatureDatabase, config: Optional[TrainingConfig] = None,
              scaler: Optional[ScalerParams] = None) -> tuple:
    """
    Train the link problem detector on LINK_FAULTY (+1) vs LINK_HEALTHY (-1) signatures.

    Args:
        database (SignatureDatabase): Database whose link-labelled signatures are used.
        config (TrainingConfig): Training configuration; defaults when None.
        scaler (ScalerParams): Shared scaler; fitted on the link signatures when None.
    Return:
        (tuple): (LpdModel, ScalerParams)
    Raises:
        SingleClass: When one of the two link classes is missing.
    """
    config = config or create_default_training_config()
    faulty, healthy = ClassLabel.link_faulty(), ClassLabel.link_healthy()
    present = set(database.labels)
    if faulty not in present or healthy not in present:
        raise SingleClass(f"LPD training needs both {faulty} and {healthy} signatures, got {database.class_counts}")

    link_database = database.subset([faulty, healthy])
    scaler = scaler or fit_scaler(link_database)
    vectors, targets = encode_labels(link_database, faulty, healthy)
    selected_indices, svm, selection = fit_module(apply_scaler(vectors, scaler), targets, scaler, config.lpd, config,
                                                  "LPD classifier")
    return LpdModel(svm=svm, selected_indices=selected_indices,
                    cv_accuracy_by_size=selection.cv_accuracy_by_size), scaler
