from dataclasses import dataclass
from typing import Optional

from joblib import Parallel, delayed
from loguru import logger

from iacd.classifiers.module_training import SvmModule, fit_module
from iacd.classifiers.training_config import TrainingConfig, create_default_training_config
from iacd.common.errors import InsufficientSamples, InvalidConfiguration, NoHealthyBaseline
from iacd.preprocess.label_encoder import encode_labels
from iacd.preprocess.min_max_scaler import ScalerParams, apply_scaler, fit_scaler
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase


@dataclass(frozen=True, eq=False)
class CfModuleModel(SvmModule):
    """
    One CF-classifier module: fires (positive decision value) when its client fault is present.
    """
    fault_class: ClassLabel


def train_cfd(database: SignatureDatabase, fault_classes: Optional[list] = None,
              config: Optional[TrainingConfig] = None, scaler: Optional[ScalerParams] = None) -> list:
    """
    Train one CF-classifier module per fault class j on cf_j (+1) against cf_0 (-1). Each module sees
    only its own two classes and trains independently of the others.

    Args:
        database (SignatureDatabase): Database with client-fault labels.
        fault_classes (list): Fault class indices j >= 1; the configured classes when None.
        config (TrainingConfig): Training configuration; defaults when None.
        scaler (ScalerParams): Shared scaler; fitted on the client-fault signatures when None.
    Return:
        (list): CfModuleModel per fault class, in fault class order.
    Raises:
        NoHealthyBaseline: When no cf_0 signature exists.
        InsufficientSamples: When a fault class has no signature.
    """
    config = config or create_default_training_config()
    fault_classes = sorted(fault_classes or config.fault_classes)
    unconfigured = [j for j in fault_classes if j < 1 or j not in config.cf_modules]
    if unconfigured:
        raise InvalidConfiguration(f"fault classes {unconfigured} have no CF module configuration")
    present = set(database.labels)
    if ClassLabel.cf(0) not in present:
        raise NoHealthyBaseline(f"CFD training needs cf_0 signatures, got {database.class_counts}")
    missing = [j for j in fault_classes if ClassLabel.cf(j) not in present]
    if missing:
        raise InsufficientSamples(f"no training signature for fault classes {[f'cf_{j}' for j in missing]}")

    if scaler is None:
        scaler = fit_scaler(database.subset([label for label in present if not label.is_link]))
    logger.info(f"Training {len(fault_classes)} CF modules {fault_classes} on {database.class_counts}")
    modules = Parallel(n_jobs=config.n_jobs)(
        delayed(_train_module)(database, j, config, scaler) for j in fault_classes
    )
    return list(modules)


def _train_module(database: SignatureDatabase, j: int, config: TrainingConfig,
                  scaler: ScalerParams) -> CfModuleModel:
    fault, healthy = ClassLabel.cf(j), ClassLabel.cf(0)
    vectors, targets = encode_labels(database.subset([fault, healthy]), fault, healthy)
    module_config = config.cf_modules[j]
    selected_indices, svm, selection = fit_module(apply_scaler(vectors, scaler), targets, scaler, module_config,
                                                  config, f"CF module {fault} ({fault.short_name})")
    return CfModuleModel(svm=svm, selected_indices=selected_indices,
                         cv_accuracy_by_size=selection.cv_accuracy_by_size, fault_class=fault)
