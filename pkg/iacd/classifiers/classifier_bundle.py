from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError

from iacd.classifiers.cfd_classifier import CfModuleModel, train_cfd
from iacd.classifiers.lpd_classifier import LpdModel, train_lpd
from iacd.classifiers.training_config import TrainingConfig, create_default_training_config
from iacd.common.errors import DimensionMismatch, InvalidModel, NoHealthyBaseline, SchemaError
from iacd.global_settings import CATALOGUE_VERSION
from iacd.preprocess.min_max_scaler import ScalerParams, apply_scaler, fit_scaler
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase
from iacd.svm.trained_svm import TrainedSVM, TrainedSvmDocument

BUNDLE_FORMAT = "iacd-classifier-bundle"
BUNDLE_VERSION = 1


class ScalerDocument(BaseModel):
    dimension: int
    retained_indices: list[int]
    minimums: list[float]
    maximums: list[float]


class ModuleDocument(BaseModel):
    """
    Persisted LPD or CF module: the SVM plus the catalogue indices it reads.
    """
    fault_class: Optional[str] = None
    selected_indices: list[int]
    cv_accuracy_by_size: dict[int, float]
    svm: TrainedSvmDocument


class ClassifierBundleDocument(BaseModel):
    """
    Model bundle file. Unknown fields written by newer versions are ignored on load.
    """
    model_config = ConfigDict(extra="ignore")

    format: str = BUNDLE_FORMAT
    version: int = BUNDLE_VERSION
    catalogue_version: str
    label_map: dict[str, str]
    scaler: ScalerDocument
    lpd: ModuleDocument
    cf_modules: list[ModuleDocument]


@dataclass(frozen=True, eq=False)
class ClassifierBundle:
    """
    Everything needed to diagnose a trace pair: the shared scaler, the LPD model and the ordered
    network of CF modules.

    Sample Usage:
    ```python
    bundle = train_bundle(SignatureDatabase.load("train.jsonl"))
    bundle.save("model.json")
    report = diagnose(ClassifierBundle.load("model.json"), client_trace, server_trace)
    ```
    """
    scaler: ScalerParams
    lpd: LpdModel
    cf_modules: tuple
    catalogue_version: str = CATALOGUE_VERSION
    label_map: Optional[dict] = None

    def __post_init__(self):
        object.__setattr__(self, "cf_modules", tuple(self.cf_modules))
        if not self.cf_modules:
            raise InvalidModel("a classifier bundle needs at least one CF module")
        fault_classes = [module.fault_class for module in self.cf_modules]
        if len(set(fault_classes)) != len(fault_classes):
            raise InvalidModel(f"duplicate CF modules: {[str(label) for label in fault_classes]}")
        for module in (self.lpd, *self.cf_modules):
            self.scaler.positions(module.selected_indices)
        if self.label_map is None:
            labels = [ClassLabel.link_faulty(), ClassLabel.link_healthy(), ClassLabel.cf(0), *fault_classes]
            object.__setattr__(self, "label_map", {str(label): label.short_name for label in labels})

    @property
    def fault_classes(self) -> list:
        return [module.fault_class for module in self.cf_modules]

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def scale(self, features) -> np.ndarray:
        """
        Scale raw signature vector(s) into the shared retained-index space.
        """
        features = np.asarray(features, dtype=float)
        if features.shape[-1] != self.scaler.dimension:
            raise DimensionMismatch(f"bundle expects signatures of dimension {self.scaler.dimension}, "
                                    f"got {features.shape[-1]}")
        return apply_scaler(features, self.scaler)

    def lpd_decision(self, scaled):
        return self.lpd.decision_value(scaled, self.scaler)

    def module_decisions(self, scaled) -> dict:
        """
        Decision value(s) of every CF module, keyed by fault class text, in module order.
        """
        return {str(module.fault_class): module.decision_value(scaled, self.scaler) for module in self.cf_modules}

    def with_module(self, module: CfModuleModel) -> "ClassifierBundle":
        """
        Bundle with one more CF module appended; existing modules are reused verbatim.
        """
        label_map = dict(self.label_map)
        label_map[str(module.fault_class)] = module.fault_class.short_name
        return replace(self, cf_modules=self.cf_modules + (module,), label_map=label_map)

    def to_document(self) -> ClassifierBundleDocument:
        return ClassifierBundleDocument(
            catalogue_version=self.catalogue_version,
            label_map=self.label_map,
            scaler=ScalerDocument(dimension=self.scaler.dimension, retained_indices=list(self.scaler.retained_indices),
                                  minimums=list(self.scaler.minimums), maximums=list(self.scaler.maximums)),
            lpd=_module_document(self.lpd),
            cf_modules=[_module_document(module) for module in self.cf_modules],
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_document().model_dump_json(indent=2) + "\n")
        logger.info(f"Saved classifier bundle (LPD + {len(self.cf_modules)} CF modules) to {path}")

    # ------------------------------------------------------------------------------------------------------------------
    # Static Methods
    # ------------------------------------------------------------------------------------------------------------------

    @staticmethod
    def from_document(document: ClassifierBundleDocument) -> "ClassifierBundle":
        if document.format != BUNDLE_FORMAT:
            raise InvalidModel(f"Unsupported bundle format: {document.format}")
        if document.version > BUNDLE_VERSION:
            logger.warning(f"Bundle version {document.version} is newer than {BUNDLE_VERSION}; unknown fields ignored")
        if document.catalogue_version != CATALOGUE_VERSION:
            logger.warning(f"Bundle uses catalogue {document.catalogue_version}, expected {CATALOGUE_VERSION}")
        scaler = ScalerParams(dimension=document.scaler.dimension,
                              retained_indices=tuple(document.scaler.retained_indices),
                              minimums=tuple(document.scaler.minimums), maximums=tuple(document.scaler.maximums))
        lpd = LpdModel(**_module_fields(document.lpd))
        cf_modules = [CfModuleModel(fault_class=ClassLabel.parse(module.fault_class or ""), **_module_fields(module))
                      for module in document.cf_modules]
        return ClassifierBundle(scaler=scaler, lpd=lpd, cf_modules=tuple(cf_modules),
                                catalogue_version=document.catalogue_version, label_map=dict(document.label_map))

    @staticmethod
    def load(path: str) -> "ClassifierBundle":
        """
        Read a bundle written by save().

        Raises:
            SchemaError: The file is not a valid bundle document.
            InvalidModel: The bundle violates its invariants.
        """
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        try:
            document = ClassifierBundleDocument.model_validate_json(text)
        except ValidationError as error:
            raise SchemaError(1, f"invalid classifier bundle {path}: {error.errors()[0]['msg']}")
        try:
            return ClassifierBundle.from_document(document)
        except ValueError as error:
            if isinstance(error, InvalidModel):
                raise
            raise InvalidModel(f"invalid classifier bundle {path}: {error}")


def train_bundle(database: SignatureDatabase, config: Optional[TrainingConfig] = None) -> ClassifierBundle:
    """
    Train the LPD and CFD classifiers of one bundle. A single scaler is fitted on the union of all
    training signatures so both stages share one scaled space.

    Args:
        database (SignatureDatabase): Link-labelled and client-fault-labelled signatures.
        config (TrainingConfig): Training configuration; defaults when None.
    Return:
        (ClassifierBundle): Trained bundle.
    Raises:
        NoHealthyBaseline: When no cf_0 signature exists; checked before any module is trained.
    """
    config = config or create_default_training_config()
    if ClassLabel.cf(0) not in set(database.labels):
        raise NoHealthyBaseline(f"CFD training needs cf_0 signatures, got {database.class_counts}")
    scaler = fit_scaler(database)
    logger.info(f"Fitted shared scaler on {len(database)} signatures: {len(scaler.retained_indices)} of "
                f"{scaler.dimension} features retained")
    lpd, _ = train_lpd(database, config, scaler)
    cf_modules = train_cfd(database, config=config, scaler=scaler)
    return ClassifierBundle(scaler=scaler, lpd=lpd, cf_modules=tuple(cf_modules), catalogue_version=database.catalogue_version)


# ----------------------------------------------------------------------------------------------------------------------
# Private helpers
# ----------------------------------------------------------------------------------------------------------------------

def _module_document(module) -> ModuleDocument:
    return ModuleDocument(
        fault_class=str(module.fault_class) if isinstance(module, CfModuleModel) else None,
        selected_indices=list(module.selected_indices),
        cv_accuracy_by_size=dict(module.cv_accuracy_by_size),
        svm=module.svm.to_document(),
    )


def _module_fields(document: ModuleDocument) -> dict:
    return dict(svm=TrainedSVM.from_document(document.svm), selected_indices=tuple(document.selected_indices),
                cv_accuracy_by_size=dict(document.cv_accuracy_by_size))
