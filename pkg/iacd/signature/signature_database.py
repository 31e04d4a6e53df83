from collections import Counter
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ValidationError

from iacd.common.errors import CatalogueMismatch, DimensionMismatch, EmptyDatabase, SchemaError
from iacd.global_settings import CATALOGUE_VERSION, SIGNATURE_DIMENSION
from iacd.signature.catalogue import feature_names as catalogue_feature_names
from iacd.signature.signature import ClassLabel, Signature

DATABASE_FORMAT = "iacd-signature-db"


class DatabaseHeader(BaseModel):
    """
    First line of a signature database file.
    """
    format: str = DATABASE_FORMAT
    catalogue_version: str
    feature_names: list[str]


class SignatureRecord(BaseModel):
    """
    One signature line of a database file.
    """
    source_id: str
    label: str
    features: list[float]


class SignatureDatabase:
    """
    Labeled signature matrix; every row shares one dimension and catalogue version.

    Sample Usage:
    ```python
    database = assemble_database(signatures)
    database.save("train.jsonl")
    lpd_part = SignatureDatabase.load("train.jsonl").subset([ClassLabel.link_faulty(), ClassLabel.link_healthy()])
    ```
    """

    def __init__(self, signatures: list, catalogue_version: str = CATALOGUE_VERSION,
                 feature_names: Optional[list] = None):
        """
        Args:
            signatures (list): Signatures of the database.
            catalogue_version (str): Catalogue version the features follow.
            feature_names (list): Column names; catalogue names by default.
        Raises:
            EmptyDatabase: No signature given.
            DimensionMismatch: Signatures of different lengths.
        """
        if not signatures:
            raise EmptyDatabase("a signature database needs at least one signature")
        dimensions = {signature.dimension for signature in signatures}
        if len(dimensions) > 1:
            raise DimensionMismatch(f"signatures have different dimensions: {sorted(dimensions)}")
        self.signatures = list(signatures)
        self.catalogue_version = catalogue_version
        self.dimension = dimensions.pop()
        if feature_names is None:
            feature_names = (catalogue_feature_names() if self.dimension == SIGNATURE_DIMENSION
                             else [f"feature_{i}" for i in range(self.dimension)])
        if len(feature_names) != self.dimension:
            raise DimensionMismatch(f"{len(feature_names)} feature names for dimension {self.dimension}")
        self.feature_names = list(feature_names)

    def __len__(self):
        return len(self.signatures)

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    @property
    def labels(self) -> list:
        return [signature.label for signature in self.signatures]

    @property
    def class_counts(self) -> dict:
        """
        Number of signatures per label text, in label order.
        """
        counts = Counter(self.labels)
        return {str(label): counts[label] for label in sorted(counts)}

    def matrix(self) -> np.ndarray:
        """
        Feature matrix with one row per signature.
        """
        return np.array([signature.features for signature in self.signatures], dtype=float)

    def subset(self, labels: Iterable[ClassLabel]) -> "SignatureDatabase":
        """
        Signatures whose label is in the given set, in database order.

        Raises:
            EmptyDatabase: When no signature carries one of the labels.
        """
        wanted = set(labels)
        kept = [signature for signature in self.signatures if signature.label in wanted]
        return SignatureDatabase(kept, self.catalogue_version, self.feature_names)

    def to_dataframe(self, retained_indices: Optional[list] = None) -> pd.DataFrame:
        """
        Matrix view with the label as first column and one column per feature in catalogue order.

        Args:
            retained_indices (list): Feature indices to keep (e.g. after null-feature removal); all when None.
        Return:
            (pd.DataFrame): Label column plus feature columns.
        """
        indices = list(range(self.dimension)) if retained_indices is None else list(retained_indices)
        frame = pd.DataFrame(self.matrix()[:, indices], columns=[self.feature_names[i] for i in indices])
        frame.insert(0, "label", [str(label) for label in self.labels])
        return frame

    def export_csv(self, path: str, retained_indices: Optional[list] = None) -> None:
        """
        Write the matrix view to a CSV file.
        """
        frame = self.to_dataframe(retained_indices)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        logger.info(f"Exported {len(frame)} x {len(frame.columns) - 1} feature matrix to {path}")

    def save(self, path: str) -> None:
        """
        Write the database as JSON lines: a header object then one record per signature.
        """
        header = DatabaseHeader(catalogue_version=self.catalogue_version, feature_names=self.feature_names)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(header.model_dump_json() + "\n")
            for signature in self.signatures:
                record = SignatureRecord(source_id=signature.source_id, label=str(signature.label),
                                         features=list(signature.features))
                f.write(record.model_dump_json() + "\n")
        logger.info(f"Saved {len(self)} signatures {self.class_counts} to {path}")

    # ------------------------------------------------------------------------------------------------------------------
    # Static Methods
    # ------------------------------------------------------------------------------------------------------------------

    @staticmethod
    def load(path: str) -> "SignatureDatabase":
        """
        Read a database written by save().

        Raises:
            SchemaError: A line is not a valid header or record.
            EmptyDatabase: The file holds no signature.
        """
        with open(path, "r", encoding="utf-8") as f:
            lines = [line for line in f.read().splitlines()]
        if not lines or not lines[0].strip():
            raise EmptyDatabase(f"{path} holds no database header")
        try:
            header = DatabaseHeader.model_validate_json(lines[0])
        except ValidationError as error:
            raise SchemaError(1, f"invalid database header: {error.errors()[0]['msg']}")
        if header.catalogue_version != CATALOGUE_VERSION:
            logger.warning(f"{path} uses catalogue {header.catalogue_version}, expected {CATALOGUE_VERSION}")

        signatures = []
        for line_number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                record = SignatureRecord.model_validate_json(line)
                label = ClassLabel.parse(record.label)
            except (ValidationError, ValueError) as error:
                raise SchemaError(line_number, f"invalid signature record: {error}")
            signatures.append(Signature(features=tuple(record.features), label=label, source_id=record.source_id))
        return SignatureDatabase(signatures, header.catalogue_version, header.feature_names)

    @staticmethod
    def concat(databases: list) -> "SignatureDatabase":
        """
        Concatenate databases sharing one dimension and catalogue version.

        Raises:
            EmptyDatabase: No database given.
            CatalogueMismatch: Catalogue versions or feature names differ.
            DimensionMismatch: Signature dimensions differ.
        """
        if not databases:
            raise EmptyDatabase("nothing to concatenate")
        first = databases[0]
        for index, database in enumerate(databases[1:], start=1):
            if database.catalogue_version != first.catalogue_version:
                raise CatalogueMismatch(f"database {index} uses catalogue {database.catalogue_version}, "
                                        f"database 0 uses {first.catalogue_version}")
            if database.dimension == first.dimension and database.feature_names != first.feature_names:
                raise CatalogueMismatch(f"database {index} names its features differently from database 0")
        signatures = [signature for database in databases for signature in database.signatures]
        return SignatureDatabase(signatures, databases[0].catalogue_version, databases[0].feature_names)


def assemble_database(signatures: list, catalogue_version: str = CATALOGUE_VERSION) -> SignatureDatabase:
    """
    Collect signatures into a database.

    Args:
        signatures (list): Signatures with uniform dimension.
        catalogue_version (str): Catalogue version of the features.
    Return:
        (SignatureDatabase): Database with per-class counts.
    Raises:
        EmptyDatabase: No signature.
        DimensionMismatch: Mixed dimensions.
    """
    database = SignatureDatabase(signatures, catalogue_version)
    logger.debug(f"Assembled database of {len(database)} signatures: {database.class_counts}")
    return database
