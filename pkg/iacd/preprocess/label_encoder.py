import numpy as np

from iacd.common.errors import LabelLeak
from iacd.signature.signature import ClassLabel
from iacd.signature.signature_database import SignatureDatabase

POSITIVE_TARGET = 1
NEGATIVE_TARGET = -1


def encode_labels(database: SignatureDatabase, positive_class: ClassLabel, negative_class: ClassLabel) -> tuple:
    """
    Turn a two-class database into a feature matrix and +1/-1 targets; the faulty (positive)
    class maps to +1 and the healthy (negative) class to -1.

    Args:
        database (SignatureDatabase): Database holding only the two classes.
        positive_class (ClassLabel): Label mapped to +1.
        negative_class (ClassLabel): Label mapped to -1.
    Return:
        (tuple): (vectors as float matrix, targets as int vector).
    Raises:
        LabelLeak: When a signature carries a third label.
    """
    foreign = sorted({str(label) for label in database.labels} - {str(positive_class), str(negative_class)})
    if foreign:
        raise LabelLeak(f"labels {foreign} found while encoding {positive_class} vs {negative_class}")
    targets = np.array([POSITIVE_TARGET if label == positive_class else NEGATIVE_TARGET
                        for label in database.labels], dtype=int)
    return database.matrix(), targets
