import numpy as np
import pytest

from iacd.classifiers.training_config import ModuleConfig, TrainingConfig
from iacd.signature.signature import ClassLabel, Signature
from iacd.signature.signature_database import SignatureDatabase
from iacd.svm.kernels.abstract_kernel import KernelKind, KernelSpec

DIMENSION = 6
SAMPLES_PER_CLASS = 10
# class -> features raised above the noise band
RAISED_FEATURES = {
    ClassLabel.link_faulty(): (0,),
    ClassLabel.link_healthy(): (),
    ClassLabel.cf(0): (),
    ClassLabel.cf(1): (1,),
    ClassLabel.cf(2): (2, 3),
}


def synthetic_signatures(seed: int = 0, samples_per_class: int = SAMPLES_PER_CLASS) -> list:
    rng = np.random.default_rng(seed)
    signatures = []
    for label, raised in RAISED_FEATURES.items():
        for i in range(samples_per_class):
            features = rng.uniform(0.0, 1.0, size=DIMENSION)
            for index in raised:
                features[index] += 3.0
            signatures.append(Signature(tuple(float(v) for v in features), label, f"{label}#{i}"))
    return signatures


@pytest.fixture(scope="session")
def synthetic_database():
    """
    Link classes plus cf_0, cf_1 and cf_2, each separable on its own raised features.
    """
    return SignatureDatabase(synthetic_signatures())


@pytest.fixture(scope="session")
def small_config():
    """
    Training configuration sized for the synthetic database.
    """
    return TrainingConfig(
        lpd=ModuleConfig(kernel=KernelSpec(KernelKind.POLY, degree=2), candidate_sizes=(1, 3)),
        cf_modules={
            1: ModuleConfig(kernel=KernelSpec(KernelKind.LINEAR), candidate_sizes=(1,)),
            2: ModuleConfig(kernel=KernelSpec(KernelKind.RBF), candidate_sizes=(2,)),
        },
        c_grid=(1.0, 8.0),
        gamma_grid=(0.5,),
    )


@pytest.fixture(scope="session")
def trained_bundle(synthetic_database, small_config):
    from iacd.classifiers.classifier_bundle import train_bundle
    return train_bundle(synthetic_database, small_config)
