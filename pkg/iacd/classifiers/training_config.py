from dataclasses import dataclass, field
from typing import Optional

from iacd.common.errors import InvalidConfiguration
from iacd.global_settings import (
    C_GRID,
    CF_MODULE_DEFAULTS,
    DEFAULT_SEED,
    GAMMA_GRID,
    LPD_CANDIDATE_SIZES,
    SVM_MAX_ITER,
    SVM_TOLERANCE,
)
from iacd.svm.kernels.abstract_kernel import KernelKind, KernelSpec


@dataclass(frozen=True)
class ModuleConfig:
    """
    Kernel and candidate feature counts of one classifier (the LPD or a CF module).
    """
    kernel: KernelSpec
    candidate_sizes: tuple

    def __post_init__(self):
        if not self.candidate_sizes or min(self.candidate_sizes) < 1:
            raise InvalidConfiguration(f"candidate sizes must be positive, got {self.candidate_sizes}")


@dataclass(frozen=True)
class TrainingConfig:
    """
    Configuration of a full LPD + CFD training run.
    """
    lpd: ModuleConfig
    cf_modules: dict
    k_folds: Optional[int] = None
    c_grid: tuple = C_GRID
    gamma_grid: tuple = GAMMA_GRID
    max_iter: int = SVM_MAX_ITER
    tol: float = SVM_TOLERANCE
    seed: int = DEFAULT_SEED
    n_jobs: int = 1
    fault_classes: tuple = field(default=())

    def __post_init__(self):
        if self.k_folds is not None and self.k_folds < 2:
            raise InvalidConfiguration(f"k_folds must be >= 2, got {self.k_folds}")
        if not self.fault_classes:
            object.__setattr__(self, "fault_classes", tuple(sorted(self.cf_modules)))
        missing = [j for j in self.fault_classes if j not in self.cf_modules]
        if missing:
            raise InvalidConfiguration(f"no module configuration for fault classes {missing}")


def create_default_lpd_config() -> ModuleConfig:
    """
    Quadratic kernel with the default candidate feature counts.
    """
    return ModuleConfig(kernel=KernelSpec(KernelKind.POLY, degree=2), candidate_sizes=LPD_CANDIDATE_SIZES)


def create_default_cf_module_configs() -> dict:
    """
    Per-module kernels and feature counts: SACK linear/12, D-SACK RBF/32, read buffer
    3rd-degree polynomial/24, write buffer RBF/16.
    """
    return {
        index: ModuleConfig(kernel=KernelSpec(KernelKind(kind), degree=degree), candidate_sizes=(features,))
        for index, (kind, degree, features) in CF_MODULE_DEFAULTS.items()
    }


def create_default_training_config(**overrides) -> TrainingConfig:
    """
    Create the default training configuration; keyword arguments override single fields.
    """
    settings = dict(lpd=create_default_lpd_config(), cf_modules=create_default_cf_module_configs())
    settings.update(overrides)
    return TrainingConfig(**settings)
