import pytest

from iacd.classifiers.cfd_classifier import CfModuleModel, train_cfd
from iacd.common.errors import InsufficientSamples, InvalidConfiguration, NoHealthyBaseline
from iacd.signature.signature import ClassLabel


# Test one module per fault class reading that class's features
def test_train_cfd(synthetic_database, small_config):
    modules = train_cfd(synthetic_database, config=small_config)
    assert [module.fault_class for module in modules] == [ClassLabel.cf(1), ClassLabel.cf(2)]
    assert all(isinstance(module, CfModuleModel) for module in modules)
    assert modules[0].selected_indices == (1,)
    assert set(modules[1].selected_indices) == {2, 3}
    assert modules[1].q == 2

# Test training a subset of the configured fault classes
def test_train_cfd_subset(synthetic_database, small_config):
    modules = train_cfd(synthetic_database, fault_classes=[2], config=small_config)
    assert [module.fault_class for module in modules] == [ClassLabel.cf(2)]

# Test the healthy client class is required
def test_train_cfd_without_baseline(synthetic_database, small_config):
    database = synthetic_database.subset([ClassLabel.cf(1), ClassLabel.cf(2)])
    with pytest.raises(NoHealthyBaseline):
        train_cfd(database, config=small_config)

# Test every requested fault class needs signatures
def test_train_cfd_missing_class(synthetic_database, small_config):
    database = synthetic_database.subset([ClassLabel.cf(0), ClassLabel.cf(1)])
    with pytest.raises(InsufficientSamples):
        train_cfd(database, config=small_config)

# Test fault classes without a module configuration
def test_train_cfd_unconfigured_class(synthetic_database, small_config):
    with pytest.raises(InvalidConfiguration):
        train_cfd(synthetic_database, fault_classes=[1, 3], config=small_config)
