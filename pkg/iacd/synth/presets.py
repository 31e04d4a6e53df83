from dataclasses import replace

from iacd.global_settings import (
    BUFFER_LEVELS_SEGMENTS,
    DEFAULT_SEED,
    DEFAULT_TRANSFER_SIZE,
    FAULT_CLASSES,
    FAULTY_DELAYS_MS,
    FAULTY_LOSS_RATES,
    MSS,
    TESTBED_RESIDUAL_REORDER_RATE,
)
from iacd.signature.signature import ClassLabel
from iacd.synth.scenario import CcProfile, ClientConfig, LinkConfig, Scenario, ScenarioMatrix

TESTBED_PRESET = "testbed"
SMOKE_PRESET = "smoke"

# traces per client class in the CFD corpora
CFD_SAMPLES_PER_CLASS = 11
SMOKE_SAMPLES_PER_CLASS = 3
SMOKE_TRANSFER_SIZE = 262_144

# client mix per LPD link class: class index -> samples
LPD_TRAIN_HEALTHY_MIX = {0: 70, 1: 8, 2: 8, 3: 5, 4: 5, 5: 4}
LPD_TEST_HEALTHY_MIX = {0: 14, 1: 2, 2: 2, 3: 1, 4: 1}
# client mix of the faulty links: per loss rate and per delay
LPD_TRAIN_LOSS_MIX = {0: 4, 1: 1, 2: 1}
LPD_TRAIN_DELAY_MIX = {0: 6, 1: 1, 2: 1}
LPD_TEST_LOSS_MIX = {0: 1}
LPD_TEST_DELAY_MIX = {0: 2}


class ScenarioPresetFactory:
    """
    Named scenario-matrix bundles.

    Sample Usage:
    ```python
    matrices = ScenarioPresetFactory.create("testbed", seed=7)
    samples, database = generate_corpus(matrices["cfd-train"])
    ```
    """

    @staticmethod
    def create(preset_name: str, seed: int = DEFAULT_SEED, transfer_size: int = DEFAULT_TRANSFER_SIZE) -> dict:
        """
        Create the matrices of a preset, keyed by matrix name in generation order.

        Args:
            preset_name (str): "testbed" for the testbed corpora, "smoke" for a small CFD corpus.
            seed (int): Root seed; every scenario seed is derived from it.
            transfer_size (int): Bytes per simulated transfer.
        Return:
            (dict): Matrix name -> ScenarioMatrix.
        Raises:
            ValueError: On an unknown preset.
        """
        if preset_name == TESTBED_PRESET:
            return _seeded(testbed_matrices(transfer_size), seed)
        elif preset_name == SMOKE_PRESET:
            matrix = cfd_matrix("smoke", CcProfile.AIMD_STD, min(transfer_size, SMOKE_TRANSFER_SIZE),
                                SMOKE_SAMPLES_PER_CLASS)
            return _seeded({matrix.name: matrix}, seed)
        else:
            raise ValueError(f"Unsupported scenario preset: {preset_name}")

    @staticmethod
    def is_preset(name: str) -> bool:
        return name in (TESTBED_PRESET, SMOKE_PRESET)


def testbed_matrices(transfer_size: int = DEFAULT_TRANSFER_SIZE) -> dict:
    """
    Training corpora on the standard congestion-control profile plus held-out LPD and CFD test
    corpora for every profile.
    """
    matrices = [cfd_matrix("cfd-train", CcProfile.AIMD_STD, transfer_size),
                lpd_matrix("lpd-train", CcProfile.AIMD_STD, transfer_size, LPD_TRAIN_LOSS_MIX, LPD_TRAIN_DELAY_MIX,
                           LPD_TRAIN_HEALTHY_MIX)]
    for profile in CcProfile:
        suffix = profile.value.lower().replace("_", "-")
        matrices.append(lpd_matrix(f"lpd-test-{suffix}", profile, transfer_size, LPD_TEST_LOSS_MIX,
                                   LPD_TEST_DELAY_MIX, LPD_TEST_HEALTHY_MIX))
        matrices.append(cfd_matrix(f"cfd-test-{suffix}", profile, transfer_size))
    return {matrix.name: matrix for matrix in matrices}


def cfd_matrix(name: str, profile: CcProfile, transfer_size: int,
               samples_per_class: int = CFD_SAMPLES_PER_CLASS) -> ScenarioMatrix:
    """
    Every client class on the healthy link; buffer classes spread over the buffer levels.
    """
    link = testbed_link()
    scenarios = []
    for index in FAULT_CLASSES:
        scenarios.extend(_client_class_scenarios(f"{name}-cf{index}", ClassLabel.cf(index), index, link, profile,
                                                 samples_per_class, transfer_size))
    return ScenarioMatrix(scenarios=tuple(scenarios), name=name)


def lpd_matrix(name: str, profile: CcProfile, transfer_size: int, loss_mix: dict, delay_mix: dict,
               healthy_mix: dict) -> ScenarioMatrix:
    """
    Faulty links (each loss rate and each added delay) against the healthy link, each link class
    mixing healthy and faulty clients.
    """
    faulty, healthy = ClassLabel.link_faulty(), ClassLabel.link_healthy()
    scenarios = []
    for loss_rate in FAULTY_LOSS_RATES:
        link = replace(testbed_link(), loss_rate=loss_rate)
        for index, samples in loss_mix.items():
            scenarios.extend(_client_class_scenarios(f"{name}-loss{round(loss_rate * 100)}-cf{index}", faulty,
                                                     index, link, profile, samples, transfer_size))
    for delay_ms in FAULTY_DELAYS_MS:
        link = replace(testbed_link(), one_way_delay_ms=delay_ms)
        for index, samples in delay_mix.items():
            scenarios.extend(_client_class_scenarios(f"{name}-delay{round(delay_ms)}-cf{index}", faulty, index,
                                                     link, profile, samples, transfer_size))
    for index, samples in healthy_mix.items():
        scenarios.extend(_client_class_scenarios(f"{name}-healthy-cf{index}", healthy, index, testbed_link(),
                                                 profile, samples, transfer_size))
    return ScenarioMatrix(scenarios=tuple(scenarios), name=name)


def testbed_link() -> LinkConfig:
    return LinkConfig(reorder_rate=TESTBED_RESIDUAL_REORDER_RATE)


def client_for_class(index: int, profile: CcProfile, buffer_segments: int = BUFFER_LEVELS_SEGMENTS[0]) -> ClientConfig:
    """
    Client configuration showing fault class `index`; buffer classes use the given buffer level.

    Raises:
        ValueError: On an unknown class index.
    """
    healthy = ClientConfig(cc_profile=profile)
    limited = buffer_segments * MSS
    if index == 0:
        return healthy
    elif index == 1:
        return replace(healthy, sack_enabled=False)
    elif index == 2:
        return replace(healthy, dsack_enabled=False)
    elif index == 3:
        return replace(healthy, read_buffer=limited)
    elif index == 4:
        return replace(healthy, write_buffer=limited)
    elif index == 5:
        return replace(healthy, read_buffer=limited, write_buffer=limited)
    else:
        raise ValueError(f"Unsupported client fault class: {index}")


def spread(samples: int, parts: int) -> list:
    """
    Split samples over parts as evenly as possible, earlier parts first: spread(11, 3) -> [4, 4, 3].
    """
    return [samples // parts + (1 if part < samples % parts else 0) for part in range(parts)]


# ----------------------------------------------------------------------------------------------------------------------
# Private helpers
# ----------------------------------------------------------------------------------------------------------------------

def _client_class_scenarios(name: str, label: ClassLabel, index: int, link: LinkConfig, profile: CcProfile,
                            samples: int, transfer_size: int) -> list:
    if index not in (3, 4, 5):
        return [Scenario(name=name, label=label, link=link, client=client_for_class(index, profile), samples=samples,
                         transfer_size=transfer_size)]
    scenarios = []
    for level, count in zip(BUFFER_LEVELS_SEGMENTS, spread(samples, len(BUFFER_LEVELS_SEGMENTS))):
        if count:
            scenarios.append(Scenario(name=f"{name}-{level}mss", label=label, link=link,
                                      client=client_for_class(index, profile, level), samples=count,
                                      transfer_size=transfer_size))
    return scenarios


def _seeded(matrices: dict, seed: int) -> dict:
    """
    Give every scenario a distinct seed: root seed, matrix position and scenario position in disjoint bit
    ranges, leaving the low 8 bits for the sample index.
    """
    seeded = {}
    for matrix_index, (name, matrix) in enumerate(matrices.items()):
        scenarios = tuple(replace(scenario, seed=(seed << 20) + (matrix_index << 14) + (position << 8))
                          for position, scenario in enumerate(matrix.scenarios))
        seeded[name] = ScenarioMatrix(scenarios=scenarios, name=matrix.name)
    return seeded
