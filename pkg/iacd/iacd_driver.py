import os
from dataclasses import replace
from typing import Optional

from loguru import logger

from iacd.classifiers.classifier_bundle import ClassifierBundle, train_bundle
from iacd.classifiers.diagnosis import DiagnosisReport, diagnose, write_report
from iacd.classifiers.evaluation import (
    accuracy_table,
    collect_outcomes,
    confusion_frame,
    evaluate,
    write_metrics,
)
from iacd.classifiers.training_config import ModuleConfig, TrainingConfig, create_default_training_config
from iacd.common.errors import InvalidConfiguration
from iacd.common.setup_logger import setup_logger
from iacd.global_settings import DEFAULT_SEED, DEFAULT_TRANSFER_SIZE
from iacd.preprocess.min_max_scaler import fit_scaler
from iacd.signature.signature import ClassLabel, Signature, build_signature
from iacd.signature.signature_database import SignatureDatabase
from iacd.svm.kernels.kernel_factory import KernelFactory
from iacd.synth.corpus_generator import (
    MANIFEST_FILE_NAME,
    CorpusEntry,
    CorpusManifest,
    generate_corpus,
    write_corpus,
)
from iacd.synth.presets import ScenarioPresetFactory
from iacd.synth.scenario import ScenarioMatrix
from iacd.traces.packet_record import CapturePoint, TraceFile
from iacd.traces.trace_reader_factory import TraceReaderFactory

METRICS_FILE_NAME = "metrics.json"
ACCURACY_TABLE_FILE_NAME = "accuracy_table.csv"
LPD_MODULE = "lpd"
ALL_MODULES = "all"


class IacdDriver:
    """
    High-level API over the trace-diagnosis pipeline: synthesize corpora, extract signatures,
    train classifiers, diagnose trace pairs, evaluate bundles and export feature matrices.

    Sample usage, full experiment on the testbed preset:
        driver = IacdDriver(seed=7)
        manifest = driver.synth("testbed", "corpus")
        driver.train(["corpus/cfd-train/signatures.jsonl", "corpus/lpd-train/signatures.jsonl"], "model.json")
        driver.evaluate("model.json", ["corpus/cfd-test-aimd-std/signatures.jsonl"], "results")

    Sample usage, diagnosis of one captured pair:
        report = IacdDriver().diagnose("model.json", "client.pcap", "server.pcap")
        print(report.summary())
    """

    def __init__(self, seed: int = DEFAULT_SEED, n_jobs: int = 1, log_level: str = "INFO",
                 log_file: Optional[str] = None):
        """
        Args:
            seed (int): Root seed of presets and cross-validation folds.
            n_jobs (int): Parallel workers for corpus generation and CF-module training.
            log_level (str): Log level of the stderr handler.
            log_file (str): Optional rotating log file.
        """
        setup_logger(log_level, log_file=log_file)
        self.seed = seed
        self.n_jobs = n_jobs

    # ------------------------------------------------------------------------------------------------------------------
    # Public Methods
    # ------------------------------------------------------------------------------------------------------------------

    def synth(self, matrix: str, out_dir: str, pcap: bool = False,
              transfer_size: Optional[int] = None) -> CorpusManifest:
        """
        Generate the corpora of a preset or scenario-matrix file into out_dir, one sub-directory per
        matrix, plus a manifest.

        Args:
            matrix (str): Preset name or path of a scenario-matrix file.
            out_dir (str): Output directory.
            pcap (bool): Also write pcap copies of the traces.
            transfer_size (int): Bytes per transfer for presets; matrix files carry their own.
        Return:
            (CorpusManifest): The written manifest.
        """
        matrices = self._load_matrices(matrix, transfer_size)
        entries = []
        for name, scenario_matrix in matrices.items():
            samples, database = generate_corpus(scenario_matrix, n_jobs=self.n_jobs)
            directory = os.path.join(out_dir, name)
            database_path = write_corpus(samples, database, directory, pcap=pcap)
            entries.append(CorpusEntry(name=name, directory=name, database=os.path.relpath(database_path, out_dir),
                                       samples=len(database), class_counts=database.class_counts))

        manifest = CorpusManifest(source=matrix, seed=self.seed,
                                  transfer_size=transfer_size if ScenarioPresetFactory.is_preset(matrix) else None,
                                  corpora=entries)
        manifest.save(os.path.join(out_dir, MANIFEST_FILE_NAME))
        logger.info(f"Synthesized {len(entries)} corpora ({sum(entry.samples for entry in entries)} signatures) "
                    f"into {out_dir}")
        return manifest

    def extract(self, client_path: str, server_path: str, label: str, db_path: str,
                source_id: Optional[str] = None) -> Signature:
        """
        Build the signature of a client/server trace pair and append it to a database file, creating
        the file when it does not exist.
        """
        class_label = ClassLabel.parse(label)
        client, server = self._read_pair(client_path, server_path)
        signature = build_signature(client, server, class_label, source_id=source_id)
        if os.path.exists(db_path):
            existing = SignatureDatabase.load(db_path)
            database = SignatureDatabase(existing.signatures + [signature], existing.catalogue_version,
                                         existing.feature_names)
        else:
            database = SignatureDatabase([signature])
        database.save(db_path)
        return signature

    def train(self, db_paths: list, model_path: str, candidate_sizes: Optional[tuple] = None,
              kernel: Optional[str] = None, k_folds: Optional[int] = None, module: str = LPD_MODULE) -> ClassifierBundle:
        """
        Train the LPD and every CF module on the union of the given databases and save the bundle.

        Args:
            db_paths (list): Signature database files; link and client-fault classes may be split across them.
            model_path (str): Output bundle file.
            candidate_sizes (tuple): Candidate feature counts overriding the defaults of `module`.
            kernel (str): Kernel override of `module`, e.g. "POLY:2" or "RBF".
            k_folds (int): Fold count; min(5, smallest class) when None.
            module (str): Classifier the overrides apply to: "lpd", "all" or a fault class such as "cf_3".
        Return:
            (ClassifierBundle): The trained bundle.
        """
        database = self._load_databases(db_paths)
        config = self._training_config(candidate_sizes, kernel, k_folds, module)
        bundle = train_bundle(database, config)
        bundle.save(model_path)
        return bundle

    def diagnose(self, model_path: str, client_path: str, server_path: str, run_both: bool = False,
                 out_path: Optional[str] = None) -> DiagnosisReport:
        """
        Diagnose one client/server trace pair with a saved bundle; the report is also written to
        out_path when given.
        """
        bundle = ClassifierBundle.load(model_path)
        client, server = self._read_pair(client_path, server_path)
        report = diagnose(bundle, client, server, run_both=run_both)
        if out_path:
            write_report(report, out_path)
        return report

    def evaluate(self, model_path: str, db_paths: list, out_dir: str) -> list:
        """
        Evaluate a bundle on each labelled database (one data set per file) and write the metrics
        JSON, one confusion CSV per data set and the accuracy table.

        Return:
            (list): EvaluationMetrics per data set.
        """
        bundle = ClassifierBundle.load(model_path)
        databases = [(self._dataset_name(path), SignatureDatabase.load(path)) for path in db_paths]
        os.makedirs(out_dir, exist_ok=True)
        metrics = []
        for name, database in databases:
            metrics.append(evaluate(bundle, database, dataset=name))
            frame = confusion_frame(collect_outcomes(bundle, database), bundle.label_map)
            frame.to_csv(os.path.join(out_dir, f"confusion-{name}.csv"), lineterminator="\n")
        write_metrics(metrics, os.path.join(out_dir, METRICS_FILE_NAME))
        table = accuracy_table(metrics, bundle.label_map)
        table.to_csv(os.path.join(out_dir, ACCURACY_TABLE_FILE_NAME), lineterminator="\n")
        logger.info(f"Accuracy table (%):\n{table.to_string()}")
        return metrics

    def export_matrix(self, db_path: str, out_path: str, remove_null: bool = False) -> None:
        """
        Export a database as a CSV feature matrix in catalogue column order, optionally restricted to
        the features that are not constant over the database.
        """
        database = SignatureDatabase.load(db_path)
        retained = list(fit_scaler(database).retained_indices) if remove_null else None
        database.export_csv(out_path, retained_indices=retained)

    # ------------------------------------------------------------------------------------------------------------------
    # Private Methods
    # ------------------------------------------------------------------------------------------------------------------

    def _load_matrices(self, matrix: str, transfer_size: Optional[int]) -> dict:
        if ScenarioPresetFactory.is_preset(matrix):
            return ScenarioPresetFactory.create(matrix, seed=self.seed,
                                                transfer_size=transfer_size or DEFAULT_TRANSFER_SIZE)
        scenario_matrix = ScenarioMatrix.load(matrix)
        name = scenario_matrix.name or os.path.splitext(os.path.basename(matrix))[0]
        return {name: scenario_matrix}

    def _training_config(self, candidate_sizes: Optional[tuple], kernel: Optional[str], k_folds: Optional[int],
                         module: str) -> TrainingConfig:
        config = create_default_training_config(seed=self.seed, n_jobs=self.n_jobs, k_folds=k_folds)
        if candidate_sizes is None and kernel is None:
            return config

        def override(module_config: ModuleConfig) -> ModuleConfig:
            return ModuleConfig(
                kernel=KernelFactory.parse(kernel) if kernel else module_config.kernel,
                candidate_sizes=tuple(candidate_sizes) if candidate_sizes else module_config.candidate_sizes,
            )

        if module == LPD_MODULE:
            return replace(config, lpd=override(config.lpd))
        if module == ALL_MODULES:
            return replace(config, lpd=override(config.lpd),
                           cf_modules={index: override(entry) for index, entry in config.cf_modules.items()})
        try:
            label = ClassLabel.parse(module)
        except ValueError:
            raise InvalidConfiguration(f"unknown classifier {module!r}: expected lpd, all or cf_<j>")
        if label.is_link or label.index not in config.cf_modules:
            raise InvalidConfiguration(f"no CF module is trained for {module}")
        cf_modules = dict(config.cf_modules)
        cf_modules[label.index] = override(cf_modules[label.index])
        return replace(config, cf_modules=cf_modules)

    @staticmethod
    def _read_pair(client_path: str, server_path: str) -> tuple:
        client: TraceFile = TraceReaderFactory.create_based_on_file_type(
            client_path, capture_point=CapturePoint.CLIENT).read_trace()
        server: TraceFile = TraceReaderFactory.create_based_on_file_type(
            server_path, capture_point=CapturePoint.SERVER).read_trace()
        return client, server

    @staticmethod
    def _load_databases(db_paths: list) -> SignatureDatabase:
        if not db_paths:
            raise InvalidConfiguration("at least one signature database is required")
        return SignatureDatabase.concat([SignatureDatabase.load(path) for path in db_paths])

    @staticmethod
    def _dataset_name(path: str) -> str:
        """
        Data set name of a database file: its file stem, or its directory name for the generic
        signatures.jsonl written by synth.
        """
        stem = os.path.splitext(os.path.basename(path))[0]
        if stem == "signatures":
            return os.path.basename(os.path.dirname(os.path.abspath(path))) or stem
        return stem
