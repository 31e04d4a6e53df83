import argparse
import os
import sys

from dotenv import load_dotenv

from iacd.common.errors import IacdError
from iacd.global_settings import DEFAULT_SEED
from iacd.iacd_driver import ALL_MODULES, LPD_MODULE, IacdDriver
from iacd.signature.signature import ClassLabel
from iacd.svm.kernels.kernel_factory import KernelFactory

load_dotenv()

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1


def main(argv=None) -> int:
    """
    Entry point of the `iacd` command.

    Return:
        (int): 0 on success, 1 on a domain or I/O error; argparse exits with 2 on usage errors.
    """
    args = build_parser().parse_args(argv)
    driver = IacdDriver(seed=args.seed, n_jobs=args.jobs, log_level=os.getenv("IACD_LOG_LEVEL", "INFO"),
                        log_file=os.getenv("IACD_LOG_FILE"))
    try:
        args.handler(driver, args)
    except (IacdError, OSError, ValueError) as error:
        print(f"iacd: error: {error}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"root seed (default: {DEFAULT_SEED})")
    # a string default goes through the type, so a bad IACD_N_JOBS is a usage error
    common.add_argument("--jobs", type=_positive_int, default=os.getenv("IACD_N_JOBS", "1"),
                        help="parallel workers (default: IACD_N_JOBS or 1)")

    parser = argparse.ArgumentParser(prog="iacd", description="Diagnose TCP faults from client/server trace pairs.")
    subcommands = parser.add_subparsers(dest="command", required=True)

    synth = subcommands.add_parser("synth", parents=[common], help="simulate labelled trace corpora")
    synth.add_argument("--matrix", required=True, help="preset name (testbed, smoke) or scenario-matrix file")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--pcap", action="store_true", help="also write pcap copies of every trace")
    synth.add_argument("--transfer-size", type=_positive_int, help="bytes per transfer for presets")
    synth.set_defaults(handler=_run_synth)

    extract = subcommands.add_parser("extract", parents=[common], help="append the signature of a trace pair")
    extract.add_argument("--client", required=True, help="trace captured at the client")
    extract.add_argument("--server", required=True, help="trace captured at the server")
    extract.add_argument("--label", required=True, type=_label, help="class label, e.g. cf_3 or LINK_FAULTY")
    extract.add_argument("--db", required=True, help="signature database to append to")
    extract.add_argument("--source-id", help="identifier stored with the signature")
    extract.set_defaults(handler=_run_extract)

    train = subcommands.add_parser("train", parents=[common], help="train the LPD and CF modules")
    train.add_argument("--db", required=True, action="append", help="training database (repeatable)")
    train.add_argument("--model", required=True, help="output classifier bundle")
    train.add_argument("--features", type=_candidate_sizes, help="candidate feature counts, e.g. 25,75")
    train.add_argument("--kernel", type=_kernel, help="kernel override: LINEAR, POLY:<degree>, RBF[:<gamma>]")
    train.add_argument("--folds", type=int, help="cross-validation folds (default: min(5, smallest class))")
    train.add_argument("--module", default=LPD_MODULE,
                       help=f"classifier receiving --features/--kernel: {LPD_MODULE}, {ALL_MODULES} or cf_<j>")
    train.set_defaults(handler=_run_train)

    diagnose = subcommands.add_parser("diagnose", parents=[common], help="diagnose one trace pair")
    diagnose.add_argument("--model", required=True, help="classifier bundle")
    diagnose.add_argument("--client", required=True, help="trace captured at the client")
    diagnose.add_argument("--server", required=True, help="trace captured at the server")
    diagnose.add_argument("--run-both", action="store_true", help="run the CF modules even on a faulty link")
    diagnose.add_argument("--out", help="also write the JSON report to this file")
    diagnose.set_defaults(handler=_run_diagnose)

    evaluate = subcommands.add_parser("evaluate", parents=[common], help="evaluate a bundle on labelled databases")
    evaluate.add_argument("--model", required=True, help="classifier bundle")
    evaluate.add_argument("--db", required=True, action="append", help="labelled database (repeatable)")
    evaluate.add_argument("--out", required=True, help="output directory for metrics and confusion CSVs")
    evaluate.set_defaults(handler=_run_evaluate)

    export = subcommands.add_parser("export-matrix", parents=[common], help="export a database as CSV")
    export.add_argument("--db", required=True, help="signature database")
    export.add_argument("--out", required=True, help="output CSV file")
    export.add_argument("--remove-null", action="store_true", help="drop features constant over the database")
    export.set_defaults(handler=_run_export_matrix)
    return parser


# ----------------------------------------------------------------------------------------------------------------------
# Subcommand handlers
# ----------------------------------------------------------------------------------------------------------------------

def _run_synth(driver: IacdDriver, args: argparse.Namespace) -> None:
    driver.synth(args.matrix, args.out, pcap=args.pcap, transfer_size=args.transfer_size)


def _run_extract(driver: IacdDriver, args: argparse.Namespace) -> None:
    driver.extract(args.client, args.server, args.label, args.db, source_id=args.source_id)


def _run_train(driver: IacdDriver, args: argparse.Namespace) -> None:
    driver.train(args.db, args.model, candidate_sizes=args.features, kernel=args.kernel, k_folds=args.folds,
                 module=args.module)


def _run_diagnose(driver: IacdDriver, args: argparse.Namespace) -> None:
    report = driver.diagnose(args.model, args.client, args.server, run_both=args.run_both, out_path=args.out)
    print(report.summary())
    print(report.to_document().model_dump_json(indent=2))


def _run_evaluate(driver: IacdDriver, args: argparse.Namespace) -> None:
    driver.evaluate(args.model, args.db, args.out)


def _run_export_matrix(driver: IacdDriver, args: argparse.Namespace) -> None:
    driver.export_matrix(args.db, args.out, remove_null=args.remove_null)


# ----------------------------------------------------------------------------------------------------------------------
# Argument types
# ----------------------------------------------------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def _candidate_sizes(text: str) -> tuple:
    return tuple(_positive_int(part) for part in text.split(",") if part.strip())


def _kernel(text: str) -> str:
    try:
        KernelFactory.parse(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))
    return text


def _label(text: str) -> str:
    try:
        ClassLabel.parse(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))
    return text


if __name__ == "__main__":
    sys.exit(main())
