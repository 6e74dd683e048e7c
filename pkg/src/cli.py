"""Command-line tool running the synergy pipeline: synth, train, test and postures."""

import logging
from functools import wraps
from pathlib import Path
from typing import Annotated, Callable, Optional

import numpy as np
import typer
from pydantic import ValidationError
from rich import print
from rich.console import Console
from rich.markup import escape

from src.amm import ProgressRecord, TrainedBank, grid_search, make_plan, run, split_tasks
from src.dataio import (
    AngleTrajectory,
    angles_to_velocities,
    empirical_snr_db,
    generate_synthetic,
    generate_tasks,
    integrate,
    load_csv,
    save_csv,
    truth_document,
)
from src.exceptions import (
    ConfigurationError,
    DatasetParseError,
    DegenerateInputError,
    DimensionError,
    DivergenceError,
    InputError,
    ShiftRangeError,
    SolverError,
    StepError,
)
from src.logger import configure_logging
from src.model import ShiftPlan, VelocityDataset, reconstruct
from src.recon import evaluate_suite, select_lambda_test
from src.solvers import SparseGroupPenalty
from src.utils import ConfigManager, FileStorageManager, RunConfig

logger = logging.getLogger(__name__)

app = typer.Typer(no_args_is_help=True, help="Learn and test convolutive motor synergies.")
err_console = Console(stderr=True)

EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

ConfigOption = Annotated[
    Optional[Path],
    typer.Option("--config", envvar="SYNERGY_CONFIG", help="JSON run configuration."),
]
VerboseOption = Annotated[bool, typer.Option("--verbose", help="Log at DEBUG level.")]
ThreadsOption = Annotated[
    Optional[int],
    typer.Option("--threads", envvar="SYNERGY_THREADS", min=1, help="Worker threads."),
]


def _exit_code(error: Exception) -> int | None:
    if isinstance(error, (ValidationError, ConfigurationError, DimensionError, ShiftRangeError)):
        return EXIT_CONFIG
    if isinstance(error, (OSError, DatasetParseError)):
        return EXIT_IO
    if isinstance(
        error, (SolverError, StepError, DivergenceError, DegenerateInputError, InputError)
    ):
        return EXIT_NUMERICAL
    return None


def handle_errors(command: Callable[..., None]) -> Callable[..., None]:
    """Report known failures on stderr and turn them into the documented exit codes."""

    @wraps(command)
    def wrapper(*args, **kwargs) -> None:
        try:
            command(*args, **kwargs)
        except Exception as error:
            code = _exit_code(error)
            if code is None:
                raise
            logger.debug("Command failed", exc_info=True)
            err_console.print(f"[bold red]Error:[/bold red] {escape(str(error))}")
            raise typer.Exit(code=code) from error

    return wrapper


def _load(config_path: Path | None, verbose: bool, threads: int | None) -> RunConfig:
    config = ConfigManager.load_from_file(config_path)
    configure_logging(config.logging_config, verbose)
    threads = threads or config.threads
    if threads is not None:
        config = config.model_copy(
            update={
                "threads": threads,
                "amm": config.amm.model_copy(update={"threads": threads}),
            }
        )
    return config


def _load_dataset(path: Path, config: RunConfig) -> VelocityDataset:
    data = load_csv(path)
    if isinstance(data, VelocityDataset):
        return data
    prep = config.preprocessing
    return angles_to_velocities(data, prep.smooth_raw, prep.window, prep.polyorder)


def _load_bank(path: Path) -> TrainedBank:
    try:
        return FileStorageManager.load_bank(path)
    except ValidationError as error:
        raise DatasetParseError(f"{path} is not a trained bank document: {error}") from error


@app.command()
@handle_errors
def synth(
    config: ConfigOption = None, verbose: VerboseOption = False, threads: ThreadsOption = None
) -> None:
    """Generate a synthetic dataset with planted synergies and its ground truth."""
    run_config = _load(config, verbose, threads)
    synthetic = run_config.synthetic
    if synthetic is None:
        raise ConfigurationError("the synth command needs a 'synthetic' section")
    paths = run_config.paths
    plan = ShiftPlan.uniform(synthetic.T, synthetic.T_s, synthetic.spec.m_true)
    dataset, bank, coeffs = generate_synthetic(
        synthetic.spec, synthetic.n, synthetic.T, synthetic.T_s, synthetic.G, plan
    )
    dataset = dataset.model_copy(update={"sample_rate": synthetic.sample_rate})
    truth = truth_document(synthetic.spec, bank, coeffs, plan, synthetic.sample_rate)
    save_csv(dataset, paths.dataset)
    truth.save(paths.truth)
    snr = empirical_snr_db(reconstruct(bank, coeffs, plan), dataset.velocities)

    print(f"Wrote [bold]{paths.dataset}[/bold] and [bold]{paths.truth}[/bold]")
    print(f"n={dataset.n} T={dataset.T} G={dataset.G} SNR={snr:.2f} dB")
    if synthetic.test_G > 0:
        test, _ = generate_tasks(truth, synthetic.test_G)
        save_csv(test, paths.test_dataset)
        print(f"Wrote [bold]{paths.test_dataset}[/bold] with G={test.G} held-out tasks")


@app.command()
@handle_errors
def train(
    config: ConfigOption = None, verbose: VerboseOption = False, threads: ThreadsOption = None
) -> None:
    """Learn a synergy bank from the training dataset."""
    run_config = _load(config, verbose, threads)
    paths = run_config.paths
    storage = FileStorageManager(paths.output_dir)
    data = _load_dataset(paths.dataset, run_config)
    amm_config = run_config.amm
    plan = make_plan(amm_config, data.T)

    if run_config.grid is not None:
        selection, states = grid_search(amm_config, data, run_config.grid, run_config.recon, plan)
        storage.save_grid(selection, states, plan, data.sample_rate)
        chosen = selection.points[selection.selected]
        amm_config = amm_config.model_copy(
            update={
                "penalty": SparseGroupPenalty(lambda1=chosen.lambda1, lambda2=chosen.lambda2),
                "alpha": chosen.alpha,
            }
        )
        print(
            f"Selected lambda1={chosen.lambda1:g} lambda2={chosen.lambda2:g} "
            f"alpha={chosen.alpha:g} (validation error {chosen.validation_error})"
        )

    records: list[ProgressRecord] = []
    state = run(amm_config, data, plan, records.append)
    document = TrainedBank.from_state(state, plan, data.sample_rate)
    storage.save_bank(document, paths.bank)
    storage.save_coefficients(state.coeffs, plan, data.task_ids)
    storage.save_trace(records)
    print(f"m_final={state.m_final} final objective={document.final_objective:.8g}")


@app.command()
@handle_errors
def test(
    config: ConfigOption = None, verbose: VerboseOption = False, threads: ThreadsOption = None
) -> None:
    """Reconstruct the testing dataset from the trained bank and report the errors."""
    run_config = _load(config, verbose, threads)
    paths = run_config.paths
    recon = run_config.recon
    storage = FileStorageManager(paths.output_dir)
    document = _load_bank(paths.bank)
    bank = document.to_bank()
    dataset = _load_dataset(paths.test_dataset, run_config)

    lambda_test = recon.lambda_test
    if recon.lambda_test_grid:
        validation = _load_dataset(paths.dataset, run_config)
        if run_config.grid is not None:
            _, validation = split_tasks(validation, run_config.grid.validation_fraction)
        lambda_test = select_lambda_test(
            bank,
            validation,
            recon.lambda_test_grid,
            recon.tau,
            recon.filter,
            recon.control,
            run_config.threads,
        )
        print(f"Selected lambda_test={lambda_test:g}")

    plan = document.to_plan()
    if plan.T != dataset.T:
        plan = plan.with_window(dataset.T)
    if bank.m_active == 0:
        err_console.print("[yellow]Warning:[/yellow] the bank has no active synergies")
    report = evaluate_suite(
        bank,
        dataset,
        lambda_test,
        recon.tau,
        recon.filter,
        recon.control,
        plan,
        run_config.threads,
    )
    storage.save_report(report)
    storage.save_reconstructions(report, dataset)
    summary = report.summary
    if summary.mean is None:
        print("Mean error undefined: the test set is empty")
    else:
        print(
            f"Normalized reconstruction error {summary.mean:.4f} ± {summary.std:.4f} "
            f"over {dataset.G} movements ({summary.columns_kept} bank columns)"
        )


@app.command()
@handle_errors
def postures(
    config: ConfigOption = None, verbose: VerboseOption = False, threads: ThreadsOption = None
) -> None:
    """Integrate every active synergy into joint angles and sample posture snapshots."""
    run_config = _load(config, verbose, threads)
    settings = run_config.postures
    storage = FileStorageManager(run_config.paths.output_dir)
    document = _load_bank(run_config.paths.bank)
    bank = document.to_bank()
    initial = np.zeros(bank.n)
    if settings.initial_angles is not None:
        initial = np.asarray(settings.initial_angles, dtype=float)
        if initial.shape != (bank.n,):
            raise ConfigurationError(
                f"postures.initial_angles needs {bank.n} values, got {initial.size}"
            )

    trajectories: list[AngleTrajectory] = []
    snapshots: list[tuple[int, float, int, float]] = []
    for j in bank.active_indices:
        velocities = bank.template_matrix(j).ravel()
        trajectory = integrate(velocities, initial, document.sample_rate)
        trajectories.append(trajectory)
        for fraction in settings.fractions:
            t = int(round(fraction * (bank.T_s - 1)))
            snapshots += [
                (j, fraction, i + 1, float(trajectory.angles[i, t])) for i in range(bank.n)
            ]
    if not trajectories:
        err_console.print("[yellow]Warning:[/yellow] the bank has no active synergies")
    angles_path, snapshots_path = storage.save_postures(trajectories, snapshots)
    print(f"Wrote postures of {len(trajectories)} synergies to [bold]{snapshots_path}[/bold]")
    if angles_path is not None:
        print(f"Wrote angle trajectories to [bold]{angles_path}[/bold]")


if __name__ == "__main__":
    app()
