"""
Main pipeline orchestrator - calibration sweep, saccade experiment and export,
driven from the command line.

    python pipeline.py [global flags] calibrate
    python pipeline.py [global flags] evaluate [--calibration PATH]
    python pipeline.py [global flags] saccade --target-u U --target-v V [--pan P --tilt T]
    python pipeline.py [global flags] oracle --target X Y Z [--resolution R]
    python pipeline.py [global flags] ablate [--steps 10 5 2.5]

Global flags may also follow the subcommand.
"""
import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from pythonjsonlogger import jsonlogger

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from calibration import CalibrationSet, load, save
from config import LOGS_DIR, OUTPUT_DIR, OUTPUT_FILES, PIPELINE_CONFIG, config_digest, load_app_config
from evaluation import (
    ExperimentResult,
    acceptance_report,
    collect_calibration,
    export,
    locate_target,
    run_experiment,
    trials_frame,
)
from exceptions import (
    CalibrationFailure,
    ConfigurationFailure,
    EvaluationFailure,
    SaccadeError,
    TargetLost,
)
from geometry import PixelPoint
from models import AppConfig
from rig import MotorState, RigModel, SimulatedRig, TargetBoard, oracle_fixate
from saccade import SaccadePlanner, execute

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CALIBRATION = 3
EXIT_EVALUATION = 4


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None):
    """Console handler plus a per-run log file; the file is JSON when LOG_FORMAT=json."""
    level = (level or PIPELINE_CONFIG['log_level']).upper()
    fmt = fmt or PIPELINE_CONFIG['log_format']

    file_handler = logging.FileHandler(LOGS_DIR / f'pipeline_{datetime.now():%Y%m%d_%H%M%S}.log', encoding='utf-8')
    if fmt == 'json':
        file_handler.setFormatter(jsonlogger.JsonFormatter('%(asctime)s %(name)s %(levelname)s %(message)s'))
    else:
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(LOG_FORMAT))

    logging.basicConfig(level=getattr(logging, level, logging.INFO), handlers=[file_handler, console], force=True)


def exit_code_for(error: Exception) -> int:
    if isinstance(error, ConfigurationFailure):
        return EXIT_CONFIG
    if isinstance(error, CalibrationFailure):
        return EXIT_CALIBRATION
    return EXIT_EVALUATION


class SaccadePipeline:
    """Main pipeline orchestrator."""

    def __init__(self, config: AppConfig, out_dir: Path = OUTPUT_DIR, strict_digest: bool = False):
        self.config = config
        self.out_dir = Path(out_dir)
        self.strict_digest = strict_digest
        self.calibration: Optional[CalibrationSet] = None
        self.result: Optional[ExperimentResult] = None
        self.stats = {
            'samples_collected': 0,
            'samples_dropped': 0,
            'trials_completed': 0,
            'trials_failed': 0,
            'targets_redrawn': 0,
            'errors': []
        }

    def _fail(self, step: str, error: SaccadeError):
        logger.error(f"✗ {step} failed: {error}")
        self.stats['errors'].append(f"{step}: {error}")

    def prepare_calibration(self, calibration_path: Optional[Path] = None, save_to_out: bool = False) -> CalibrationSet:
        """Load a saved calibration set, or run the sweep."""
        logger.info("=" * 60)
        logger.info("STEP 1: Preparing calibration set")
        logger.info("=" * 60)

        try:
            if calibration_path is not None:
                digest = config_digest(self.config.rig, self.config.board)
                self.calibration = load(calibration_path, expected_digest=digest, strict=self.strict_digest)
            else:
                self.calibration = collect_calibration(self.config)
                if save_to_out:
                    save(self.calibration, self.out_dir / OUTPUT_FILES['calibration'])
        except SaccadeError as e:
            self._fail('Calibration', e)
            raise

        self.stats['samples_collected'] = len(self.calibration)
        self.stats['samples_dropped'] = len(self.calibration.dropped)
        logger.info(f"✓ Calibration set ready: {len(self.calibration)} samples on a "
                    f"{self.calibration.shape[0]}x{self.calibration.shape[1]} grid")
        return self.calibration

    def run_evaluation(self) -> ExperimentResult:
        """Run the chained saccade experiment."""
        logger.info("=" * 60)
        logger.info("STEP 2: Running saccade experiment")
        logger.info("=" * 60)

        try:
            self.result = run_experiment(self.config, calibration=self.calibration)
        except SaccadeError as e:
            self._fail('Experiment', e)
            raise

        self.stats['trials_completed'] = len(self.result.trials)
        self.stats['trials_failed'] = len(self.result.failures)
        self.stats['targets_redrawn'] = self.result.resamples
        return self.result

    def export_results(self) -> List[str]:
        """Write trial, summary and scatter files; returns the acceptance lines."""
        logger.info("=" * 60)
        logger.info("STEP 3: Exporting results")
        logger.info("=" * 60)

        result = self.result
        report: List[str] = []
        if result.summary is not None:
            report = acceptance_report(trials_frame(result.trials), result.summary)
            for line in report:
                logger.info(line)
        try:
            export(result.trials, result.summary, self.out_dir,
                   failures=len(result.failures), resamples=result.resamples, acceptance=report)
        except SaccadeError as e:
            self._fail('Export', e)
            raise
        return report

    def generate_summary(self):
        """Log the run summary."""
        logger.info("=" * 60)
        logger.info("PIPELINE SUMMARY")
        logger.info("=" * 60)
        logger.info(f"Calibration samples: {self.stats['samples_collected']} ({self.stats['samples_dropped']} dropped)")
        logger.info(f"Trials completed: {self.stats['trials_completed']}")
        logger.info(f"Trials failed: {self.stats['trials_failed']}")
        logger.info(f"Targets redrawn: {self.stats['targets_redrawn']}")

        summary = self.result.summary if self.result else None
        if summary is not None:
            logger.info(f"Mean error: {summary.mean_primary:.3f} deg primary, {summary.mean_final:.3f} deg final")
            for bucket, mean in summary.bucket_means_primary.items():
                logger.info(f"  {bucket}: {mean:.3f} deg (n={summary.bucket_counts[bucket]})")
            logger.info(f"Median |h| / |v|: {summary.median_abs_h:.3f} / {summary.median_abs_v:.3f} deg")
            logger.info(f"Under 1 deg: {summary.frac_lt1_primary:.1%}, under 2 deg: {summary.frac_lt2_primary:.1%}")

        if self.stats['errors']:
            logger.warning(f"Errors encountered: {len(self.stats['errors'])}")
            for error in self.stats['errors']:
                logger.warning(f"  - {error}")
        else:
            logger.info("✓ Pipeline completed successfully with no errors")
        logger.info("=" * 60)

    def run(self, calibration_path: Optional[Path] = None) -> int:
        """Execute the evaluation pipeline."""
        start_time = datetime.now()
        logger.info(f"Starting saccade evaluation at {start_time}")

        self.prepare_calibration(calibration_path)
        result = self.run_evaluation()
        self.export_results()
        self.generate_summary()

        logger.info(f"Total execution time: {datetime.now() - start_time}")
        if result.summary is None:
            return EXIT_EVALUATION
        return EXIT_OK

    def single_saccade(self, target: PixelPoint, start: MotorState, corrective: int) -> List[str]:
        """Plan and execute one saccade to a pixel of the view at `start`."""
        cal = self.calibration or self.prepare_calibration()
        model = RigModel.from_config(self.config.rig)
        board = TargetBoard.from_config(self.config.board)
        rig = SimulatedRig(model)
        rig.move_to(start, history=MotorState(start.pan - cal.step, start.tilt - cal.step))

        world = locate_target(model, rig.actual, board, target, self.config.experiment.target_standoff_mm)
        if world is None:
            raise TargetLost(f"Pixel ({target.u}, {target.v}) does not see the board plane")
        rng = np.random.default_rng(self.config.seed)
        obs = rig.capture(board, world, seed=int(rng.integers(0, 2**63 - 1)))
        if obs.target is None:
            raise TargetLost(f"Pixel ({target.u}, {target.v}) is outside the image")

        planner = SaccadePlanner(cal, interpolation=self.config.experiment.interpolation)
        plan = planner.plan(start, obs.target, obs)
        execution = execute(rig, board, plan, world, planner, corrective=corrective,
                            stop_deg=self.config.experiment.corrective_stop_deg, rng=rng)

        lines = [
            f"plan: case={plan.case.value} mode={plan.mode.value} cell={plan.cell[0]} "
            f"alpha={plan.barycentric[0]:.4f} beta={plan.barycentric[1]:.4f}",
            f"command: pan={plan.solved.pan:.4f} tilt={plan.solved.tilt:.4f}",
        ]
        for landing in execution.landings:
            lines.append(
                f"pass {landing.pass_index}: landing=({landing.pixel.u:.2f}, {landing.pixel.v:.2f}) "
                f"err={landing.err_deg:.4f} h={landing.err_h_deg:+.4f} v={landing.err_v_deg:+.4f} deg"
            )
        return lines

    def ablate(self, steps: List[float]) -> pd.DataFrame:
        """Step-size ablation: one fresh calibration and experiment per step."""
        rows = []
        for i, step in enumerate(steps, start=1):
            logger.info("=" * 60)
            logger.info(f"ABLATION {i}/{len(steps)}: calibration step {step} deg")
            logger.info("=" * 60)
            config = self.config.model_copy(
                update={'calibration': self.config.calibration.model_copy(update={'step_deg': step})}
            )
            result = run_experiment(config)
            summary = result.summary
            rows.append({
                'step_deg': step,
                'samples': len(result.calibration),
                'trials': len(result.trials),
                'failures': len(result.failures),
                'mean_primary': summary.mean_primary if summary else float('nan'),
                'median_primary': summary.median_primary if summary else float('nan'),
                'mean_final': summary.mean_final if summary else float('nan'),
            })

        table = pd.DataFrame(rows)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        table.to_csv(self.out_dir / OUTPUT_FILES['ablation'], index=False, lineterminator='\n')
        logger.info(f"\n{table.to_string(index=False)}")
        means = table['mean_primary'].tolist()
        trend = all(a >= b for a, b in zip(means, means[1:]))
        logger.info(f"{'✓' if trend else '✗'} mean error non-increasing as the step shrinks")
        return table


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool = False):
    """Flags accepted before or after the subcommand; the subcommand copies never overwrite an earlier value."""
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument('--config', type=Path, default=default(None), help='YAML config file')
    parser.add_argument('--seed', type=int, default=default(None))
    parser.add_argument('--out', type=Path, default=default(OUTPUT_DIR), help='output directory')
    parser.add_argument('--trials', type=int, default=default(None))
    parser.add_argument('--corrective', type=int, default=default(None))
    parser.add_argument('--step', type=float, default=default(None), help='calibration grid step, degrees')
    parser.add_argument('--strict-digest', action='store_true', default=default(False),
                        help='refuse calibration files collected with a different rig/board config')
    parser.add_argument('--log-level', default=default(None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Homography-transfer saccade control on a simulated pan/tilt rig')
    _add_global_flags(parser)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('calibrate', parents=[common], help='run the sweep and save the calibration set')

    evaluate = sub.add_parser('evaluate', parents=[common], help='run the chained saccade experiment')
    evaluate.add_argument('--calibration', type=Path, default=None)

    saccade = sub.add_parser('saccade', parents=[common], help='plan and execute a single saccade')
    saccade.add_argument('--target-u', type=float, required=True)
    saccade.add_argument('--target-v', type=float, required=True)
    saccade.add_argument('--pan', type=float, default=0.0)
    saccade.add_argument('--tilt', type=float, default=0.0)
    saccade.add_argument('--calibration', type=Path, default=None)

    oracle = sub.add_parser('oracle', parents=[common], help='brute-force fixation command for a world point')
    oracle.add_argument('--target', type=float, nargs=3, required=True, metavar=('X', 'Y', 'Z'))
    oracle.add_argument('--resolution', type=float, default=0.5)

    ablate = sub.add_parser('ablate', parents=[common], help='calibration step-size ablation')
    ablate.add_argument('--steps', type=float, nargs='+', default=[10.0, 5.0, 2.5])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        config = load_app_config(args.config, overrides={
            'seed': args.seed,
            'experiment.trials': args.trials,
            'experiment.corrective': args.corrective,
            'calibration.step_deg': args.step,
        })
        pipeline = SaccadePipeline(config, args.out, strict_digest=args.strict_digest)

        if args.command == 'calibrate':
            pipeline.prepare_calibration(save_to_out=True)
            return EXIT_OK
        if args.command == 'evaluate':
            return pipeline.run(args.calibration)
        if args.command == 'saccade':
            pipeline.prepare_calibration(args.calibration)
            lines = pipeline.single_saccade(PixelPoint(args.target_u, args.target_v),
                                            MotorState(args.pan, args.tilt), config.experiment.corrective)
            print('\n'.join(lines))
            return EXIT_OK
        if args.command == 'oracle':
            cmd = oracle_fixate(RigModel.from_config(config.rig), np.array(args.target), resolution=args.resolution)
            print(f"pan={cmd.pan:.4f} tilt={cmd.tilt:.4f}")
            return EXIT_OK
        if args.command == 'ablate':
            pipeline.ablate(args.steps)
            return EXIT_OK
    except SaccadeError as e:
        code = exit_code_for(e)
        logger.error(f"✗ {type(e).__name__}: {e} (exit {code})")
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
