"""
Command-line application for the stylekit toolkit.
Services are created once and injected into the subcommand handlers.

Exit codes: 0 ok, 1 unexpected failure, 2 parse error, 3 validation error, 4 I/O error.
"""

import argparse
import math
import logging
import sys
from typing import Any, Dict, Optional, Sequence, Tuple

from src.config import LOG_LEVELS, StylekitSettings
from src.models.annotations import LabelVocabulary
from src.models.errors import StylekitError, UsageError, ValidationError
from src.models.frame_grid import FrameGrid
from src.models.signals import WavSpec
from src.repositories.annotation_repository import AnnotationRepository
from src.repositories.contour_repository import ContourRepository
from src.repositories.feature_repository import FeatureRepository
from src.repositories.matrix_repository import MatrixRepository
from src.repositories.wav_repository import WavRepository
from src.services.analysis_service import AnalysisService
from src.services.band_completion_service import SOURCE_RATE, BandCompletionConfig, BandCompletionService
from src.services.bottleneck_service import BOTTLENECK_PRESETS, BottleneckConfig, BottleneckService
from src.services.pipeline_service import PipelineService, run_manifests
from src.services.pitch_dynamics_service import PHASE_MODES, GlissandoParams, PitchDynamicsService, VibratoParams
from src.services.technique_service import TechniqueService
from src.ui.console_report_service import ConsoleReportService

logger = logging.getLogger("stylekit")


def get_app_services(report: Optional[ConsoleReportService] = None) -> Dict[str, Any]:
    """
    Create and configure all application services.

    Returns:
        Dictionary containing all configured services
    """
    annotations = AnnotationRepository()
    contours = ContourRepository()
    features = FeatureRepository()
    matrices = MatrixRepository()
    wavs = WavRepository()

    bottleneck = BottleneckService()
    techniques = TechniqueService()
    pitch = PitchDynamicsService()
    band = BandCompletionService()

    return {
        "annotations": annotations,
        "contours": contours,
        "features": features,
        "matrices": matrices,
        "wavs": wavs,
        "bottleneck": bottleneck,
        "techniques": techniques,
        "pitch": pitch,
        "band": band,
        "analysis": AnalysisService(),
        "pipeline": PipelineService(
            annotations, contours, features, matrices, wavs, bottleneck, techniques, pitch, band
        ),
        "report": report or ConsoleReportService(),
    }


def _interval(text: str) -> Tuple[float, float]:
    """argparse type for 'A:B' pairs of finite numbers."""
    try:
        low, high = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}") from None
    if not (math.isfinite(low) and math.isfinite(high)):
        raise argparse.ArgumentTypeError(f"bounds must be finite, got {text!r}")
    return low, high


class StylekitArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors surface as UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _grid(args: argparse.Namespace, settings: StylekitSettings) -> FrameGrid:
    sample_rate = args.sr if args.sr is not None else settings.sample_rate
    hop = args.hop if args.hop is not None else settings.hop
    return FrameGrid(sample_rate, hop)


def _vocabulary(args: argparse.Namespace, services: Dict[str, Any]) -> Optional[LabelVocabulary]:
    if args.vocab_file:
        return services["annotations"].load_vocabulary(args.vocab_file)
    if args.vocab:
        return LabelVocabulary.parse(args.vocab)
    return None


def cmd_pool(args: argparse.Namespace, services: Dict[str, Any], settings: StylekitSettings) -> int:
    """Phoneme-span pooling and scaling of a feature file."""
    if args.preset:
        preset = BottleneckConfig.preset(args.preset)
        config = BottleneckConfig(args.lambda_ if args.lambda_ is not None else preset.lambda_, preset.pooling)
    else:
        config = BottleneckConfig(args.lambda_ if args.lambda_ is not None else settings.lambda_)

    features = services["features"].read_features(args.features)
    alignment = services["annotations"].load_alignment(args.alignment)
    result = services["bottleneck"].run(features, alignment, _grid(args, settings), config)
    services["features"].write_features(args.output, result.features)

    services["report"].summary({
        "n_frames": result.features.n_frames,
        "dim": result.features.dim,
        "segments": result.segment_count,
        "lambda": config.lambda_,
        "pooling": "on" if config.pooling else "off",
        "pooling_residual": result.pooling_residual,
    })
    return 0


def cmd_build_matrix(args: argparse.Namespace, services: Dict[str, Any], settings: StylekitSettings) -> int:
    """Rasterize technique segments onto the frame grid."""
    if args.f0:
        contour = services["contours"].read_f0(args.f0)
        n_frames, grid = contour.n_frames, contour.grid
    elif args.n_frames is not None:
        n_frames, grid = args.n_frames, _grid(args, settings)
    else:
        raise ValidationError("build-matrix needs --f0 or --n-frames to know the frame count")

    vocab = _vocabulary(args, services)
    segments = services["annotations"].load_technique_segments(args.techniques, vocab)
    matrix = services["techniques"].build_matrix(segments, vocab, n_frames, grid)
    services["matrices"].write_matrix(args.output, matrix)

    services["report"].summary({"n_frames": matrix.n_frames, **matrix.counts()})
    return 0


def cmd_refine_f0(args: argparse.Namespace, services: Dict[str, Any], settings: StylekitSettings) -> int:
    """Technique-gated vibrato and glissando on an F0 contour."""
    vibrato = VibratoParams(
        depth_cents=args.vib_depth, rate_hz=args.vib_rate, phase_rad=args.vib_phase,
        ramp_seconds=args.vib_ramp, phase_mode=args.vib_phase_mode,
    )
    glissando = GlissandoParams(sharpness=args.gliss_sharpness, window_seconds=args.gliss_window)

    contour = services["contours"].read_f0(args.f0)
    matrix = services["matrices"].read_matrix(args.matrix)
    notes = services["annotations"].load_notes(args.notes) if args.notes else None
    result = services["pitch"].refine(contour, matrix, notes, vibrato, glissando)
    services["contours"].write_f0(args.output, result.contour)
    if args.midi_out:
        if notes is None:
            raise ValidationError("--midi-out needs --notes")
        services["contours"].write_midi_track(args.midi_out, notes.midi_track(contour.n_frames, contour.grid), contour.grid)

    services["report"].summary({"n_frames": contour.n_frames, **result.affected})
    return 0


def cmd_band_complete(args: argparse.Namespace, services: Dict[str, Any], settings: StylekitSettings) -> int:
    """Merge the upsampled main output with the auxiliary source's high band."""
    config = BandCompletionConfig(cutoff_hz=args.cutoff, crossfade_hz=args.crossfade)
    x24, _ = services["wavs"].read_wav(args.in24)
    x48_src, _ = services["wavs"].read_wav(args.src48)

    band = services["band"]
    merged = band.band_complete(x24, x48_src, config)
    clamped = services["wavs"].write_wav(args.output, merged, WavSpec(SOURCE_RATE, "float32"))

    analysis = services["analysis"]
    nyquist = SOURCE_RATE / 2
    services["report"].summary({
        "samples": len(merged),
        "sample_rate": merged.sample_rate,
        "clamped": clamped,
        "low_band_db": analysis.band_energy_db(band.upsample_2x(x24), 0.0, config.band_low_hz),
        "high_band_db": analysis.band_energy_db(band.highpass_extract(x48_src, config), config.band_high_hz, nyquist),
        "output_low_band_db": analysis.band_energy_db(merged, 0.0, config.band_low_hz),
        "output_high_band_db": analysis.band_energy_db(merged, config.band_high_hz, nyquist),
    })
    return 0


def cmd_measure(args: argparse.Namespace, services: Dict[str, Any], settings: StylekitSettings) -> int:
    """Vibrato estimate of a contour span, or band energies of a WAV file."""
    analysis = services["analysis"]
    report = services["report"]
    if args.f0:
        contour = services["contours"].read_f0(args.f0)
        start, stop = args.span if args.span else (0, contour.n_frames)
        if start != int(start) or stop != int(stop):
            raise ValidationError(f"span bounds must be whole frames, got {start}:{stop}")
        estimate = analysis.estimate_vibrato(contour, (int(start), int(stop)))
        report.summary({
            "rate_hz": estimate.rate_hz,
            "depth_cents": estimate.depth_cents,
            "frames_analyzed": estimate.frames_analyzed,
        })
        return 0

    buffer, spec = services["wavs"].read_wav(args.wav)
    fields: Dict[str, Any] = {"sample_rate": spec.sample_rate, "samples": len(buffer), "energy_db": analysis.energy_db(buffer)}
    for low, high in args.band or []:
        fields[f"band_{low:g}_{high:g}_db"] = analysis.band_energy_db(buffer, low, high)
    report.summary(fields)
    return 0


def cmd_pipeline(args: argparse.Namespace, services: Dict[str, Any], settings: StylekitSettings) -> int:
    """Run one or more manifests."""
    jobs = args.jobs if args.jobs is not None else settings.jobs
    if jobs < 1:
        raise ValidationError(f"--jobs must be >= 1, got {jobs}")
    outcomes = run_manifests(args.manifest, settings, jobs, services["pipeline"])
    return services["report"].jobs(outcomes)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline operation."""
    parser = StylekitArgumentParser(prog="stylekit", description="Singing style conversion toolkit")
    parser.add_argument("--log-level", choices=LOG_LEVELS, help="Logging threshold (default from STYLEKIT_LOG_LEVEL)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    def grid_flags(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--sr", type=int, help="Frame grid sample rate (default from STYLEKIT_SAMPLE_RATE)")
        sub.add_argument("--hop", type=int, help="Frame grid hop size (default from STYLEKIT_HOP)")

    pool = commands.add_parser("pool", help="Phoneme-span pooling and scaling of features")
    pool.add_argument("--features", required=True, help="Feature file (SSCF)")
    pool.add_argument("--alignment", required=True, help="Phoneme alignment file")
    pool.add_argument("--lambda", dest="lambda_", type=float, help="Scaling factor (default from STYLEKIT_LAMBDA)")
    pool.add_argument("--preset", choices=list(BOTTLENECK_PRESETS), help="Named bottleneck setting")
    grid_flags(pool)
    pool.add_argument("-o", "--output", required=True, help="Output feature file")
    pool.set_defaults(handler=cmd_pool)

    build = commands.add_parser("build-matrix", help="Technique segments to frame-level matrix")
    build.add_argument("--techniques", required=True, help="Technique segment file")
    length = build.add_mutually_exclusive_group()
    length.add_argument("--f0", help="F0 file giving frame count and grid")
    length.add_argument("--n-frames", type=int, help="Frame count")
    vocab = build.add_mutually_exclusive_group()
    vocab.add_argument("--vocab", help="Comma-separated technique vocabulary")
    vocab.add_argument("--vocab-file", help="Vocabulary file, one name per line")
    grid_flags(build)
    build.add_argument("-o", "--output", required=True, help="Output matrix file")
    build.set_defaults(handler=cmd_build_matrix)

    vib, gliss = VibratoParams(), GlissandoParams()
    refine = commands.add_parser("refine-f0", help="Apply technique-gated vibrato and glissando")
    refine.add_argument("--f0", required=True, help="Input F0 file")
    refine.add_argument("--matrix", required=True, help="Technique matrix file")
    refine.add_argument("--notes", help="Note file (required when glissando frames are set)")
    refine.add_argument("--vib-depth", type=float, default=vib.depth_cents, help="Vibrato depth in cents")
    refine.add_argument("--vib-rate", type=float, default=vib.rate_hz, help="Vibrato rate in Hz")
    refine.add_argument("--vib-phase", type=float, default=vib.phase_rad, help="Vibrato phase in radians")
    refine.add_argument("--vib-ramp", type=float, default=vib.ramp_seconds, help="Vibrato onset/offset ramp in seconds")
    refine.add_argument("--vib-phase-mode", choices=PHASE_MODES, default=vib.phase_mode, help="Phase origin")
    refine.add_argument("--gliss-sharpness", type=float, default=gliss.sharpness, help="Sigmoid sharpness (1/s)")
    refine.add_argument("--gliss-window", type=float, default=gliss.window_seconds, help="Half-width of the transition window in seconds")
    refine.add_argument("--midi-out", help="Also write the frame-level MIDI track")
    refine.add_argument("-o", "--output", required=True, help="Output F0 file")
    refine.set_defaults(handler=cmd_refine_f0)

    band_defaults = BandCompletionConfig()
    band = commands.add_parser("band-complete", help="Add the auxiliary source's high band to the main output")
    band.add_argument("--in24", required=True, help="24 kHz main output WAV")
    band.add_argument("--src48", required=True, help="48 kHz auxiliary source WAV")
    band.add_argument("--cutoff", type=float, default=band_defaults.cutoff_hz, help="Cutoff in Hz")
    band.add_argument("--crossfade", type=float, default=band_defaults.crossfade_hz, help="Cross-fade width in Hz")
    band.add_argument("-o", "--output", required=True, help="Output 48 kHz WAV")
    band.set_defaults(handler=cmd_band_complete)

    measure = commands.add_parser("measure", help="Measure vibrato or band energies")
    source = measure.add_mutually_exclusive_group(required=True)
    source.add_argument("--f0", help="F0 file to estimate vibrato on")
    source.add_argument("--wav", help="WAV file to measure")
    measure.add_argument("--span", type=_interval, help="Frame span START:STOP for --f0")
    measure.add_argument("--band", type=_interval, action="append", help="Band LO:HI in Hz for --wav, repeatable")
    measure.set_defaults(handler=cmd_measure)

    pipeline = commands.add_parser("pipeline", help="Run manifest-driven pipelines")
    pipeline.add_argument("--manifest", required=True, nargs="+", help="Manifest file(s)")
    pipeline.add_argument("--jobs", type=int, help="Parallel worker processes (default from STYLEKIT_JOBS)")
    pipeline.set_defaults(handler=cmd_pipeline)

    return parser


def _configure_logging(args: argparse.Namespace, settings: StylekitSettings) -> None:
    level = args.log_level or settings.log_level
    if args.verbose >= 2:
        level = "DEBUG"
    elif args.verbose == 1 and level != "DEBUG":
        level = "INFO"
    logging.basicConfig(
        level=getattr(logging, level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None, services: Optional[Dict[str, Any]] = None) -> int:
    """
    Parse arguments, run the chosen subcommand and map errors to exit codes.

    Args:
        argv: Arguments without the program name, sys.argv[1:] when None
        services: Pre-built services, mainly for tests

    Returns:
        Process exit code
    """
    services = services or get_app_services()
    report: ConsoleReportService = services["report"]
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        report.error(e)
        return e.exit_code
    except SystemExit as e:
        return int(e.code or 0)

    try:
        settings = StylekitSettings.from_env()
        _configure_logging(args, settings)
        return args.handler(args, services, settings)
    except StylekitError as e:
        logger.debug("command failed", exc_info=True)
        report.error(e)
        return e.exit_code
    except Exception as e:
        logger.exception("unexpected failure")
        print(report.format_error(1, "internal", f"{type(e).__name__}: {e}"), file=report.err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
