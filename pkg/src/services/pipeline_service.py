"""
Rule-based inference pipeline around the external acoustic model.

Stages run in a fixed order: pool, build-matrix, refine-f0, band-complete.
A stage whose inputs are absent from the manifest is skipped with a warning.
The neural mel-to-waveform model sits between refine-f0 and band-complete and
is not part of this toolkit; its 24 kHz output enters as the audio24 input.
"""

import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from src.config import StylekitSettings
from src.models.errors import ConfigurationError, FormatError, ManifestError, StorageError, StylekitError
from src.models.frame_grid import FrameGrid
from src.models.signals import WavSpec
from src.repositories.annotation_repository import AnnotationRepository
from src.repositories.contour_repository import ContourRepository
from src.repositories.feature_repository import FeatureRepository
from src.repositories.file_store import PathLike, read_text
from src.repositories.matrix_repository import MatrixRepository
from src.repositories.wav_repository import WavRepository
from src.services.band_completion_service import BandCompletionConfig, BandCompletionService, SOURCE_RATE
from src.services.bottleneck_service import BottleneckConfig, BottleneckService
from src.services.pitch_dynamics_service import GlissandoParams, PitchDynamicsService, VibratoParams
from src.services.technique_service import TechniqueService

logger = logging.getLogger(__name__)

INPUT_KEYS = ("features", "alignment", "f0", "notes", "techniques", "matrix", "vocab", "audio24", "audio48_src")
OUTPUT_KEY = "output"

OVERRIDES: Dict[str, Callable[[str], Any]] = {
    "sr": int,
    "hop": int,
    "lambda": float,
    "preset": str,
    "vib_depth": float,
    "vib_rate": float,
    "vib_phase": float,
    "vib_ramp": float,
    "vib_phase_mode": str,
    "gliss_sharpness": float,
    "gliss_window": float,
    "cutoff": float,
    "crossfade": float,
}

FEATURES_OUT = "features.sscf"
MATRIX_OUT = "techniques.txt"
F0_OUT = "f0_refined.txt"
MIDI_OUT = "midi.txt"
AUDIO_OUT = "audio48.wav"
OUTPUT_NAMES = (FEATURES_OUT, MATRIX_OUT, F0_OUT, MIDI_OUT, AUDIO_OUT)

_ENTRY = re.compile(r"^([A-Za-z0-9_]+)\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class PipelineManifest:
    """
    Inputs, output directory and parameter overrides of one pipeline run.

    Relative paths are resolved against the manifest's directory.
    """
    inputs: Dict[str, Path]
    output_dir: Path
    overrides: Dict[str, Any] = field(default_factory=dict)
    source: str = "<manifest>"

    def __post_init__(self):
        """Validate the manifest after initialization."""
        unknown = sorted(set(self.inputs) - set(INPUT_KEYS))
        if unknown:
            raise ManifestError(f"unknown manifest inputs: {', '.join(unknown)}")
        outputs = {(self.output_dir / name).resolve() for name in OUTPUT_NAMES}
        for key, path in self.inputs.items():
            if path.resolve() in outputs:
                raise ManifestError(f"input '{key}' ({path}) would be overwritten by a pipeline output")

    def has(self, *keys: str) -> bool:
        """True when every named input is present."""
        return all(key in self.inputs for key in keys)

    @classmethod
    def parse(cls, text: str, base_dir: PathLike = ".", source: str = "<manifest>") -> "PipelineManifest":
        """
        Parse `key = value` lines; blank lines and '#' comments are ignored.

        Raises:
            FormatError: On a line without '='
            ManifestError: On unknown or repeated keys, empty values or a missing output key
            ConfigurationError: On override values of the wrong type
        """
        base = Path(base_dir)
        inputs: Dict[str, Path] = {}
        overrides: Dict[str, Any] = {}
        output_dir: Optional[Path] = None
        seen = set()

        for line_no, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            match = _ENTRY.match(stripped)
            if not match:
                raise FormatError("expected 'key = value'", line=line_no)
            key, value = match.groups()
            if key in seen:
                raise ManifestError(f"key '{key}' given twice", line=line_no)
            seen.add(key)
            if not value:
                raise ManifestError(f"key '{key}' has an empty value", line=line_no)
            if "\x00" in value:
                raise FormatError("NUL byte in value", line=line_no)

            if key == OUTPUT_KEY:
                output_dir = base / value
            elif key in INPUT_KEYS:
                inputs[key] = base / value
            elif key in OVERRIDES:
                try:
                    overrides[key] = OVERRIDES[key](value)
                except ValueError:
                    raise ConfigurationError(f"override '{key}' has invalid value {value!r}", line=line_no) from None
            else:
                raise ManifestError(f"unknown key '{key}'", line=line_no)

        if output_dir is None:
            raise ManifestError(f"manifest {source} has no '{OUTPUT_KEY} = <dir>' entry")
        return cls(inputs, output_dir, overrides, source)

    @classmethod
    def load(cls, path: PathLike) -> "PipelineManifest":
        """Read and parse a manifest file."""
        path = Path(path)
        return cls.parse(read_text(path), path.parent, str(path))


@dataclass(frozen=True)
class PipelineParameters:
    """Resolved stage parameters after applying manifest overrides to the settings."""
    grid: FrameGrid
    bottleneck: BottleneckConfig
    vibrato: VibratoParams
    glissando: GlissandoParams
    band: BandCompletionConfig

    @classmethod
    def resolve(cls, overrides: Dict[str, Any], settings: StylekitSettings) -> "PipelineParameters":
        """Combine overrides with the environment settings."""
        try:
            grid = FrameGrid(overrides.get("sr", settings.sample_rate), overrides.get("hop", settings.hop))
        except ValueError as e:
            raise ConfigurationError(str(e)) from None

        if "preset" in overrides:
            preset = BottleneckConfig.preset(overrides["preset"])
            bottleneck = BottleneckConfig(overrides.get("lambda", preset.lambda_), preset.pooling)
        else:
            bottleneck = BottleneckConfig(overrides.get("lambda", settings.lambda_))

        defaults = VibratoParams()
        vibrato = VibratoParams(
            depth_cents=overrides.get("vib_depth", defaults.depth_cents),
            rate_hz=overrides.get("vib_rate", defaults.rate_hz),
            phase_rad=overrides.get("vib_phase", defaults.phase_rad),
            ramp_seconds=overrides.get("vib_ramp", defaults.ramp_seconds),
            phase_mode=overrides.get("vib_phase_mode", defaults.phase_mode),
        )
        gliss_defaults = GlissandoParams()
        glissando = GlissandoParams(
            sharpness=overrides.get("gliss_sharpness", gliss_defaults.sharpness),
            window_seconds=overrides.get("gliss_window", gliss_defaults.window_seconds),
        )
        band_defaults = BandCompletionConfig()
        band = BandCompletionConfig(
            cutoff_hz=overrides.get("cutoff", band_defaults.cutoff_hz),
            crossfade_hz=overrides.get("crossfade", band_defaults.crossfade_hz),
        )
        return cls(grid, bottleneck, vibrato, glissando, band)


@dataclass
class StageOutcome:
    """What one stage produced, or why it was skipped."""
    name: str
    outputs: List[Path] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    skipped: Optional[str] = None


@dataclass
class PipelineReport:
    """Ordered stage outcomes of one manifest."""
    source: str
    stages: List[StageOutcome] = field(default_factory=list)

    def completed(self, name: str, outputs: List[Path], details: Dict[str, Any]) -> None:
        """Record a finished stage."""
        self.stages.append(StageOutcome(name, outputs, details))

    def skip(self, name: str, reason: str) -> None:
        """Record a skipped stage."""
        logger.warning("%s: skipping %s: %s", self.source, name, reason)
        self.stages.append(StageOutcome(name, skipped=reason))

    @property
    def skipped(self) -> List[str]:
        """Names of the skipped stages."""
        return [stage.name for stage in self.stages if stage.skipped]


@dataclass(frozen=True)
class JobOutcome:
    """Result of one manifest in a batch: a report, or (exit code, kind, reason)."""
    manifest: str
    report: Optional[PipelineReport] = None
    error: Optional[Tuple[int, str, str]] = None


class PipelineService:
    """
    Service orchestrating the pipeline stages.

    Single Responsibility: Sequences repository reads, service calls and writes.
    Dependency Inversion: Receives every collaborator through the constructor.
    """

    def __init__(
        self,
        annotations: AnnotationRepository,
        contours: ContourRepository,
        features: FeatureRepository,
        matrices: MatrixRepository,
        wavs: WavRepository,
        bottleneck: BottleneckService,
        techniques: TechniqueService,
        pitch: PitchDynamicsService,
        band: BandCompletionService,
    ):
        """Initialize with repositories and services."""
        self.annotations = annotations
        self.contours = contours
        self.features = features
        self.matrices = matrices
        self.wavs = wavs
        self.bottleneck = bottleneck
        self.techniques = techniques
        self.pitch = pitch
        self.band = band

    @classmethod
    def default(cls) -> "PipelineService":
        """Pipeline wired with fresh default collaborators."""
        return cls(
            AnnotationRepository(), ContourRepository(), FeatureRepository(), MatrixRepository(),
            WavRepository(), BottleneckService(), TechniqueService(), PitchDynamicsService(),
            BandCompletionService(),
        )

    def run(self, manifest: PipelineManifest, settings: StylekitSettings) -> PipelineReport:
        """
        Run every stage whose inputs are present.

        Args:
            manifest: Parsed manifest
            settings: Environment defaults

        Returns:
            PipelineReport listing completed and skipped stages

        Raises:
            StylekitError: On the first failing stage
        """
        params = PipelineParameters.resolve(manifest.overrides, settings)
        report = PipelineReport(manifest.source)
        out = manifest.output_dir
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"cannot create output directory {out}: {e.strerror or e}") from None

        pooled = None
        if manifest.has("features", "alignment"):
            features = self.features.read_features(manifest.inputs["features"])
            alignment = self.annotations.load_alignment(manifest.inputs["alignment"])
            pooled = self.bottleneck.run(features, alignment, params.grid, params.bottleneck)
            self.features.write_features(out / FEATURES_OUT, pooled.features)
            report.completed(
                "pool", [out / FEATURES_OUT],
                {"n_frames": pooled.features.n_frames, "dim": pooled.features.dim, "segments": pooled.segment_count},
            )
        else:
            report.skip("pool", "needs features and alignment")

        f0 = self.contours.read_f0(manifest.inputs["f0"]) if manifest.has("f0") else None

        matrix = None
        if manifest.has("matrix"):
            matrix = self.matrices.read_matrix(manifest.inputs["matrix"])
        elif manifest.has("techniques") and (f0 is not None or pooled is not None):
            vocab = self.annotations.load_vocabulary(manifest.inputs["vocab"]) if manifest.has("vocab") else None
            segments = self.annotations.load_technique_segments(manifest.inputs["techniques"], vocab)
            if f0 is not None:
                n_frames, grid = f0.n_frames, f0.grid
            else:
                n_frames, grid = pooled.features.n_frames, params.grid
            matrix = self.techniques.build_matrix(segments, vocab, n_frames, grid)
        if matrix is not None:
            self.matrices.write_matrix(out / MATRIX_OUT, matrix)
            report.completed("build-matrix", [out / MATRIX_OUT], matrix.counts())
        else:
            report.skip("build-matrix", "needs a technique matrix, or techniques plus f0 or features")

        if f0 is not None and matrix is not None:
            notes = self.annotations.load_notes(manifest.inputs["notes"]) if manifest.has("notes") else None
            refined = self.pitch.refine(f0, matrix, notes, params.vibrato, params.glissando)
            self.contours.write_f0(out / F0_OUT, refined.contour)
            written = [out / F0_OUT]
            if notes is not None:
                self.contours.write_midi_track(out / MIDI_OUT, notes.midi_track(f0.n_frames, f0.grid), f0.grid)
                written.append(out / MIDI_OUT)
            report.completed("refine-f0", written, dict(refined.affected))
            logger.info("acoustic model stage is external: it consumes %s", ", ".join(p.name for p in written))
        else:
            report.skip("refine-f0", "needs f0 and a technique matrix")

        if manifest.has("audio24", "audio48_src"):
            x24, _ = self.wavs.read_wav(manifest.inputs["audio24"])
            x48_src, _ = self.wavs.read_wav(manifest.inputs["audio48_src"])
            merged = self.band.band_complete(x24, x48_src, params.band)
            clamped = self.wavs.write_wav(out / AUDIO_OUT, merged, WavSpec(SOURCE_RATE, "float32"))
            report.completed("band-complete", [out / AUDIO_OUT], {"samples": len(merged), "clamped": clamped})
        else:
            report.skip("band-complete", "needs audio24 and audio48_src")

        return report


def _run_job(manifest_path: str, settings: StylekitSettings, service: Optional[PipelineService] = None) -> JobOutcome:
    try:
        manifest = PipelineManifest.load(manifest_path)
        service = service or PipelineService.default()
        return JobOutcome(manifest_path, report=service.run(manifest, settings))
    except StylekitError as e:
        return JobOutcome(manifest_path, error=(e.exit_code, e.kind, e.reason))
    except Exception as e:
        logger.exception("manifest %s failed unexpectedly", manifest_path)
        return JobOutcome(manifest_path, error=(1, "internal", f"{type(e).__name__}: {e}"))


def run_manifests(
    manifest_paths: Sequence[Union[str, Path]],
    settings: StylekitSettings,
    jobs: int = 1,
    service: Optional[PipelineService] = None,
) -> List[JobOutcome]:
    """
    Run several manifests, optionally in parallel worker processes.

    Worker processes build their own services; in-process runs use `service`
    when given. Outcomes keep the input order.
    """
    paths = [str(path) for path in manifest_paths]
    if jobs <= 1 or len(paths) <= 1:
        return [_run_job(path, settings, service) for path in paths]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_job, paths, [settings] * len(paths)))
