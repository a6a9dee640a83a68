"""
Explicit pitch-dynamics control: technique-gated vibrato and glissando applied
to an F0 contour.

Both operations only touch voiced frames whose technique mask is set; every
other frame is returned bit-identical.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import expit

from src.models.annotations import NoteSequence
from src.models.errors import ConfigurationError, LengthMismatchError, ValidationError
from src.models.signals import F0Contour
from src.models.technique_matrix import TechniqueMatrix

logger = logging.getLogger(__name__)

VIBRATO = "vibrato"
GLISSANDO = "glissando"
PHASE_MODES = ("run", "clip")


@dataclass(frozen=True)
class VibratoParams:
    """
    Vibrato shape.

    phase_mode "run" restarts the phase at the first frame of each mask run;
    "clip" evaluates the sinusoid at absolute clip time.
    """
    depth_cents: float = 60.0
    rate_hz: float = 5.5
    phase_rad: float = 0.0
    ramp_seconds: float = 0.05
    phase_mode: str = "run"

    def __post_init__(self):
        """Validate parameters after initialization."""
        for name in ("depth_cents", "rate_hz", "phase_rad", "ramp_seconds"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"vibrato {name} must be finite")
        if self.depth_cents < 0:
            raise ConfigurationError(f"vibrato depth must be >= 0 cents, got {self.depth_cents}")
        if self.rate_hz <= 0:
            raise ConfigurationError(f"vibrato rate must be > 0 Hz, got {self.rate_hz}")
        if self.ramp_seconds < 0:
            raise ConfigurationError(f"vibrato ramp must be >= 0 s, got {self.ramp_seconds}")
        if self.phase_mode not in PHASE_MODES:
            raise ConfigurationError(f"vibrato phase mode must be one of {', '.join(PHASE_MODES)}")


@dataclass(frozen=True)
class GlissandoParams:
    """Sigmoid transition shape: sharpness tau (1/s) and half-width of the window around a boundary."""
    sharpness: float = 50.0
    window_seconds: float = 0.1

    def __post_init__(self):
        """Validate parameters after initialization."""
        if not (math.isfinite(self.sharpness) and self.sharpness > 0):
            raise ConfigurationError(f"glissando sharpness must be > 0, got {self.sharpness}")
        if not (math.isfinite(self.window_seconds) and self.window_seconds > 0):
            raise ConfigurationError(f"glissando window must be > 0 s, got {self.window_seconds}")


@dataclass(frozen=True)
class Boundary:
    """Junction between two consecutive notes."""
    time: float
    f_prev: float
    f_curr: float


@dataclass(frozen=True, eq=False)
class RefineResult:
    """Refined contour and the number of frames each technique rewrote."""
    contour: F0Contour
    affected: Dict[str, int]


def _runs(mask: np.ndarray) -> Iterator[Tuple[int, int]]:
    """Half-open [a, b) intervals of consecutive True frames."""
    padded = np.r_[False, mask, False].astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    for a, b in zip(edges[::2], edges[1::2]):
        yield int(a), int(b)


def _check_mask(mask, contour: F0Contour, what: str) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if mask.shape[0] != contour.n_frames:
        raise LengthMismatchError(f"{what} mask has {mask.shape[0]} frames, contour has {contour.n_frames}")
    return mask


def _below_nyquist(values: np.ndarray, contour: F0Contour) -> np.ndarray:
    return np.minimum(values, np.nextafter(contour.grid.nyquist, 0.0))


class PitchDynamicsService:
    """
    Service refining F0 contours from the technique matrix.

    Single Responsibility: Rule-based vibrato and glissando rendering.
    """

    def vibrato_gate(self, f0: F0Contour, m_vib) -> np.ndarray:
        """Frames the vibrato rewrites: masked and voiced."""
        return _check_mask(m_vib, f0, VIBRATO) & f0.voiced

    def apply_vibrato(self, f0: F0Contour, m_vib, params: VibratoParams) -> F0Contour:
        """
        Inject a sinusoidal log-frequency modulation on masked voiced frames.

        F0*(t) = F0(t) * 2^(r(t) * a * sin(2 pi f_v t + phi) / 1200), where r(t)
        rises linearly from 0 to 1 over ramp_seconds at both ends of each mask run.

        Args:
            f0: Input contour
            m_vib: Vibrato frame mask
            params: Vibrato shape

        Returns:
            Refined contour; unmasked or unvoiced frames are unchanged

        Raises:
            LengthMismatchError: If mask and contour lengths differ
        """
        mask = _check_mask(m_vib, f0, VIBRATO)
        values = f0.values.copy()
        times = f0.grid.frame_times(f0.n_frames)

        for a, b in _runs(mask):
            t = times[a:b]
            first, last = times[a], times[b - 1]
            if params.ramp_seconds > 0:
                ramp = np.clip(np.minimum(t - first, last - t) / params.ramp_seconds, 0.0, 1.0)
            else:
                ramp = np.ones_like(t)
            clock = t - first if params.phase_mode == "run" else t
            cents = ramp * params.depth_cents * np.sin(2.0 * np.pi * params.rate_hz * clock + params.phase_rad)

            voiced = f0.voiced[a:b]
            segment = values[a:b]
            segment[voiced] = _below_nyquist(segment[voiced] * np.exp2(cents[voiced] / 1200.0), f0)

        return f0.with_values(values)

    def boundaries(self, notes: NoteSequence, frame_duration: float) -> List[Boundary]:
        """
        Pitch-changing junctions between consecutive notes.

        Notes are consecutive when the gap between them is at most one frame;
        the boundary sits halfway across the gap. Repeated pitches yield none.
        """
        found = []
        hz = notes.frequencies()
        for index, (prev, curr) in enumerate(zip(notes.notes, notes.notes[1:])):
            if abs(curr.start - prev.end) > frame_duration + 1e-12:
                continue
            if prev.midi_pitch == curr.midi_pitch:
                continue
            found.append(Boundary((prev.end + curr.start) / 2.0, float(hz[index]), float(hz[index + 1])))
        return found

    def glissando_assignment(self, f0: F0Contour, notes: NoteSequence, params: GlissandoParams) -> np.ndarray:
        """
        Nearest boundary index for every frame inside some transition window, -1 elsewhere.
        """
        assignment = np.full(f0.n_frames, -1, dtype=np.int64)
        bounds = self.boundaries(notes, f0.grid.frame_duration)
        if not bounds or f0.n_frames == 0:
            return assignment

        centers = np.array([bound.time for bound in bounds])
        times = f0.grid.frame_times(f0.n_frames)
        right = np.clip(np.searchsorted(centers, times), 0, len(centers) - 1)
        left = np.clip(right - 1, 0, len(centers) - 1)
        nearest = np.where(np.abs(times - centers[left]) <= np.abs(times - centers[right]), left, right)
        inside = np.abs(times - centers[nearest]) <= params.window_seconds + 1e-12
        assignment[inside] = nearest[inside]
        return assignment

    def glissando_gate(self, f0: F0Contour, m_gliss, notes: NoteSequence, params: GlissandoParams) -> np.ndarray:
        """Frames the glissando rewrites: masked, voiced and inside a transition window."""
        mask = _check_mask(m_gliss, f0, GLISSANDO)
        return mask & f0.voiced & (self.glissando_assignment(f0, notes, params) >= 0)

    def apply_glissando(self, f0: F0Contour, m_gliss, notes: NoteSequence, params: GlissandoParams) -> F0Contour:
        """
        Replace note-boundary pitch steps by sigmoid transitions on masked voiced frames.

        Inside the window around boundary t0:
        F0*(t) = F_prev + (F_curr - F_prev) / (1 + exp(-tau (t - t0))).
        Frames inside overlapping windows follow the nearest boundary.

        Raises:
            LengthMismatchError: If mask and contour lengths differ
        """
        mask = _check_mask(m_gliss, f0, GLISSANDO)
        assignment = self.glissando_assignment(f0, notes, params)
        gate = mask & f0.voiced & (assignment >= 0)
        if not gate.any():
            return f0

        bounds = self.boundaries(notes, f0.grid.frame_duration)
        centers = np.array([bound.time for bound in bounds])
        f_prev = np.array([bound.f_prev for bound in bounds])
        f_curr = np.array([bound.f_curr for bound in bounds])

        frames = np.flatnonzero(gate)
        which = assignment[frames]
        t = f0.grid.frame_times(f0.n_frames)[frames]
        curve = f_prev[which] + (f_curr[which] - f_prev[which]) * expit(params.sharpness * (t - centers[which]))

        values = f0.values.copy()
        values[frames] = _below_nyquist(curve, f0)
        return f0.with_values(values)

    def refine(
        self,
        f0: F0Contour,
        matrix: TechniqueMatrix,
        notes: Optional[NoteSequence],
        vib_params: VibratoParams,
        gliss_params: GlissandoParams,
    ) -> RefineResult:
        """
        Vibrato then glissando, both gated by the technique matrix.

        Glissando is applied last and therefore wins on frames where both
        techniques are active.

        Raises:
            LengthMismatchError: If matrix and contour lengths differ
            ValidationError: If glissando frames are set but no notes are given
        """
        if matrix.n_frames != f0.n_frames:
            raise LengthMismatchError(
                f"technique matrix has {matrix.n_frames} frames, contour has {f0.n_frames}"
            )
        zeros = np.zeros(f0.n_frames, dtype=bool)
        m_vib = matrix.mask(VIBRATO) if VIBRATO in matrix.vocab else zeros
        m_gliss = matrix.mask(GLISSANDO) if GLISSANDO in matrix.vocab else zeros

        affected = {VIBRATO: 0, GLISSANDO: 0}
        refined = f0
        if m_vib.any():
            affected[VIBRATO] = int(self.vibrato_gate(f0, m_vib).sum())
            refined = self.apply_vibrato(refined, m_vib, vib_params)
        if m_gliss.any():
            if notes is None:
                raise ValidationError("glissando frames are set in the technique matrix but no notes were given")
            affected[GLISSANDO] = int(self.glissando_gate(f0, m_gliss, notes, gliss_params).sum())
            refined = self.apply_glissando(refined, m_gliss, notes, gliss_params)

        logger.info("refined F0: %d vibrato frames, %d glissando frames", affected[VIBRATO], affected[GLISSANDO])
        return RefineResult(refined, affected)

    def refine_f0(
        self,
        f0: F0Contour,
        matrix: TechniqueMatrix,
        notes: Optional[NoteSequence],
        vib_params: VibratoParams,
        gliss_params: GlissandoParams,
    ) -> F0Contour:
        """Refined contour F0* (see refine)."""
        return self.refine(f0, matrix, notes, vib_params, gliss_params).contour
