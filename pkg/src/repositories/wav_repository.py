"""
Repository for mono RIFF/WAVE files (pcm16, pcm24, float32).

Reading walks the RIFF chunk list to validate structure (unknown chunks are
skipped), then decodes the sample data with soundfile. Writing assembles the
header directly so identical buffers always produce identical bytes.
"""

import io
import logging
import struct
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np
import soundfile as sf

from src.models.errors import FormatError, TruncationError, ValidationError
from src.models.signals import AudioBuffer, WavSpec
from src.repositories.file_store import PathLike, read_bytes, write_bytes_atomic

logger = logging.getLogger(__name__)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

_CHUNK = struct.Struct("<4sI")
_FMT = struct.Struct("<HHIIHH")

# bit format -> (soundfile dtype, divisor to reach [-1, 1])
_DECODE: Dict[str, Tuple[str, float]] = {
    "pcm16": ("int16", 32768.0),
    "pcm24": ("int32", 2147483648.0),
    "float32": ("float32", 1.0),
}
_PCM_SCALE = {"pcm16": 32768, "pcm24": 8388608}


@dataclass(frozen=True)
class _Layout:
    spec: WavSpec
    block_align: int
    data_offset: int
    data_size: int


def _scan(raw: bytes) -> _Layout:
    if len(raw) < 12:
        raise TruncationError(f"WAV file has {len(raw)} bytes, RIFF header needs 12")
    if raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file")

    spec = None
    block_align = 0
    offset = 12
    while offset + _CHUNK.size <= len(raw):
        chunk_id, size = _CHUNK.unpack_from(raw, offset)
        body = offset + _CHUNK.size
        if chunk_id == b"fmt ":
            if size < _FMT.size:
                raise FormatError(f"fmt chunk has {size} bytes, needs {_FMT.size}")
            if body + size > len(raw):
                raise TruncationError("fmt chunk runs past the end of the file")
            spec, block_align = _parse_fmt(raw[body:body + size])
        elif chunk_id == b"data":
            if spec is None:
                raise FormatError("data chunk precedes fmt chunk")
            if body + size > len(raw):
                raise TruncationError(
                    f"data chunk declares {size} bytes, only {len(raw) - body} present"
                )
            if size % block_align:
                raise TruncationError(f"data chunk size {size} is not a multiple of {block_align}")
            return _Layout(spec, block_align, body, size)
        offset = body + size + (size & 1)

    if spec is None:
        raise FormatError("missing fmt chunk")
    raise FormatError("missing data chunk")


def _parse_fmt(body: bytes) -> Tuple[WavSpec, int]:
    tag, channels, rate, _, block_align, bits = _FMT.unpack_from(body)
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 26:
            raise FormatError("extensible fmt chunk too short for its sub-format")
        tag = struct.unpack_from("<H", body, 24)[0]
    if channels == 0:
        raise FormatError("fmt chunk declares zero channels")
    if channels != 1:
        raise ValidationError(f"only mono WAV is supported, file has {channels} channels")
    if rate == 0:
        raise FormatError("fmt chunk declares a zero sample rate")

    if tag == WAVE_FORMAT_PCM and bits == 16:
        bit_format = "pcm16"
    elif tag == WAVE_FORMAT_PCM and bits == 24:
        bit_format = "pcm24"
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        bit_format = "float32"
    else:
        raise FormatError(f"unsupported WAV encoding (format tag {tag:#06x}, {bits} bits)")
    if block_align != bits // 8:
        raise FormatError(f"block align {block_align} does not match {bits}-bit mono")
    return WavSpec(rate, bit_format, channels), block_align


def _chunk(chunk_id: bytes, body: bytes) -> bytes:
    pad = b"\x00" if len(body) & 1 else b""
    return _CHUNK.pack(chunk_id, len(body)) + body + pad


class WavRepository:
    """
    Repository for WAV endpoints of the pipeline.

    Single Responsibility: Converts between WAV bytes and AudioBuffer.
    """

    def decode(self, raw: Union[bytes, bytearray]) -> Tuple[AudioBuffer, WavSpec]:
        """
        Decode WAV bytes.

        Samples are normalized: pcm16 / 32768, pcm24 / 8388608, float32 as stored.

        Raises:
            FormatError: On a non-RIFF file, missing chunks or unsupported encodings
            TruncationError: When chunks run past the end of the file
            ValidationError: On multichannel files
        """
        raw = bytes(raw)
        layout = _scan(raw)
        spec = layout.spec
        if not spec.is_standard_rate:
            logger.warning("WAV sample rate %d Hz is neither 24000 nor 48000", spec.sample_rate)

        n_frames = layout.data_size // layout.block_align
        if n_frames == 0:
            return AudioBuffer(np.zeros(0), spec.sample_rate), spec

        dtype, divisor = _DECODE[spec.bit_format]
        try:
            data, _ = sf.read(io.BytesIO(raw), dtype=dtype, always_2d=False)
        except (RuntimeError, ValueError, TypeError) as e:
            raise FormatError(f"undecodable WAV data: {e}") from None
        if data.ndim != 1 or data.shape[0] != n_frames:
            raise FormatError(f"decoded {data.shape[0]} frames, data chunk holds {n_frames}")

        samples = data.astype(np.float64) / divisor
        if not np.all(np.isfinite(samples)):
            raise FormatError("WAV data holds non-finite samples")
        return AudioBuffer(samples, spec.sample_rate), spec

    def encode(self, buffer: AudioBuffer, spec: WavSpec) -> Tuple[bytes, int]:
        """
        Encode a buffer.

        Samples outside [-1, 1] are clamped and counted.

        Returns:
            Tuple (file bytes, number of clamped samples)
        """
        if buffer.sample_rate != spec.sample_rate:
            raise ValidationError(
                f"buffer rate {buffer.sample_rate} Hz differs from WAV spec rate {spec.sample_rate} Hz"
            )
        samples = buffer.samples
        clamped = int(np.count_nonzero(np.abs(samples) > 1.0))
        if clamped:
            logger.warning("clamped %d samples outside [-1, 1]", clamped)
        samples = np.clip(samples, -1.0, 1.0)

        if spec.bit_format == "float32":
            tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
            payload = samples.astype("<f4").tobytes()
        else:
            scale = _PCM_SCALE[spec.bit_format]
            quantized = np.clip(np.round(samples * scale), -scale, scale - 1)
            if spec.bit_format == "pcm16":
                tag, bits = WAVE_FORMAT_PCM, 16
                payload = quantized.astype("<i2").tobytes()
            else:
                tag, bits = WAVE_FORMAT_PCM, 24
                payload = quantized.astype("<i4").view(np.uint8).reshape(-1, 4)[:, :3].tobytes()

        block_align = bits // 8
        fmt = _FMT.pack(tag, 1, spec.sample_rate, spec.sample_rate * block_align, block_align, bits)
        chunks = []
        if tag == WAVE_FORMAT_IEEE_FLOAT:
            chunks.append(_chunk(b"fmt ", fmt + struct.pack("<H", 0)))
            chunks.append(_chunk(b"fact", struct.pack("<I", len(samples))))
        else:
            chunks.append(_chunk(b"fmt ", fmt))
        chunks.append(_chunk(b"data", payload))
        body = b"WAVE" + b"".join(chunks)
        return _CHUNK.pack(b"RIFF", len(body)) + body, clamped

    def read_wav(self, path: PathLike) -> Tuple[AudioBuffer, WavSpec]:
        """Read a WAV file."""
        return self.decode(read_bytes(path))

    def write_wav(self, path: PathLike, buffer: AudioBuffer, spec: WavSpec) -> int:
        """
        Write a WAV file.

        Returns:
            Number of clamped samples
        """
        payload, clamped = self.encode(buffer, spec)
        write_bytes_atomic(path, payload)
        return clamped
