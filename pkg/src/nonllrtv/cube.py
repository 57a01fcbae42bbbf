"""Hyperspectral cube container, matricization, and cube file I/O.

Conventions
-----------
A cube is a real array of shape ``(m, n, p)``: ``m`` spatial rows, ``n``
spatial columns, ``p`` spectral bands, indexed ``cube[i, j, k]``.
Intensities are nominally scaled to [0, 1].  Internal arithmetic is 64-bit;
files store 32-bit floats.

The flattening convention is frozen: pixels scan in C order (the column
index varies fastest), so matricization is a pure reshape and every
derived ordering in the package agrees with it.

On disk a cube is a pair of files sharing one stem: a JSON header
``{"dims": [m, n, p], "dtype": "f32", "order": "bsq"}`` next to a raw
little-endian float32 binary with the same name and a ``.bin`` suffix,
holding bands sequentially (all of band 0's m-by-n plane, then band 1,
and so on).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "HsiCube",
    "as_cube_array",
    "casorati",
    "inverse_casorati",
    "load_cube",
    "save_cube",
]

_HEADER_DTYPE = "f32"
_HEADER_ORDER = "bsq"


@dataclass(frozen=True, eq=False)
class HsiCube:
    """Validated cube container used at I/O boundaries.

    Wraps a float64 array of shape ``(m, n, p)`` and rejects anything that
    is not a finite 3-D cube with at least one voxel per axis.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or min(data.shape) < 1:
            raise ConfigurationError(
                f"cube must be 3-D (rows, cols, bands) with positive extents, got shape {data.shape}"
            )
        if not np.isfinite(data).all():
            raise ConfigurationError("cube contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]


def as_cube_array(cube) -> np.ndarray:
    """Return the float64 ``(m, n, p)`` array behind an HsiCube or array-like."""
    data = cube.data if isinstance(cube, HsiCube) else np.asarray(cube, dtype=np.float64)
    if data.ndim != 3:
        raise ValueError(f"expected a 3-D cube, got shape {data.shape}")
    return data


def casorati(cube) -> np.ndarray:
    """Matricize a cube into an ``(m*n, p)`` matrix.

    Column ``k`` is band ``k`` flattened in scan order: row ``i*n + j`` of
    the result holds the spectrum sample ``cube[i, j, k]``.  The result is
    a reshape (a view when the input is contiguous).
    """
    data = as_cube_array(cube)
    m, n, p = data.shape
    return data.reshape(m * n, p)


def inverse_casorati(matrix, dims) -> np.ndarray:
    """Fold an ``(m*n, p)`` matrix back into a cube of shape ``dims``.

    Exact inverse of :func:`casorati`; returns a reshape (a view when the
    input is contiguous).
    """
    m, n, p = dims
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.shape != (m * n, p):
        raise ValueError(f"matrix shape {mat.shape} does not match dims {tuple(dims)}")
    return mat.reshape(m, n, p)


def _binary_path(header_path: Path) -> Path:
    return header_path.with_suffix(".bin")


def load_cube(header_path) -> HsiCube:
    """Load a cube from its JSON header; the binary sits next to it as ``.bin``."""
    header_path = Path(header_path)
    try:
        header = json.loads(header_path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read cube header {header_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"cube header {header_path} is not valid JSON: {exc}") from exc

    dims = header.get("dims")
    if (
        not isinstance(dims, list)
        or len(dims) != 3
        or not all(isinstance(d, int) and d > 0 for d in dims)
    ):
        raise ConfigurationError(f"cube header {header_path}: dims must be three positive integers, got {dims!r}")
    if header.get("dtype") != _HEADER_DTYPE:
        raise ConfigurationError(f"cube header {header_path}: unsupported dtype {header.get('dtype')!r}")
    if header.get("order") != _HEADER_ORDER:
        raise ConfigurationError(f"cube header {header_path}: unsupported order {header.get('order')!r}")

    m, n, p = dims
    binary_path = _binary_path(header_path)
    if not binary_path.is_file():
        raise ConfigurationError(f"cube binary {binary_path} not found")
    expected = 4 * m * n * p
    actual = binary_path.stat().st_size
    if actual != expected:
        raise ConfigurationError(
            f"cube binary {binary_path} holds {actual} bytes, expected {expected} for dims {dims}"
        )

    flat = np.fromfile(binary_path, dtype="<f4")
    bands_first = flat.reshape(p, m, n)
    return HsiCube(bands_first.transpose(1, 2, 0).astype(np.float64))


def save_cube(cube, header_path) -> tuple[Path, Path]:
    """Write a cube as a JSON header plus float32 band-sequential binary.

    Values are cast to little-endian float32; round-tripping a cube loaded
    from disk is byte-exact.  Returns the (header, binary) paths.
    """
    data = as_cube_array(cube)
    if not np.isfinite(data).all():
        raise ConfigurationError("refusing to save a cube with non-finite values")
    header_path = Path(header_path)
    binary_path = _binary_path(header_path)
    m, n, p = data.shape
    header = {"dims": [m, n, p], "dtype": _HEADER_DTYPE, "order": _HEADER_ORDER}
    header_path.write_text(json.dumps(header) + "\n")
    bands_first = np.ascontiguousarray(data.transpose(2, 0, 1), dtype="<f4")
    bands_first.tofile(binary_path)
    return header_path, binary_path
