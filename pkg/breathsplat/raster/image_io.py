from pathlib import Path

import numpy as np

from breathsplat.errors import DatasetError
from breathsplat.utils.logger import logger


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_ppm(file_path: Path, image: np.ndarray) -> Path:
    """Write an (H, W, 3) image in [0, 1] as binary PPM (P6, max value 255)."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got {image.shape}")
    height, width = image.shape[:2]
    with open(file_path, "wb") as f:
        f.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        f.write(to_uint8(image).tobytes())
    return Path(file_path)


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_ppm(file_path: Path) -> np.ndarray:
    """Read a P6 file written by `write_ppm` as float64 (H, W, 3) in [0, 1].

    Raises:
        DatasetError: If the file is missing, not an 8-bit P6 image or truncated.
    """
    try:
        with open(file_path, "rb") as f:
            data = f.read()
        tokens, offset = _header_tokens(data, 4)
        magic, width, height, max_value = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    except FileNotFoundError as e:
        logger.error(f"❌ Frame not found: {file_path}")
        raise DatasetError(f"frame not found: {file_path}") from e
    except (ValueError, IndexError) as e:
        raise DatasetError(f"malformed PPM header in {file_path}") from e
    if magic != b"P6" or max_value != 255:
        raise DatasetError(f"{file_path} is not an 8-bit binary PPM")
    expected = width * height * 3
    if len(data) - offset < expected:
        logger.error(f"❌ Truncated frame: {file_path}")
        raise DatasetError(f"{file_path} holds {max(len(data) - offset, 0)} raster bytes, expected {expected}")
    raster = np.frombuffer(data, dtype=np.uint8, count=expected, offset=offset)
    return raster.reshape(height, width, 3).astype(np.float64) / 255.0


def write_depth(file_path: Path, depth: np.ndarray) -> Path:
    """Raw little-endian float32, row-major; +inf stays IEEE infinity."""
    with open(file_path, "wb") as f:
        f.write(np.asarray(depth, dtype="<f4").tobytes())
    return Path(file_path)


def read_depth(file_path: Path, width: int, height: int) -> np.ndarray:
    """Read a raw depth raster; the size is not stored in the file so it is passed in.

    Raises:
        DatasetError: If the file is missing or holds a different number of pixels.
    """
    try:
        depth = np.fromfile(file_path, dtype="<f4")
    except FileNotFoundError as e:
        logger.error(f"❌ Depth map not found: {file_path}")
        raise DatasetError(f"depth map not found: {file_path}") from e
    if depth.size != width * height:
        raise DatasetError(f"{file_path} holds {depth.size} values, expected {width * height}")
    return depth.reshape(height, width).astype(np.float64)


def depth_to_image(depth: np.ndarray) -> np.ndarray:
    """Linear grey-scale rendering of the finite depth range: nearest 0, farthest 1, empty pixels 0."""
    valid = np.isfinite(depth) & (depth > 0)
    image = np.zeros(depth.shape + (3,))
    if not valid.any():
        return image
    near, far = depth[valid].min(), depth[valid].max()
    span = far - near if far > near else 1.0
    grey = np.where(valid, (np.where(valid, depth, near) - near) / span, 0.0)
    image[...] = grey[..., None]
    return image
