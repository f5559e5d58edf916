"""Binary PPM (P6) rendering of space-time diagrams and 2D occupation maps.

Space runs left to right and time top to bottom.  State 0 is white, state 1
black and state 2 takes the rule's colour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OVERLAY_RGB = (0, 102, 255)
DEFAULT_PIXEL_CAP = 1 << 26


class ImageTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class RenderSpec:
    cell_px: int = 1
    second_rgb: tuple[int, int, int] = (30, 60, 220)
    overlay: np.ndarray | None = None
    pixel_cap: int = DEFAULT_PIXEL_CAP

    def __post_init__(self):
        if self.cell_px < 1:
            raise ValueError("cell_px must be at least 1")

    def palette(self) -> np.ndarray:
        return np.array([(255, 255, 255), (0, 0, 0), self.second_rgb, OVERLAY_RGB], dtype=np.uint8)


def render_states(states: np.ndarray, spec: RenderSpec = RenderSpec()) -> bytes:
    """PPM bytes for a (rows, cols) array of states in {0, 1, 2}."""
    states = np.asarray(states)
    if states.ndim != 2 or states.size == 0:
        raise ValueError("need a non-empty 2D state array")
    h, w = states.shape
    if h * w * spec.cell_px ** 2 > spec.pixel_cap:
        raise ImageTooLarge(f"{w * spec.cell_px}x{h * spec.cell_px} exceeds the pixel cap")
    idx = states.astype(np.intp)
    if spec.overlay is not None:
        if spec.overlay.shape != states.shape:
            raise ValueError("overlay shape must match the diagram")
        idx = np.where(spec.overlay, 3, idx)
    rgb = spec.palette()[idx]
    if spec.cell_px > 1:
        rgb = rgb.repeat(spec.cell_px, axis=0).repeat(spec.cell_px, axis=1)
    header = f"P6\n{rgb.shape[1]} {rgb.shape[0]}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(rgb).tobytes()


def render_diagram(diagram, spec: RenderSpec = RenderSpec(), window: tuple[int, int] | None = None) -> tuple[bytes, int]:
    """Render a SpaceTimeDiagram; returns (bytes, x of the leftmost column)."""
    x0, x1 = window if window is not None else diagram.extent()
    return render_states(diagram.as_array(x0, x1), spec), x0


def render_grid(grid, spec: RenderSpec = RenderSpec()) -> bytes:
    """Occupied cells of a 2D solidification run in black, with y increasing upwards."""
    when = grid.occupied_at if hasattr(grid, "occupied_at") else np.asarray(grid)
    return render_states(np.flipud(when >= 0).astype(np.uint8), spec)


def parse_ppm(data: bytes) -> tuple[int, int, np.ndarray]:
    """(width, height, rgb array) from P6 bytes; used by tests and tools."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = (int(v) for v in parts[1].split())
    rgb = np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
    return w, h, rgb
