"""Operation accounting for the four window regimes.

Cost per image is split into A, the number of window optimizations, and
B, the number of candidate evaluations each optimization performs. A
follows exactly from the window geometry. B is 2 for the disjoint mode
(two lattice-index candidates per block) and 2 per covered block for the
joint window modes, so the per-window mean depends on how many blocks
each window straddles.

Three B columns are reported side by side and deliberately never
reconciled: "counted" enumerates the actual windows of the given
dimensions, "formula" is a closed-form estimate defined for power-of-two
window sides, and "legacy" carries the op counts this table format has
traditionally been compared against. The formula and legacy values for
the dense 4x4 window disagree with each other and with the counted mean;
they are reproduced as published figures, not asserted as equivalent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import WindowMode, mode_from_label

LEGACY_OPS_PER_WINDOW = {
    "non": 2.0,
    "over4": 8.40,
    "gauss": 4871.0,
    "semi": 16.0,
}

STANDARD_MODE_LABELS = ("non", "over4", "gauss", "semi")


def non_overlapped_window_count(height: int, width: int) -> int:
    """Disjoint 4x4 tiles: height * width / 16."""
    _require_grid(height, width)
    return (height // 4) * (width // 4)


def overlapped_window_count(height: int, width: int, n: int) -> int:
    """Dense sliding n x n windows: (height - n + 1) * (width - n + 1)."""
    if n < 4:
        raise ValueError("window side must be at least 4")
    if n > min(height, width):
        raise ValueError(
            f"window side {n} exceeds plane dimensions {height}x{width}")
    return (height - n + 1) * (width - n + 1)


def gaussian_window_count(height: int, width: int) -> int:
    """Centered windows over the zero-padded plane: one per pixel."""
    if height <= 0 or width <= 0:
        raise ValueError("plane dimensions must be positive")
    return height * width


def semi_window_count(height: int, width: int) -> int:
    """8x8 windows sliding with stride 4: (height/4 - 1) * (width/4 - 1)."""
    _require_grid(height, width)
    if height < 8 or width < 8:
        raise ValueError(
            f"plane {height}x{width} is too small for 8x8 windows")
    return (height // 4 - 1) * (width // 4 - 1)


def _require_grid(height: int, width: int) -> None:
    for name, dim in (("height", height), ("width", width)):
        if dim <= 0 or dim % 4:
            raise ValueError(f"{name} {dim} is not a positive multiple of 4")


def overlapped_ops_formula(n: int) -> float:
    """Closed-form estimate of per-window candidate evaluations.

    Defined for power-of-two window sides n >= 4:
    (2^((n/2)^2) + 6 * 2^((n/2)(n/2 + 1)) + 9 * 2^((n/2 + 1)^2)) / 16.
    Gives 313 at n = 4. Kept as a reference figure; it does not match
    the counted per-window mean for any plane size.
    """
    if n < 4 or n & (n - 1):
        raise ValueError("the estimate is defined for power-of-two sides >= 4")
    half = n // 2
    return (2.0 ** (half * half)
            + 6.0 * 2.0 ** (half * (half + 1))
            + 9.0 * 2.0 ** ((half + 1) * (half + 1))) / 16.0


def blocks_covered(top: int, left: int, n: int) -> int:
    """Distinct 4x4 grid blocks intersected by an n x n window.

    Counts blocks of the unbounded 4-pixel grid; the window is assumed to
    sit over valid block rows and columns.
    """
    if n <= 0:
        raise ValueError("window size must be positive")
    count = 1
    for offset in (top, left):
        count *= (offset + n - 1) // 4 - offset // 4 + 1
    return count


def _axis_cover_over(dim: int, n: int) -> np.ndarray:
    offsets = np.arange(dim - n + 1)
    return (offsets + n - 1) // 4 - offsets // 4 + 1


def _axis_cover_gauss(dim: int, n: int) -> np.ndarray:
    half = n // 2
    centers = np.arange(dim)
    lo = np.maximum(centers - half, 0)
    hi = np.minimum(centers + half, dim - 1)
    return hi // 4 - lo // 4 + 1


def mean_ops_per_window(height: int, width: int, mode: WindowMode) -> float:
    """Counted mean candidate evaluations per window of ``mode``.

    Joint window modes enumerate 2^(covered blocks) combinations, so the
    mean is taken over every window position of the given plane; windows
    of the Gaussian regime only count blocks that actually exist after
    clipping to the plane. The disjoint mode evaluates its two lattice
    candidates per block.
    """
    if mode.kind == "non":
        _require_grid(height, width)
        return 2.0
    if mode.kind == "semi":
        semi_window_count(height, width)
        return 16.0
    if mode.kind == "over":
        overlapped_window_count(height, width, mode.n)
        rows = _axis_cover_over(height, mode.n)
        cols = _axis_cover_over(width, mode.n)
    else:
        gaussian_window_count(height, width)
        rows = _axis_cover_gauss(height, mode.n)
        cols = _axis_cover_gauss(width, mode.n)
    return float(np.mean(2.0 ** np.outer(rows, cols)))


@dataclass(frozen=True)
class OpsEntry:
    """One B column for one mode: per-window, per-image, normalized."""

    model: str
    per_window: float
    per_image: float
    normalized: float


@dataclass(frozen=True)
class ModeComplexity:
    label: str
    window_count: int
    ops: list


@dataclass(frozen=True)
class ComplexityReport:
    width: int
    height: int
    modes: list

    def mode(self, label: str) -> ModeComplexity:
        for row in self.modes:
            if row.label == label:
                return row
        raise KeyError(label)

    def to_json_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "modes": [
                {
                    "mode": row.label,
                    "window_count": row.window_count,
                    "ops": [
                        {
                            "model": entry.model,
                            "per_window": entry.per_window,
                            "per_image": entry.per_image,
                            "normalized": entry.normalized,
                        }
                        for entry in row.ops
                    ],
                }
                for row in self.modes
            ],
        }

    def format_table(self) -> str:
        labels = [row.label for row in self.modes]
        lines = []
        header = ["quantity"] + labels
        rows = [["window count"] + [f"{row.window_count}" for row in self.modes]]
        models = []
        for row in self.modes:
            for entry in row.ops:
                if entry.model not in models:
                    models.append(entry.model)
        for model in models:
            per_window, per_image, normalized = [], [], []
            for row in self.modes:
                entry = next((e for e in row.ops if e.model == model), None)
                if entry is None:
                    per_window.append("-")
                    per_image.append("-")
                    normalized.append("-")
                else:
                    per_window.append(f"{entry.per_window:g}")
                    per_image.append(f"{entry.per_image:.6g}")
                    normalized.append(f"{entry.normalized:.4f}")
            rows.append([f"ops/window ({model})"] + per_window)
            rows.append([f"ops/image ({model})"] + per_image)
            rows.append([f"normalized ({model})"] + normalized)
        widths = [max(len(r[i]) for r in [header] + rows)
                  for i in range(len(header))]
        def fmt(cells):
            return "  ".join(c.rjust(w) for c, w in zip(cells, widths))
        lines.append(fmt(header))
        lines.append(fmt(["-" * w for w in widths]))
        for r in rows:
            lines.append(fmt(r))
        return "\n".join(lines)


def window_count(height: int, width: int, mode: WindowMode) -> int:
    if mode.kind == "non":
        return non_overlapped_window_count(height, width)
    if mode.kind == "over":
        return overlapped_window_count(height, width, mode.n)
    if mode.kind == "gauss":
        return gaussian_window_count(height, width)
    return semi_window_count(height, width)


def complexity_report(height: int, width: int) -> ComplexityReport:
    """Per-mode operation accounting for a height x width plane.

    Everything is normalized against the counted cost of the disjoint
    mode (two candidate evaluations per block).
    """
    base = non_overlapped_window_count(height, width) * 2.0
    modes = []
    for label in STANDARD_MODE_LABELS:
        mode = mode_from_label(label)
        count = window_count(height, width, mode)
        entries = []

        def add(model, per_window):
            per_image = count * per_window
            entries.append(OpsEntry(model=model, per_window=float(per_window),
                                    per_image=float(per_image),
                                    normalized=float(per_image / base)))

        add("counted", mean_ops_per_window(height, width, mode))
        if mode.kind == "over" and mode.n >= 4 and not (mode.n & (mode.n - 1)):
            add("formula", overlapped_ops_formula(mode.n))
        legacy = LEGACY_OPS_PER_WINDOW.get(label)
        if legacy is not None:
            add("legacy", legacy)
        modes.append(ModeComplexity(label=label, window_count=count,
                                    ops=entries))
    return ComplexityReport(width=width, height=height, modes=modes)
