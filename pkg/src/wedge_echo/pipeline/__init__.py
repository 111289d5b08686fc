"""Configuration, scan orchestration, artifact emission and CLI."""

from .config import PRESETS, RunConfig, load_preset  # noqa: F401
from .manifest import RunManifest  # noqa: F401
from .runner import reproduce_figure, run_scan  # noqa: F401
from .svg import PlotStyle, Series, emit_plot  # noqa: F401
