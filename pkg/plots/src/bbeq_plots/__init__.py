"""Figure generation for bbeq experiment artifacts."""

from .bootstrap import bca_interval
from .figures import CurveGroup, discover_groups, plot_nashconv, plot_strategy

__all__ = ["bca_interval", "CurveGroup", "discover_groups", "plot_nashconv", "plot_strategy"]
