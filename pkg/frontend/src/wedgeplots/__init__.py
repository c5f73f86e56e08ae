"""Figure rendering for pecwedge datasets."""

from .render import DatasetError, PlotSpec, RenderResult, load_dataset, render

__version__ = "0.1.0"

__all__ = ["PlotSpec", "RenderResult", "DatasetError", "load_dataset", "render", "__version__"]
