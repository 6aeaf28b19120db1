"""Chern curvature of Hermitian metrics given as coordinate formulas."""

__version__ = "0.1.0"

from .curvature import MetricSpec, MixedCurvatureParams, PointGeometry, geometry_at
from .expr import ChartPoint, evaluate, parse_expression, wirtinger_derivative
from .metricfile import MetricFile, load_metric_file
from .zoo import ZOO_NAMES, zoo_metric

__all__ = [
    "ChartPoint",
    "MetricFile",
    "MetricSpec",
    "MixedCurvatureParams",
    "PointGeometry",
    "ZOO_NAMES",
    "evaluate",
    "geometry_at",
    "load_metric_file",
    "parse_expression",
    "wirtinger_derivative",
    "zoo_metric",
]
