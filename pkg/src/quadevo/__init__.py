"""Co-optimization of quadruped leg morphology and spline gait control."""

__version__ = "0.1.0"
