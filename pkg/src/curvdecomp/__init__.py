"""Numerical and exact verification that a union of six smooth sheets meeting
along a line and three rays is a curvature varifold without boundary whose
only decomposition splits it into pieces that are not."""

__version__ = "0.1.0"
