"""whdbar: integral-operator dbar solvers on weighted homogeneous varieties."""

__version__ = "0.1.0"
