"""Short-term water demand forecasting with k-means class features and GRU networks."""

from .errors import AquacastError, DataError, NumericalError, ShapeError

__version__ = "0.1.0"

__all__ = ["AquacastError", "DataError", "NumericalError", "ShapeError", "__version__"]
