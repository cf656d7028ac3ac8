"""Exception types shared across the package."""


class DomainError(ValueError):
    """A numeric argument is outside its mathematical domain."""


class EmbeddingError(RuntimeError):
    """The circulant embedding is not a valid covariance matrix."""
