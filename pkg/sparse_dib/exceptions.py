"""
Error hierarchy for Sparse DIB.
Every error carries structured fields so the CLI can report it as JSON.
"""


class SparseDibError(ValueError):
    """Base class for every error raised by the package."""

    def __init__(self, message, **fields):
        super().__init__(message)
        self.message = message
        self.fields = fields

    def to_dict(self):
        """Machine-readable form used by the CLI error reporter."""
        payload = {"error": type(self).__name__, "message": self.message}
        payload.update(self.fields)
        return payload


class ConfigurationError(SparseDibError):
    pass


class AbsoluteContinuityViolation(SparseDibError):
    pass


class AllZeroWeights(SparseDibError):
    pass


class ConstantFeature(SparseDibError):
    def __init__(self, feature):
        super().__init__(f"Feature {feature} has zero standard deviation", feature=int(feature))
        self.feature = int(feature)


class DimensionMismatch(SparseDibError):
    pass


class NonFiniteData(SparseDibError):
    pass


class EmptyCluster(SparseDibError):
    def __init__(self, cluster):
        super().__init__(f"Cluster {cluster} has no members", cluster=int(cluster))
        self.cluster = int(cluster)


class InsufficientPoints(SparseDibError):
    pass


class NonConvergence(SparseDibError):
    pass


class DegenerateMI(SparseDibError):
    pass


class LengthMismatch(SparseDibError):
    pass


class InfeasibleSpec(SparseDibError):
    pass


class MalformedInput(SparseDibError):
    def __init__(self, message, row=None, column=None, path=None):
        super().__init__(message, row=row, column=column, path=path)
        self.row = row
        self.column = column
