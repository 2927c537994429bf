class LabError(Exception):
    pass

class UsageError(LabError, ValueError):
    pass

class ConfigError(UsageError):
    pass

class MatrixFormatError(UsageError):
    pass

class ConstructionError(LabError):
    """
    Raised when a built model violates one of its structural relations.

    Parameters
    ----------
    relation : str
        Short name of the violated relation (e.g. "[m,m] in k").

    residual : float
        Max-abs residual observed for that relation.
    """

    def __init__(self, relation: str, residual: float) -> None:
        self.relation = relation
        self.residual = residual
        super().__init__(f"{relation} violated (residual={residual:.3e})")

class FixtureError(LabError):
    pass

class SampleError(LabError):
    def __init__(self, index: int, message: str = "non-finite integrand") -> None:
        self.index = index
        super().__init__(f"sample {index}: {message}")
