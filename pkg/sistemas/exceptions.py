# sistemas/exceptions.py


class EllipticError(Exception):
    """Raiz de todos os erros do pacote."""


class MeshError(EllipticError):
    pass


class EllipticityError(EllipticError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class MMatrixError(EllipticError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class DimensionMismatch(EllipticError):
    pass


class NumericalFailure(EllipticError):
    """Falha do cálculo em si (não da entrada): o resultado fica inconclusivo."""


class SolveError(NumericalFailure):
    pass


class ConvergenceError(NumericalFailure):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class SaturationError(NumericalFailure):
    """Argumento de exponencial acima do limiar: tratado como indício de explosão."""


class ParameterError(EllipticError):
    pass


class ExpressionError(EllipticError):
    pass


class EnvelopeError(NumericalFailure):
    pass


class BracketError(NumericalFailure):
    pass


class InconsistentBisection(NumericalFailure):
    pass


class ConfigError(EllipticError):
    """Configuração JSON inválida; a mensagem traz o campo (ou linha/coluna) do problema."""
