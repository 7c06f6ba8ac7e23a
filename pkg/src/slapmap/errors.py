"""Exception hierarchy shared by all slapmap modules."""


class SlapMapError(Exception):
    """Base class for every error raised by this package."""


# geometry
class SelfIntersecting(SlapMapError, ValueError):
    pass


class Degenerate(SlapMapError, ValueError):
    pass


class InvalidArity(SlapMapError, ValueError):
    pass


class OutOfFamily(SlapMapError, ValueError):
    pass


class VertexHit(SlapMapError):
    """A normal ray (or an orbit) lands on a vertex, where the map is ambiguous."""


class AtVertex(SlapMapError, ValueError):
    pass


class NotExpanding(SlapMapError):
    pass


# pwamap
class OutOfDomain(SlapMapError, ValueError):
    pass


class EmptyDomain(SlapMapError):
    pass


class NotInvariant(SlapMapError):
    pass


# lorenz / regular
class OutOfRange(SlapMapError, ValueError):
    pass


class TowerValidationFailed(SlapMapError):
    pass


class EvenArity(SlapMapError, ValueError):
    pass


class NotConstant(SlapMapError):
    pass


# triangles
class InvalidAngles(SlapMapError, ValueError):
    pass


# ergodic / kite
class NoConvergence(SlapMapError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class OutOfBranch(SlapMapError, ValueError):
    pass


class OutOfPiDomain(SlapMapError, ValueError):
    def __init__(self, index, message=""):
        super().__init__(f"inequality {index} violated{': ' + message if message else ''}")
        self.index = index


class SingularJacobian(SlapMapError):
    pass


class OrbitMismatch(SlapMapError):
    def __init__(self, condition, message=""):
        super().__init__(f"{condition}: {message}" if message else condition)
        self.condition = condition


class NoBifurcationFound(SlapMapError):
    pass


class ConstructionFailed(SlapMapError):
    pass
