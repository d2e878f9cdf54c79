"""Exception types shared across the toolkit."""


class RdpkitError(Exception):
    pass


class NotAUnit(RdpkitError):
    pass


class VariableMismatch(RdpkitError):
    pass


class TruncationUnderflow(RdpkitError):
    pass


class TruncationTooLow(RdpkitError):
    pass


class CeilingExceeded(RdpkitError):
    """Local dimension failed to stabilize; carries the last two dimensions."""

    def __init__(self, dims, msg=""):
        self.dims = dims
        super().__init__(msg or f"no stabilization before ceiling, last dims {dims}")


class NotPClosed(RdpkitError):
    pass


class WitnessRejected(RdpkitError):
    def __init__(self, variable, residual):
        self.variable = variable
        self.residual = residual
        super().__init__(f"claimed h fails on {variable}: residual {residual}")


class Inconclusive(RdpkitError):
    pass


class NotHypersurface(RdpkitError):
    def __init__(self, tried, msg=""):
        self.tried = tried
        super().__init__(msg or f"no 3-generator choice admits a single relation; tried {tried}")


class OutOfRange(RdpkitError):
    pass


class CharMismatch(RdpkitError):
    pass


class UnknownType(RdpkitError):
    pass


class NoCommonCofactor(RdpkitError):
    pass


class RhoOrderMismatch(RdpkitError):
    pass


class DepthExceeded(RdpkitError):
    pass


class NotIsolated(RdpkitError):
    pass


class CoindexAmbiguous(RdpkitError):
    def __init__(self, candidates, msg=""):
        self.candidates = candidates
        super().__init__(msg or f"tjurina lookup not injective: {candidates}")


class FieldCeilingExceeded(RdpkitError):
    """Point enumeration would need an extension beyond the configured ceiling."""


class ParseError(RdpkitError):
    def __init__(self, field_name, msg):
        self.field_name = field_name
        super().__init__(f"{field_name}: {msg}")
