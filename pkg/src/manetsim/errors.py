"""Exception hierarchy shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class ParameterError(SimError, ValueError):
    """A parameter is out of its documented range."""


class UnknownAgentError(SimError, KeyError):
    """An agent id is not present in the referenced structure."""


class IdentityError(SimError):
    """Agent identity misuse: duplicate uid, reused uid."""


class LifecycleError(SimError):
    """Operation on an agent or endpoint in the wrong lifecycle state."""


class AddressInUseError(SimError):
    """A transport address is already bound."""


class ModeError(SimError):
    """Operation not valid in the current scheduler mode."""


class RoleError(SimError):
    """Operation not valid for the agent's current protocol role."""


class SynchronizationError(SimError):
    """A barrier or other synchronization primitive failed or timed out."""


class DecodeError(SimError):
    """A byte payload could not be decoded as a protocol message."""


class ScenarioError(SimError):
    """A scenario file failed to parse or validate.

    ``issues`` lists human-readable diagnostics, each prefixed with the
    offending field path.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))
