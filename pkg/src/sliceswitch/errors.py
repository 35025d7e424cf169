"""Exception hierarchy shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class InvalidRequest(SimError):
    """A procedure was invoked with arguments that violate its precondition."""


class AllowedNssaiOverflow(SimError):
    """Updating the Allowed NSSAI would exceed the eight-slice cap."""


class NoServingAmf(SimError):
    """No AMF instance can serve the requested Allowed NSSAI."""


class InvalidSessionState(SimError):
    """Illegal PDU session state transition or procedure on a wrong state."""


class InvalidCombination(SimError):
    """Switching-case attributes do not match any of the eleven cases."""


class MetricUndefined(SimError):
    """The interruption metric is only defined for completed switches."""


class SchedulingError(SimError):
    """An event was scheduled into the simulated past."""


class ScenarioError(SimError):
    """Scenario file failed validation or referential-integrity checks."""


class TraceFormatError(SimError):
    """A trace file line does not match the expected field layout."""


class SimInvariantError(SimError):
    """A runtime invariant was violated; names the invariant and event seq."""

    def __init__(self, invariant: str, event_seq: int, detail: str = ""):
        self.invariant = invariant
        self.event_seq = event_seq
        self.detail = detail
        msg = f"invariant '{invariant}' violated at event seq={event_seq}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
