"""Deterministic discrete-event simulator of 5G inter-slice switching."""

from .cases import (
    CaseId,
    CaseInitiator,
    ReleaseTiming,
    SwitchingCase,
    SwitchOutcome,
    SwitchResult,
    classify_case,
    execute_case,
    measure_interruption,
)
from .engine import RunResult, Simulation, run_scenario
from .errors import (
    AllowedNssaiOverflow,
    InvalidCombination,
    InvalidRequest,
    InvalidSessionState,
    MetricUndefined,
    NoServingAmf,
    ScenarioError,
    SchedulingError,
    SimError,
    SimInvariantError,
    TraceFormatError,
)
from .nf import NfInstance, NfKind, amf_can_serve, select_amf
from .procedures import (
    Initiator,
    ProcedureKind,
    ProcedureRun,
    run_pdu_session_establishment,
    run_pdu_session_release,
    run_registration,
    run_ue_configuration_update,
)
from .scenario import Scenario, build_world, load_scenario, validate_scenario
from .slices import (
    NssaiView,
    PduSession,
    PduSessionState,
    ServiceType,
    SessionType,
    SNssai,
    Subscription,
    UeContext,
    compute_allowed_nssai,
    select_alternate_snssai,
    verify_requested_nssai,
)
from .triggers import (
    Initiation,
    TriggerMechanism,
    TriggerName,
    TriggerSpec,
    evaluate_triggers,
    validate_initiation,
)

__version__ = "0.1.0"
