"""Signaling message records and the canonical message-name vocabulary."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

# Registration / configuration update
REGISTRATION_REQUEST = "RegistrationRequest"
REGISTRATION_ACCEPT = "RegistrationAccept"
REGISTRATION_REJECT = "RegistrationReject"
UE_CONFIGURATION_UPDATE_COMMAND = "UeConfigurationUpdateCommand"
UE_CONFIGURATION_UPDATE_COMPLETE = "UeConfigurationUpdateComplete"
SUBSCRIPTION_DATA_REQUEST = "SubscriptionDataRequest"
SUBSCRIPTION_DATA_RESPONSE = "SubscriptionDataResponse"
SLICE_SELECTION_REQUEST = "SliceSelectionRequest"
SLICE_SELECTION_RESPONSE = "SliceSelectionResponse"
AMF_SELECTION_REQUEST = "AmfSelectionRequest"
AMF_SELECTION_RESPONSE = "AmfSelectionResponse"
AMF_CONTEXT_TRANSFER = "AmfContextTransfer"

# PDU session release
PDU_SESSION_RELEASE_REQUEST = "PduSessionReleaseRequest"
N4_SESSION_RELEASE = "N4SessionRelease"
N4_SESSION_RELEASE_ACK = "N4SessionReleaseAck"
RAN_RESOURCE_RELEASE = "RanResourceRelease"
RAN_RESOURCE_RELEASE_ACK = "RanResourceReleaseAck"
PDU_SESSION_RELEASE_COMMAND = "PduSessionReleaseCommand"
PDU_SESSION_RELEASE_COMPLETE = "PduSessionReleaseComplete"

# PDU session establishment
PDU_SESSION_ESTABLISHMENT_REQUEST = "PduSessionEstablishmentRequest"
SM_SUBSCRIPTION_REQUEST = "SmSubscriptionRequest"
SM_SUBSCRIPTION_RESPONSE = "SmSubscriptionResponse"
DN_AUTH_REQUEST = "DnAuthRequest"
DN_AUTH_RESPONSE = "DnAuthResponse"
POLICY_RETRIEVAL = "PolicyRetrieval"
POLICY_RETRIEVAL_RESPONSE = "PolicyRetrievalResponse"
N4_SESSION_ESTABLISHMENT = "N4SessionEstablishment"
N4_SESSION_ESTABLISHMENT_ACK = "N4SessionEstablishmentAck"
IP_ADDRESS_ALLOCATION = "IpAddressAllocation"
SM_PARAMETER_CONFIGURATION = "SmParameterConfiguration"
SM_PARAMETER_CONFIGURATION_ACK = "SmParameterConfigurationAck"
IPV6_ADDRESS_CONFIGURATION = "Ipv6AddressConfiguration"
ROUTER_ADVERTISEMENT = "RouterAdvertisement"

# Plumbing / data services
PROCEDURE_FAILURE = "ProcedureFailure"
NO_CANDIDATE_SLICE = "NoCandidateSlice"
DATA_STORAGE_REQUEST = "DataStorageRequest"
DATA_STORAGE_RESPONSE = "DataStorageResponse"
ANALYTICS_REQUEST = "AnalyticsRequest"
ANALYTICS_RESPONSE = "AnalyticsResponse"


@dataclass
class SignalingMessage:
    """One NF-to-NF message; its delivery is one event in the trace."""

    msg_id: int
    name: str
    src: str
    dst: str
    sent_at: int
    delivered_at: int
    correlates: Optional[str] = None  # ProcedureRun id
    ue_id: Optional[str] = None
    case_label: Optional[str] = None
    proc_name: Optional[str] = None
    payload: dict[str, Any] = field(default_factory=dict)
