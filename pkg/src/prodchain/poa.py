"""Proof-of-Accomplishment: service ratings that gate publishing, plus endorsement."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

MAX_RATING = 5


class ServiceType(str, enum.Enum):
    PRODUCTION = "production"
    WAREHOUSE = "warehouse"
    SHIPMENT = "shipment"
    TRANSPORT = "transport"
    DELIVERY = "delivery"


class Access(str, enum.Enum):
    ALLOW = "allow"
    SEVERITY_CONCERN = "severity-concern"


@dataclass(frozen=True)
class PoAConfig:
    upper_threshold: float = 0.0  # days of slack before a service counts as late
    delta_r: int = -1
    max_rating: int = MAX_RATING
    endorsement_quorum: float = 0.5
    clear_after: int = 1  # consecutive on-time services needed to lift a severity flag

    def __post_init__(self):
        if self.max_rating != MAX_RATING:
            raise ValueError("ratings use a 5-point scale")
        if self.delta_r >= 0:
            raise ValueError("delta_r must be negative")
        if not 0 < self.endorsement_quorum <= 1:
            raise ValueError("endorsement_quorum must be in (0, 1]")
        if self.upper_threshold < 0:
            raise ValueError("upper_threshold must be >= 0")
        if self.clear_after < 1:
            raise ValueError("clear_after must be >= 1")


DEFAULT_POA = PoAConfig()


@dataclass(frozen=True)
class ServiceRecord:
    service_type: ServiceType
    scheduled_time: float
    actual_time: float

    def __post_init__(self):
        object.__setattr__(self, "service_type", ServiceType(self.service_type))
        if self.scheduled_time < 0 or self.actual_time < 0:
            raise ValueError("service times must be >= 0")


def evaluate_service(record: ServiceRecord, cfg: PoAConfig = DEFAULT_POA) -> int:
    overrun = record.actual_time - record.scheduled_time - cfg.upper_threshold
    if overrun <= 0:
        return cfg.max_rating
    late_days = math.ceil(overrun)
    return max(0, cfg.max_rating + cfg.delta_r * late_days)


@dataclass(frozen=True)
class RatingState:
    rating: int = MAX_RATING
    history: tuple[tuple[ServiceRecord, int], ...] = ()
    flagged: bool = False
    on_time_streak: int = 0

    def __post_init__(self):
        if not 0 <= self.rating <= MAX_RATING:
            raise ValueError("rating must be in [0, 5]")


def update_rating(state: RatingState, record: ServiceRecord, cfg: PoAConfig = DEFAULT_POA) -> RatingState:
    rating = evaluate_service(record, cfg)
    on_time = rating == cfg.max_rating
    streak = state.on_time_streak + 1 if on_time else 0
    flagged = state.flagged
    if rating == 0:
        flagged = True
    elif flagged and streak >= cfg.clear_after:
        flagged = False
    if flagged:
        # publishing stays blocked until the flag clears
        rating = 0
    return replace(
        state,
        rating=rating,
        history=state.history + ((record, rating),),
        flagged=flagged,
        on_time_streak=streak,
    )


def access_decision(state: RatingState) -> Access:
    return Access.ALLOW if state.rating > 0 else Access.SEVERITY_CONCERN


@dataclass(frozen=True)
class EndorserView:
    signature_valid: bool
    access: Access

    @property
    def approves(self) -> bool:
        return self.signature_valid and self.access is Access.ALLOW


@dataclass(frozen=True)
class Endorsement:
    accepted: bool
    reason: str | None = None  # "signature" | "rating" | "quorum" when rejected
    approvals: int = 0
    views: int = 0


def endorse_proposal(proposal: object, endorser_views: Sequence[EndorserView], cfg: PoAConfig = DEFAULT_POA) -> Endorsement:
    """Fold endorser views into an accept/reject decision.

    ``proposal`` is the candidate block; the decision depends only on the views.
    """
    if not endorser_views:
        raise ValueError("at least one endorser view is required")
    total = len(endorser_views)
    approvals = sum(v.approves for v in endorser_views)
    if approvals / total >= cfg.endorsement_quorum:
        return Endorsement(True, None, approvals, total)
    if approvals:
        reason = "quorum"
    else:
        bad_sig = sum(not v.signature_valid for v in endorser_views)
        bad_rating = sum(v.signature_valid and v.access is not Access.ALLOW for v in endorser_views)
        reason = "signature" if bad_sig >= bad_rating else "rating"
    return Endorsement(False, reason, approvals, total)
