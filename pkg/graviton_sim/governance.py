# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
GIP lifecycle: RGU-paid submission, balance-weighted voting, finalization
against quorum and threshold, and application of passed proposals.

Status moves only along ``Active -> Passed -> Applied`` or
``Active -> Failed``. Failed proposals burn their deposit; passed ones get it
back and are applied in the governance phase of the following tick, after
that tick's reward accrual, so a parameter change is never retroactive.

Voting weight is the voter's spot RGU balance when the vote is cast. Moving
RGU to a fresh account lets the same tokens vote twice; the simulator is a
closed agent system and does not defend against it.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Set, Tuple, Union

from graviton_sim.amm import AmmExchange
from graviton_sim.constants import BPS_DENOMINATOR, GOVERNANCE_ESCROW_ACCOUNT, MAX_AMOUNT, MAX_POOL_FEE_BPS, MAX_TICKS
from graviton_sim.domain import AccountId, ChainId, ProposalId, Tick, TokenId, TokenKind
from graviton_sim.errors import (
    AlreadyFinalized,
    AlreadyVoted,
    ApplicationFailed,
    DepositTooSmall,
    GravitonError,
    InsufficientBalance,
    InvalidPayload,
    NotActive,
    TooEarly,
    UnknownEntity,
    ZeroWeight,
)
from graviton_sim.gateway import GatewayRegistry
from graviton_sim.ledger import Capability, Ledger, check_amount
from graviton_sim.rewards import EmissionSchedule, RewardEngine

logger = logging.getLogger(__name__)

MAX_POOL_WEIGHT = 10**9


class ProposalStatus(Enum):
    ACTIVE = "active"
    PASSED = "passed"
    FAILED = "failed"
    APPLIED = "applied"


@dataclass(frozen=True)
class ParamKey:
    """Whitelisted parameter name, with the pool or gateway id for per-entity keys."""

    name: str
    target: Optional[int] = None


@dataclass(frozen=True)
class ParamSpec:
    name: str
    minimum: int
    maximum: int
    target: Optional[str] = None  # "pool" or "gateway"


PARAM_SPECS: Dict[str, ParamSpec] = {
    spec.name: spec
    for spec in (
        ParamSpec("e0", 0, MAX_AMOUNT),
        ParamSpec("decay_num", 0, MAX_AMOUNT),
        ParamSpec("decay_den", 1, MAX_AMOUNT),
        ParamSpec("period_ticks", 1, MAX_TICKS),
        ParamSpec("lp_fraction_bps", 0, BPS_DENOMINATOR),
        ParamSpec("pool_weight", 0, MAX_POOL_WEIGHT, target="pool"),
        ParamSpec("pool_fee_bps", 0, MAX_POOL_FEE_BPS, target="pool"),
        ParamSpec("unwrap_fee_flat_rgu", 0, MAX_AMOUNT, target="gateway"),
        ParamSpec("deposit_min", 0, MAX_AMOUNT),
        ParamSpec("voting_period", 1, MAX_TICKS),
        ParamSpec("quorum_bps", 0, BPS_DENOMINATOR),
        ParamSpec("threshold_bps", 0, BPS_DENOMINATOR),
    )
}


@dataclass(frozen=True)
class ParamChange:
    key: ParamKey
    value: int


@dataclass(frozen=True)
class AddChain:
    name: str
    label: Optional[str] = None


@dataclass(frozen=True)
class AddToken:
    chain: ChainId
    symbol: str
    kind: TokenKind
    label: Optional[str] = None


@dataclass(frozen=True)
class AddPool:
    chain: ChainId
    token_w: TokenId
    token_o: TokenId
    fee_bps: int
    weight: int
    label: Optional[str] = None


@dataclass(frozen=True)
class AddGateway:
    token_t: TokenId
    token_wt: TokenId
    provider: AccountId
    latency: int = 0
    fee_flat_rgu: int = 0
    label: Optional[str] = None


@dataclass(frozen=True)
class Text:
    digest: str


Payload = Union[ParamChange, AddChain, AddToken, AddPool, AddGateway, Text]


@dataclass
class GovParams:
    deposit_min: int
    voting_period: int
    quorum_bps: int
    threshold_bps: int

    def validate(self) -> None:
        check_amount(self.deposit_min)
        if self.voting_period < 1:
            raise ValueError("voting_period must be at least 1 tick")
        for name in ("quorum_bps", "threshold_bps"):
            if not 0 <= getattr(self, name) <= BPS_DENOMINATOR:
                raise ValueError(f"{name} must be within 0..{BPS_DENOMINATOR}")


@dataclass
class Proposal:
    proposal_id: ProposalId
    payload: Payload
    proposer: AccountId
    deposit: int
    start_tick: Tick
    end_tick: Tick
    yes: int = 0
    no: int = 0
    voters: Set[AccountId] = field(default_factory=set)
    status: ProposalStatus = ProposalStatus.ACTIVE
    apply_at: Optional[Tick] = None
    applied_id: Optional[int] = None
    error: Optional[str] = None


# Hook invoked after an Add* payload registers something: (proposal, new entity id).
AppliedHook = Callable[[Proposal, Optional[int]], None]


class ParameterRegistry:
    """Maps every whitelisted ``ParamKey`` onto the live engine parameter it controls."""

    def __init__(self, amm: AmmExchange, gateways: GatewayRegistry, rewards: RewardEngine, gov_params: GovParams) -> None:
        self.amm = amm
        self.gateways = gateways
        self.rewards = rewards
        self.gov_params = gov_params

    def validate(self, key: ParamKey, value: int) -> None:
        spec = PARAM_SPECS.get(key.name)
        if spec is None:
            raise InvalidPayload(f"unknown parameter '{key.name}'")
        if isinstance(value, bool) or not isinstance(value, int) or not spec.minimum <= value <= spec.maximum:
            raise InvalidPayload(f"{key.name}={value!r} is outside {spec.minimum}..{spec.maximum}")
        if spec.target is None and key.target is not None:
            raise InvalidPayload(f"{key.name} does not take a target")
        try:
            if spec.target == "pool":
                self.amm.pool(key.target)  # type: ignore[arg-type]
            elif spec.target == "gateway":
                self.gateways.gateway(key.target)  # type: ignore[arg-type]
        except UnknownEntity as exc:
            raise InvalidPayload(f"{key.name}: {exc}") from exc
        if key.name in ("e0", "decay_num", "decay_den", "period_ticks"):
            current = self.rewards.schedule
            candidate = EmissionSchedule(current.e0, current.decay_num, current.decay_den, current.period_ticks)
            setattr(candidate, key.name, value)
            try:
                candidate.validate()
            except ValueError as exc:
                raise InvalidPayload(str(exc)) from exc

    def get(self, key: ParamKey) -> int:
        if key.name in ("e0", "decay_num", "decay_den", "period_ticks"):
            return int(getattr(self.rewards.schedule, key.name))
        if key.name == "lp_fraction_bps":
            return self.rewards.lp_fraction_bps
        if key.name == "pool_weight":
            return self.amm.pool(key.target).weight  # type: ignore[arg-type]
        if key.name == "pool_fee_bps":
            return self.amm.pool(key.target).fee_bps  # type: ignore[arg-type]
        if key.name == "unwrap_fee_flat_rgu":
            return self.gateways.gateway(key.target).unwrap_fee_flat_rgu  # type: ignore[arg-type]
        if key.name in PARAM_SPECS:
            return int(getattr(self.gov_params, key.name))
        raise InvalidPayload(f"unknown parameter '{key.name}'")

    def set(self, key: ParamKey, value: int) -> None:
        self.validate(key, value)
        if key.name in ("e0", "decay_num", "decay_den", "period_ticks"):
            self.rewards.update_schedule(**{key.name: value})
        elif key.name == "lp_fraction_bps":
            self.rewards.set_lp_fraction(value)
        elif key.name == "pool_weight":
            self.amm.set_weight(key.target, value)  # type: ignore[arg-type]
        elif key.name == "pool_fee_bps":
            self.amm.set_fee(key.target, value)  # type: ignore[arg-type]
        elif key.name == "unwrap_fee_flat_rgu":
            self.gateways.set_unwrap_fee(key.target, value)  # type: ignore[arg-type]
        else:
            setattr(self.gov_params, key.name, value)
        logger.info("Parameter %s%s set to %d.", key.name, "" if key.target is None else f"[{key.target}]", value)


class Governance:
    """Proposal registry plus the escrow of deposits on the RGU home chain."""

    def __init__(
        self,
        ledger: Ledger,
        authority: Capability,
        params: GovParams,
        registry: ParameterRegistry,
        on_applied: Optional[AppliedHook] = None,
    ) -> None:
        params.validate()
        self.ledger = ledger
        self._authority = authority
        self.params = params
        self.registry = registry
        self.on_applied = on_applied
        self._proposals: List[Proposal] = []
        self.deposits_burned = 0

    @property
    def proposals(self) -> List[Proposal]:
        return list(self._proposals)

    def proposal(self, proposal_id: ProposalId) -> Proposal:
        if not isinstance(proposal_id, int) or not 0 <= proposal_id < len(self._proposals):
            raise UnknownEntity(f"unknown proposal id {proposal_id!r}")
        return self._proposals[proposal_id]

    def _rgu_balance(self, account: AccountId) -> int:
        rgu = self.ledger.rgu()
        return self.ledger.balance_of(rgu.home_chain, rgu.token_id, account)

    def escrowed(self) -> int:
        rgu = self.ledger.rgu()
        return self.ledger.balance_of(rgu.home_chain, rgu.token_id, GOVERNANCE_ESCROW_ACCOUNT)

    def active_deposits(self) -> int:
        return sum(p.deposit for p in self._proposals if p.status is ProposalStatus.ACTIVE)

    # Payload validation

    def validate_payload(self, payload: Payload) -> None:
        try:
            self._validate_payload(payload)
        except InvalidPayload:
            raise
        except (GravitonError, ValueError, TypeError) as exc:
            raise InvalidPayload(str(exc)) from exc

    def _validate_payload(self, payload: Payload) -> None:
        ledger = self.ledger
        if isinstance(payload, ParamChange):
            self.registry.validate(payload.key, payload.value)
        elif isinstance(payload, AddChain):
            if not payload.name.strip():
                raise InvalidPayload("chain name must be non-empty")
        elif isinstance(payload, AddToken):
            ledger.chain(payload.chain)
            if not payload.symbol.strip():
                raise InvalidPayload("token symbol must be non-empty")
            if payload.kind.is_wrapped:
                if payload.kind.underlying is None:
                    raise InvalidPayload("wrapped token needs an underlying token")
                ledger.token(payload.kind.underlying)
        elif isinstance(payload, AddPool):
            ledger.chain(payload.chain)
            for token in (payload.token_w, payload.token_o):
                if ledger.token(token).home_chain != payload.chain:
                    raise InvalidPayload(f"token {token} is not on chain {payload.chain}")
            if not 0 <= payload.fee_bps <= MAX_POOL_FEE_BPS or not 0 <= payload.weight <= MAX_POOL_WEIGHT:
                raise InvalidPayload("pool fee or weight out of range")
        elif isinstance(payload, AddGateway):
            t = ledger.token(payload.token_t)
            wt = ledger.token(payload.token_wt)
            if wt.kind.underlying != t.token_id:
                raise InvalidPayload(f"{wt.symbol} does not wrap {t.symbol}")
            if not payload.provider or payload.latency < 0:
                raise InvalidPayload("gateway needs a provider and a non-negative latency")
            check_amount(payload.fee_flat_rgu)
        elif isinstance(payload, Text):
            if not payload.digest:
                raise InvalidPayload("text proposal needs a digest")
        else:
            raise InvalidPayload(f"unsupported proposal payload {type(payload).__name__}")

    # Lifecycle

    def submit(self, proposer: AccountId, payload: Payload, deposit: int, now: Tick) -> ProposalId:
        check_amount(deposit)
        if deposit < self.params.deposit_min:
            raise DepositTooSmall(f"deposit {deposit} is below the minimum {self.params.deposit_min}")
        self.validate_payload(payload)
        held = self._rgu_balance(proposer)
        if held < deposit:
            raise InsufficientBalance(f"{proposer} holds {held} RGU, cannot deposit {deposit}")

        rgu = self.ledger.rgu()
        self.ledger.transfer(rgu.home_chain, rgu.token_id, proposer, GOVERNANCE_ESCROW_ACCOUNT, deposit)
        proposal_id = ProposalId(len(self._proposals))
        self._proposals.append(
            Proposal(
                proposal_id=proposal_id,
                payload=payload,
                proposer=proposer,
                deposit=deposit,
                start_tick=now,
                end_tick=now + self.params.voting_period,
            )
        )
        logger.info("Proposal %d submitted by %s at tick %d (%s).", proposal_id, proposer, now, type(payload).__name__)
        return proposal_id

    def vote(self, proposal_id: ProposalId, account: AccountId, support: bool, now: Tick) -> int:
        """Cast a vote weighted by the account's current RGU balance; returns the weight."""
        proposal = self.proposal(proposal_id)
        if proposal.status is not ProposalStatus.ACTIVE or not proposal.start_tick <= now < proposal.end_tick:
            raise NotActive(f"proposal {proposal_id} is not open for voting at tick {now}")
        if account in proposal.voters:
            raise AlreadyVoted(f"{account} already voted on proposal {proposal_id}")
        weight = self._rgu_balance(account)
        if weight == 0:
            raise ZeroWeight(f"{account} holds no RGU")
        if support:
            proposal.yes += weight
        else:
            proposal.no += weight
        proposal.voters.add(account)
        return weight

    def tally(self, proposal: Proposal) -> Tuple[bool, bool]:
        """Return ``(quorum_met, threshold_met)`` with exact integer comparisons."""
        rgu = self.ledger.rgu()
        supply = self.ledger.total_supply(rgu.home_chain, rgu.token_id)
        cast = proposal.yes + proposal.no
        if cast == 0:
            return False, False
        quorum = cast * BPS_DENOMINATOR >= self.params.quorum_bps * supply
        threshold = proposal.yes * BPS_DENOMINATOR >= self.params.threshold_bps * cast
        return quorum, threshold

    def finalize(self, proposal_id: ProposalId, now: Tick) -> ProposalStatus:
        proposal = self.proposal(proposal_id)
        if proposal.status is not ProposalStatus.ACTIVE:
            raise AlreadyFinalized(f"proposal {proposal_id} is already {proposal.status.value}")
        if now < proposal.end_tick:
            raise TooEarly(f"proposal {proposal_id} voting ends at tick {proposal.end_tick}")

        quorum, threshold = self.tally(proposal)
        rgu = self.ledger.rgu()
        if quorum and threshold:
            self.ledger.transfer(rgu.home_chain, rgu.token_id, GOVERNANCE_ESCROW_ACCOUNT, proposal.proposer, proposal.deposit)
            proposal.status = ProposalStatus.PASSED
            proposal.apply_at = now + 1
        else:
            self.ledger.burn(rgu.home_chain, rgu.token_id, GOVERNANCE_ESCROW_ACCOUNT, proposal.deposit, authority=self._authority)
            self.deposits_burned += proposal.deposit
            proposal.status = ProposalStatus.FAILED
        logger.info(
            "Proposal %d %s at tick %d (yes=%d no=%d).", proposal_id, proposal.status.value, now, proposal.yes, proposal.no
        )
        return proposal.status

    def apply(self, proposal_id: ProposalId, now: Tick) -> Optional[int]:
        """Apply a passed proposal; returns the id of any entity it registered."""
        proposal = self.proposal(proposal_id)
        if proposal.status is not ProposalStatus.PASSED:
            raise NotActive(f"proposal {proposal_id} is {proposal.status.value}, not passed")
        if proposal.apply_at is None or now < proposal.apply_at:
            raise TooEarly(f"proposal {proposal_id} applies at tick {proposal.apply_at}")
        try:
            new_id = self._execute(proposal.payload)
        except (GravitonError, ValueError) as exc:
            proposal.error = str(exc)
            logger.warning("Proposal %d could not be applied: %s", proposal_id, exc)
            raise ApplicationFailed(f"proposal {proposal_id}: {exc}") from exc
        proposal.status = ProposalStatus.APPLIED
        proposal.applied_id = new_id
        if self.on_applied is not None:
            self.on_applied(proposal, new_id)
        logger.info("Proposal %d applied at tick %d.", proposal_id, now)
        return new_id

    def _execute(self, payload: Payload) -> Optional[int]:
        registry = self.registry
        if isinstance(payload, ParamChange):
            registry.set(payload.key, payload.value)
            return None
        if isinstance(payload, AddChain):
            return int(self.ledger.register_chain(payload.name))
        if isinstance(payload, AddToken):
            return int(self.ledger.register_token(payload.chain, payload.symbol, payload.kind))
        if isinstance(payload, AddPool):
            return int(registry.amm.create_pool(payload.chain, payload.token_w, payload.token_o, payload.fee_bps, payload.weight))
        if isinstance(payload, AddGateway):
            t = self.ledger.token(payload.token_t)
            wt = self.ledger.token(payload.token_wt)
            return int(
                registry.gateways.register_gateway(
                    t.home_chain,
                    wt.home_chain,
                    payload.token_t,
                    payload.token_wt,
                    payload.provider,
                    payload.latency,
                    payload.fee_flat_rgu,
                )
            )
        return None

    def process(self, now: Tick) -> List[Proposal]:
        """Governance phase: finalize and apply every due proposal in id order."""
        touched = []
        for proposal in self._proposals:
            if proposal.status is ProposalStatus.ACTIVE and now >= proposal.end_tick:
                self.finalize(proposal.proposal_id, now)
                touched.append(proposal)
            elif (
                proposal.status is ProposalStatus.PASSED
                and proposal.error is None
                and proposal.apply_at is not None
                and now >= proposal.apply_at
            ):
                try:
                    self.apply(proposal.proposal_id, now)
                except ApplicationFailed:
                    pass
                touched.append(proposal)
        return touched
