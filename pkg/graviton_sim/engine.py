# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Deterministic tick engine.

``Engine`` builds the protocol state of a scenario (genesis), then advances
it one tick at a time in a fixed phase order:

1. gateway transfers that have matured, gateways in id order
2. agents, in ascending agent id
3. reward accrual for the tick
4. governance: finalize and apply due proposals in proposal-id order
5. scheduled scenario actions, in file order
6. one metrics row

Runs are a pure function of (scenario, seed): all randomness comes from
per-consumer streams derived from the seed.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

from graviton_sim.agents import Agent, Arbitrageur, BridgePolicy, Bridger, LiquidityProvider, RandomTrader
from graviton_sim.amm import AmmExchange
from graviton_sim.domain import AccountId, ChainId, GatewayId, PoolId, ProposalId, Tick, TokenId, TokenKind
from graviton_sim.errors import AgentError, GravitonError, NonMonotonicTick, UnknownEntity, ValidationError
from graviton_sim.feeds import ConstantFeed, GeometricWalkFeed, PiecewiseFeed, PriceFeed
from graviton_sim.gateway import GatewayRegistry
from graviton_sim.governance import (
    PARAM_SPECS,
    AddChain,
    AddGateway,
    AddPool,
    AddToken,
    Governance,
    ParamChange,
    ParameterRegistry,
    ParamKey,
    Payload,
    Proposal,
    ProposalStatus,
    Text,
)
from graviton_sim.invariants import enforce
from graviton_sim.ledger import Ledger
from graviton_sim.metrics import MetricsRecorder, MetricsRow
from graviton_sim.rewards import RewardEngine
from graviton_sim.rng import stream_rng
from graviton_sim.scenario import ActionSpec, AgentSpec, FeedSpec, Scenario

logger = logging.getLogger(__name__)

Sweep = Callable[["Engine", Optional[int]], None]

_ENTITY_KINDS = ("chain", "token", "gateway", "pool", "proposal")


class LabelBook:
    """Two-way map between scenario labels and protocol ids, per entity kind."""

    def __init__(self) -> None:
        self._ids: Dict[str, Dict[str, int]] = {kind: {} for kind in _ENTITY_KINDS}
        self._labels: Dict[str, Dict[int, str]] = {kind: {} for kind in _ENTITY_KINDS}

    def add(self, kind: str, label: Optional[str], entity_id: int) -> None:
        if label is None:
            return
        self._ids[kind][label] = entity_id
        self._labels[kind][entity_id] = label

    def resolve(self, kind: str, label: str) -> int:
        try:
            return self._ids[kind][label]
        except KeyError:
            raise UnknownEntity(f"no {kind} labelled '{label}' exists yet") from None

    def label(self, kind: str, entity_id: int) -> str:
        return self._labels[kind].get(entity_id, f"{kind}{entity_id}")

    def pool(self, pool_id: int) -> str:
        return self.label("pool", pool_id)

    def gateway(self, gateway_id: int) -> str:
        return self.label("gateway", gateway_id)


@dataclass
class RunSummary:
    """End-of-run totals printed by the CLI."""

    scenario: str
    seed: int
    ticks: int
    supplies: List[Tuple[str, str, int]] = field(default_factory=list)
    initial_rgu_supply: int = 0
    rgu_supply: int = 0
    emitted: int = 0
    claimed: int = 0
    pending: int = 0
    residual: int = 0
    fee_burns: int = 0
    deposit_burns: int = 0
    proposals: Dict[str, int] = field(default_factory=dict)
    action_failures: int = 0
    sweeps: int = 0

    def lines(self) -> List[str]:
        lines = [
            f"scenario: {self.scenario}",
            f"seed: {self.seed}",
            f"ticks: {self.ticks}",
            f"invariant sweeps: {self.sweeps} passed",
            f"RGU supply: {self.rgu_supply} (initial {self.initial_rgu_supply})",
            f"RGU emitted: {self.emitted} claimed: {self.claimed} pending: {self.pending} residual: {self.residual}",
            f"RGU burned: fees {self.fee_burns} deposits {self.deposit_burns}",
        ]
        if self.proposals:
            lines.append("proposals: " + " ".join(f"{status}={count}" for status, count in sorted(self.proposals.items())))
        lines.append(f"failed scheduled actions: {self.action_failures}")
        lines.extend(f"supply {chain}/{symbol}: {supply}" for chain, symbol, supply in self.supplies)
        return lines


class Engine:
    """Protocol state plus agents, feeds and the scheduled actions of one run."""

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.seed = scenario.run.seed
        self.names = LabelBook()
        self.ledger = Ledger()
        self._authority = self.ledger.grant("protocol")
        self.gateways = GatewayRegistry(self.ledger, self._authority, multi_gateway=scenario.run.multi_gateway)
        self.amm = AmmExchange(self.ledger, share_listener=self._on_shares_changed)
        self.rewards = RewardEngine(
            self.ledger,
            self.amm,
            self.gateways,
            self._authority,
            replace(scenario.emission),
            scenario.lp_fraction_bps,
        )
        params = replace(scenario.governance)
        registry = ParameterRegistry(self.amm, self.gateways, self.rewards, params)
        self.governance = Governance(self.ledger, self._authority, params, registry, on_applied=self._on_applied)
        self.feeds: Dict[str, PriceFeed] = {}
        self.marks: Dict[TokenId, str] = {}
        self.agents: List[Agent] = []
        self.next_tick: Tick = 0
        self.action_failures = 0
        self.sweeps = 0
        self._schedule: Dict[Tick, List[ActionSpec]] = {}
        for action in scenario.schedule:
            self._schedule.setdefault(action.tick, []).append(action)

        try:
            self._genesis()
        except (GravitonError, ValueError) as exc:
            raise ValidationError(f"scenario '{scenario.source}' cannot be set up: {exc}") from exc
        self.initial_rgu_supply = self.rgu_supply()
        self.metrics = MetricsRecorder(scenario.run.slippage_ref)
        self.metrics.observe(self)

    # Genesis

    def _genesis(self) -> None:
        scenario = self.scenario
        for chain in scenario.chains:
            self.names.add("chain", chain.label, self.ledger.register_chain(chain.name))
        for token in scenario.tokens:
            chain_id = ChainId(self.names.resolve("chain", token.chain))
            if token.kind == "rgu":
                kind = TokenKind.rgu()
            elif token.kind == "wrapped":
                underlying = TokenId(self.names.resolve("token", token.underlying or ""))
                kind = TokenKind.wrapped(underlying, self.ledger.token(underlying).home_chain)
            else:
                kind = TokenKind.origin()
            self.names.add("token", token.label, self.ledger.register_token(chain_id, token.symbol, kind))
        for gw in scenario.gateways:
            t = self.ledger.token(self._token(gw.token))
            wt = self.ledger.token(self._token(gw.wrapped))
            gateway_id = self.gateways.register_gateway(
                t.home_chain, wt.home_chain, t.token_id, wt.token_id, gw.provider, gw.latency, gw.unwrap_fee
            )
            self.names.add("gateway", gw.label, gateway_id)
        for pool in scenario.pools:
            token_w = self.ledger.token(self._token(pool.token_w))
            pool_id = self.amm.create_pool(token_w.home_chain, token_w.token_id, self._token(pool.token_o), pool.fee_bps, pool.weight)
            self.names.add("pool", pool.label, pool_id)
        for holding in scenario.balances:
            token = self.ledger.token(self._token(holding.token))
            if holding.gateway is not None:
                self.gateways.bootstrap(self._gateway(holding.gateway), holding.account, holding.amount)
            else:
                self.ledger.mint(token.home_chain, token.token_id, holding.account, holding.amount, authority=self._authority)
        for pool in scenario.pools:
            if pool.seed_account is not None:
                self.amm.add_liquidity(self._pool(pool.label), pool.seed_account, pool.seed_w, pool.seed_o)
        for feed in scenario.feeds:
            self.feeds[feed.label] = self._build_feed(feed)
        for feed in scenario.feeds:
            if feed.token is not None:
                self.marks[self._token(feed.token)] = feed.label
        for feed in scenario.feeds:
            if feed.token is not None:
                token = self.ledger.token(self._token(feed.token))
                if token.kind.is_wrapped and token.kind.underlying is not None:
                    self.marks.setdefault(token.kind.underlying, feed.label)
        for agent_id, spec in enumerate(scenario.agents):
            self.agents.append(self._build_agent(agent_id, spec))
        logger.debug(
            "Genesis: %d chain(s), %d token(s), %d gateway(s), %d pool(s), %d agent(s).",
            len(self.ledger.chains),
            len(self.ledger.tokens),
            len(self.gateways.gateways),
            len(self.amm.pools),
            len(self.agents),
        )

    def _build_feed(self, spec: FeedSpec) -> PriceFeed:
        if spec.kind == "constant":
            return ConstantFeed(spec.price)  # type: ignore[arg-type]
        if spec.kind == "piecewise":
            return PiecewiseFeed(spec.points)
        return GeometricWalkFeed(spec.price, spec.step_bps, stream_rng(self.seed, f"feed:{spec.label}"))  # type: ignore[arg-type]

    def _build_agent(self, agent_id: int, spec: AgentSpec) -> Agent:
        rng = stream_rng(self.seed, f"agent:{agent_id}")
        p = spec.params
        if spec.kind == "arbitrageur":
            return Arbitrageur(agent_id, spec.label, spec.account, rng, self._pool(p["pool"]), p["feed"], p["min_profit"])
        if spec.kind == "random_trader":
            return RandomTrader(agent_id, spec.label, spec.account, rng, self._pool(p["pool"]), p["intensity"], p["max_size"])
        if spec.kind == "liquidity_provider":
            return LiquidityProvider(
                agent_id,
                spec.label,
                spec.account,
                rng,
                self._pool(p["pool"]),
                p["enter_tick"],
                p["amount_w"],
                exit_tick=p["exit_tick"],
                amount_o=p["amount_o"],
                claim_every=p["claim_every"],
            )
        return Bridger(
            agent_id,
            spec.label,
            spec.account,
            rng,
            self._gateway(p["gateway"]),
            p["amount"],
            BridgePolicy(p["policy"]),
            claim_every=p["claim_every"],
        )

    # Lookups

    def _token(self, label: str) -> TokenId:
        return TokenId(self.names.resolve("token", label))

    def _pool(self, label: str) -> PoolId:
        return PoolId(self.names.resolve("pool", label))

    def _gateway(self, label: str) -> GatewayId:
        return GatewayId(self.names.resolve("gateway", label))

    def feed(self, label: str) -> PriceFeed:
        try:
            return self.feeds[label]
        except KeyError:
            raise UnknownEntity(f"unknown feed '{label}'") from None

    def rgu_supply(self) -> int:
        if self.ledger.rgu_token is None:
            return 0
        rgu = self.ledger.rgu()
        return self.ledger.total_supply(rgu.home_chain, rgu.token_id)

    def rgu_burned(self) -> int:
        return self.gateways.total_fee_burned + self.governance.deposits_burned

    # Hooks

    def _on_shares_changed(self, pool_id: PoolId, account: AccountId, old_shares: int, new_shares: int) -> None:
        self.rewards.on_shares_changed(pool_id, account, old_shares, new_shares)

    def _on_applied(self, proposal: Proposal, new_id: Optional[int]) -> None:
        payload = proposal.payload
        if new_id is None:
            return
        kinds = {AddChain: "chain", AddToken: "token", AddPool: "pool", AddGateway: "gateway"}
        kind = kinds.get(type(payload))
        if kind is not None:
            self.names.add(kind, getattr(payload, "label", None), new_id)

    # Ticks

    def step(self, tick: Tick) -> MetricsRow:
        if tick != self.next_tick:
            raise NonMonotonicTick(f"expected tick {self.next_tick}, got {tick}")
        self.gateways.process_all(tick)
        for agent in self.agents:
            try:
                agent.act(self, tick)
            except (GravitonError, ValueError, ArithmeticError) as exc:
                logger.error("Agent %d (%s) failed at tick %d: %s", agent.agent_id, agent.label, tick, exc)
                raise AgentError(agent.agent_id, tick, exc) from exc
        self.rewards.accrue(tick)
        self.governance.process(tick)
        for action in self._schedule.get(tick, []):
            self._run_action(action, tick)
        self.next_tick = tick + 1
        return self.metrics.record(self, tick)

    def run(self, sweep: Optional[Sweep] = None) -> RunSummary:
        """
        Execute ticks ``0..ticks-1`` and return the summary.

        The invariant sweep runs every ``audit_every`` ticks and after the
        last tick if that one was not already swept; by default a violation
        aborts the run.
        """
        check = sweep or enforce
        ticks = self.scenario.run.ticks
        audit_every = self.scenario.run.audit_every
        logger.info("Running '%s' for %d tick(s) with seed %d.", self.scenario.source, ticks, self.seed)
        for tick in range(ticks):
            self.step(tick)
            if (tick + 1) % audit_every == 0:
                check(self, tick)
                self.sweeps += 1
        if ticks == 0 or ticks % audit_every:
            check(self, ticks - 1 if ticks else None)
            self.sweeps += 1
        summary = self.summary()
        logger.info("Finished '%s': %d tick(s), %d failed action(s).", self.scenario.source, ticks, self.action_failures)
        return summary

    def summary(self) -> RunSummary:
        proposals: Dict[str, int] = {}
        for proposal in self.governance.proposals:
            proposals[proposal.status.value] = proposals.get(proposal.status.value, 0) + 1
        supplies = []
        for token in self.ledger.tokens:
            chain = self.ledger.chain(token.home_chain)
            supplies.append((chain.name, token.symbol, self.ledger.total_supply(token.home_chain, token.token_id)))
        return RunSummary(
            scenario=self.scenario.source,
            seed=self.seed,
            ticks=self.next_tick,
            supplies=supplies,
            initial_rgu_supply=self.initial_rgu_supply,
            rgu_supply=self.rgu_supply(),
            emitted=self.rewards.emitted,
            claimed=self.rewards.claimed,
            pending=self.rewards.pending_total(),
            residual=self.rewards.residual(),
            fee_burns=self.gateways.total_fee_burned,
            deposit_burns=self.governance.deposits_burned,
            proposals=proposals,
            action_failures=self.action_failures,
            sweeps=self.sweeps,
        )

    # Scheduled actions

    def _run_action(self, action: ActionSpec, tick: Tick) -> None:
        try:
            self._execute(action, tick)
        except (GravitonError, ValueError) as exc:
            self.action_failures += 1
            logger.warning("Tick %d: scheduled action '%s' (%s) failed: %s", tick, action.label, action.action, exc)

    def _payload(self, p: Dict[str, Any]) -> Payload:
        kind = p["payload"]
        new = p.get("new")
        if kind == "param":
            spec = PARAM_SPECS[p["param"]]
            target = None if spec.target is None else self.names.resolve(spec.target, p["target"])
            return ParamChange(ParamKey(p["param"], target), p["value"])
        if kind == "add_chain":
            return AddChain(p["name"], label=new)
        if kind == "add_token":
            chain = ChainId(self.names.resolve("chain", p["chain"]))
            if p["token_kind"] == "wrapped":
                underlying = self.ledger.token(self._token(p["underlying"]))
                token_kind = TokenKind.wrapped(underlying.token_id, underlying.home_chain)
            else:
                token_kind = TokenKind.origin()
            return AddToken(chain, p["symbol"], token_kind, label=new)
        if kind == "add_pool":
            token_w = self.ledger.token(self._token(p["token_w"]))
            return AddPool(token_w.home_chain, token_w.token_id, self._token(p["token_o"]), p["fee_bps"], p["weight"], label=new)
        if kind == "add_gateway":
            return AddGateway(
                self._token(p["token"]), self._token(p["wrapped"]), p["provider"], p["latency"], p["unwrap_fee"], label=new
            )
        return Text(p["digest"])

    def _execute(self, action: ActionSpec, tick: Tick) -> None:
        p = action.params
        kind = action.action
        if kind == "submit":
            proposal_id = self.governance.submit(p["account"], self._payload(p), p["deposit"], tick)
            self.names.add("proposal", action.label, proposal_id)
        elif kind == "vote":
            proposal_id = ProposalId(self.names.resolve("proposal", p["proposal"]))
            self.governance.vote(proposal_id, p["account"], p["support"], tick)
        elif kind == "lock":
            self.gateways.lock(self._gateway(p["gateway"]), p["account"], p["amount"], tick)
        elif kind == "unwrap":
            self.gateways.unwrap(self._gateway(p["gateway"]), p["account"], p["amount"], tick)
        elif kind == "swap":
            self.amm.swap_exact_in(self._pool(p["pool"]), p["account"], self._token(p["token_in"]), p["amount"], p["min_out"])
        elif kind == "add_liquidity":
            self.amm.add_liquidity(self._pool(p["pool"]), p["account"], p["amount_w"], p["amount_o"])
        elif kind == "remove_liquidity":
            pool_id = self._pool(p["pool"])
            shares = p["shares"]
            if shares is None:
                shares = self.amm.pool(pool_id).shares.get(p["account"], 0)
            self.amm.remove_liquidity(pool_id, p["account"], shares)
        elif kind == "claim_lp":
            self.rewards.claim_lp(self._pool(p["pool"]), p["account"])
        elif kind == "claim_gateway":
            self.rewards.claim_gateway(self._gateway(p["gateway"]))
        elif kind == "transfer":
            token = self.ledger.token(self._token(p["token"]))
            self.ledger.transfer(token.home_chain, token.token_id, p["sender"], p["recipient"], p["amount"])
        logger.debug("Tick %d: scheduled action '%s' (%s) done.", tick, action.label, kind)

    def proposal_status(self, label: str) -> ProposalStatus:
        return self.governance.proposal(ProposalId(self.names.resolve("proposal", label))).status


def run_scenario(scenario: Scenario, sweep: Optional[Sweep] = None) -> Tuple[Engine, RunSummary]:
    """Build an engine for ``scenario`` and run it to completion."""
    engine = Engine(scenario)
    summary = engine.run(sweep)
    return engine, summary
