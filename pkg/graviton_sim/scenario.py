# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Scenario files: loading, strict validation and the resolved ``Scenario`` model.

A scenario is plain text, either INI or YAML (auto-detected like the user
config). Both flavors share one layout::

    [chains]      label = name=...
    [tokens]      label = chain=... kind=origin|wrapped|rgu symbol=... underlying=...
    [gateways]    label = token=... wrapped=... provider=... latency=... unwrap_fee=...
    [pools]       label = token_w=... token_o=... fee_bps=... weight=... seed_account=... seed_w=... seed_o=...
    [balances]    account = TOKEN:amount TOKEN@gateway:amount ...
    [emission]    e0, decay_num, decay_den, period_ticks
    [rewards]     lp_fraction_bps
    [governance]  deposit_min, voting_period, quorum_bps, threshold_bps
    [agents]      label = kind=... account=... (kind-specific fields)
    [feeds]       label = kind=constant|piecewise|geometric_walk ... token=...
    [schedule]    label = tick=... action=... (action-specific fields)
    [run]         ticks, seed, audit_every, multi_gateway, slippage_ref

Token amounts are decimal token units with at most ``DECIMALS`` places.
Unknown sections, keys and fields are errors. Every problem is collected
into a ``ScenarioReport`` so a single ``validate`` call lists them all.
"""

import configparser
import logging
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Set, Tuple

from graviton_sim.config import is_yaml_file
from graviton_sim.constants import (
    BPS_DENOMINATOR,
    DECIMALS,
    ESCROW_ACCOUNT_PREFIX,
    GOVERNANCE_ESCROW_ACCOUNT,
    MAX_AMOUNT,
    MAX_POOL_FEE_BPS,
    MAX_SEED,
    MAX_TICKS,
    POOL_ACCOUNT_PREFIX,
    UNIT,
)
from graviton_sim.errors import ValidationError
from graviton_sim.governance import MAX_POOL_WEIGHT, PARAM_SPECS, GovParams
from graviton_sim.rewards import EmissionSchedule

logger = logging.getLogger(__name__)

SECTIONS: Tuple[str, ...] = (
    "chains",
    "tokens",
    "gateways",
    "pools",
    "balances",
    "emission",
    "rewards",
    "governance",
    "agents",
    "feeds",
    "schedule",
    "run",
)

ENTITY_FIELDS: Dict[str, Set[str]] = {
    "chains": {"name"},
    "tokens": {"chain", "kind", "symbol", "underlying"},
    "gateways": {"token", "wrapped", "provider", "latency", "unwrap_fee"},
    "pools": {"token_w", "token_o", "fee_bps", "weight", "seed_account", "seed_w", "seed_o"},
    "feeds": {"kind", "price", "points", "p0", "step_bps", "token"},
}

FLAT_KEYS: Dict[str, Set[str]] = {
    "emission": {"e0", "decay_num", "decay_den", "period_ticks"},
    "rewards": {"lp_fraction_bps"},
    "governance": {"deposit_min", "voting_period", "quorum_bps", "threshold_bps"},
    "run": {"ticks", "seed", "audit_every", "multi_gateway", "slippage_ref"},
}

AGENT_FIELDS: Dict[str, Set[str]] = {
    "arbitrageur": {"pool", "feed", "min_profit"},
    "random_trader": {"pool", "intensity", "max_size"},
    "liquidity_provider": {"pool", "enter_tick", "exit_tick", "amount_w", "amount_o", "claim_every"},
    "bridger": {"gateway", "amount", "policy", "claim_every"},
}

BRIDGE_POLICIES = ("lock", "unwrap", "alternate", "round_trip", "random")
FEED_KINDS = ("constant", "piecewise", "geometric_walk")
TOKEN_KINDS = ("origin", "wrapped", "rgu")
PAYLOAD_KINDS = ("param", "add_chain", "add_token", "add_pool", "add_gateway", "text")

PAYLOAD_FIELDS: Dict[str, Set[str]] = {
    "param": {"param", "target", "value"},
    "add_chain": {"name", "new"},
    "add_token": {"chain", "symbol", "token_kind", "underlying", "new"},
    "add_pool": {"token_w", "token_o", "fee_bps", "weight", "new"},
    "add_gateway": {"token", "wrapped", "provider", "latency", "unwrap_fee", "new"},
    "text": {"digest"},
}

ACTION_FIELDS: Dict[str, Set[str]] = {
    "submit": {"account", "deposit", "payload"}.union(*PAYLOAD_FIELDS.values()),
    "vote": {"proposal", "account", "support"},
    "lock": {"gateway", "account", "amount"},
    "unwrap": {"gateway", "account", "amount"},
    "swap": {"pool", "account", "token_in", "amount", "min_out"},
    "add_liquidity": {"pool", "account", "amount_w", "amount_o"},
    "remove_liquidity": {"pool", "account", "shares"},
    "claim_lp": {"pool", "account"},
    "claim_gateway": {"gateway"},
    "transfer": {"token", "sender", "recipient", "amount"},
}

# Parameters whose values are written as token amounts rather than raw integers.
AMOUNT_PARAMS = frozenset(("e0", "deposit_min", "unwrap_fee_flat_rgu"))

_RESERVED_PREFIXES = (POOL_ACCOUNT_PREFIX, ESCROW_ACCOUNT_PREFIX, GOVERNANCE_ESCROW_ACCOUNT)
_BOOL_TRUE_VALUES = frozenset(("true", "yes", "1", "on"))
_BOOL_FALSE_VALUES = frozenset(("false", "no", "0", "off"))


# Report


@dataclass(frozen=True)
class ScenarioIssue:
    """One problem found in a scenario file, located by section and key path."""

    section: str
    key: str
    reason: str
    severity: str = "error"

    @property
    def path(self) -> str:
        return f"{self.section}.{self.key}" if self.key else self.section

    def __str__(self) -> str:
        return f"{self.severity}: [{self.path}] {self.reason}"


@dataclass(frozen=True)
class ScenarioReport:
    """Structured diagnostics for one scenario file."""

    issues: List[ScenarioIssue]

    @property
    def error_count(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == "error")

    @property
    def warning_count(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == "warning")

    @property
    def has_errors(self) -> bool:
        return self.error_count > 0


class ScenarioValidationError(ValidationError):
    """Raised by ``load_scenario``; carries the full report."""

    def __init__(self, source: str, report: ScenarioReport) -> None:
        self.source = source
        self.report = report
        lines = [str(issue) for issue in report.issues if issue.severity == "error"]
        super().__init__(f"scenario '{source}' is invalid ({report.error_count} error(s)):\n  " + "\n  ".join(lines))


# Resolved model


@dataclass(frozen=True)
class ChainSpec:
    label: str
    name: str


@dataclass(frozen=True)
class TokenSpec:
    label: str
    chain: str
    symbol: str
    kind: str
    underlying: Optional[str] = None


@dataclass(frozen=True)
class GatewaySpec:
    label: str
    token: str
    wrapped: str
    provider: str
    latency: int = 0
    unwrap_fee: int = 0


@dataclass(frozen=True)
class PoolSpec:
    label: str
    token_w: str
    token_o: str
    fee_bps: int = 30
    weight: int = 0
    seed_account: Optional[str] = None
    seed_w: int = 0
    seed_o: int = 0


@dataclass(frozen=True)
class HoldingSpec:
    account: str
    token: str
    amount: int
    gateway: Optional[str] = None


@dataclass(frozen=True)
class FeedSpec:
    label: str
    kind: str
    price: Optional[Fraction] = None
    points: Tuple[Tuple[int, Fraction], ...] = ()
    step_bps: int = 0
    token: Optional[str] = None


@dataclass(frozen=True)
class AgentSpec:
    label: str
    kind: str
    account: str
    params: Dict[str, Any] = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class ActionSpec:
    label: str
    tick: int
    action: str
    params: Dict[str, Any] = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class RunSpec:
    ticks: int
    seed: int = 0
    audit_every: int = 1
    multi_gateway: bool = False
    slippage_ref: int = UNIT


@dataclass(frozen=True)
class Scenario:
    """A fully parsed and cross-checked scenario; entities are referenced by label."""

    source: str
    chains: Tuple[ChainSpec, ...]
    tokens: Tuple[TokenSpec, ...]
    gateways: Tuple[GatewaySpec, ...]
    pools: Tuple[PoolSpec, ...]
    balances: Tuple[HoldingSpec, ...]
    emission: EmissionSchedule
    lp_fraction_bps: int
    governance: GovParams
    agents: Tuple[AgentSpec, ...]
    feeds: Tuple[FeedSpec, ...]
    schedule: Tuple[ActionSpec, ...]
    run: RunSpec

    def with_overrides(
        self, seed: Optional[int] = None, ticks: Optional[int] = None, audit_every: Optional[int] = None
    ) -> "Scenario":
        """Return a copy with run settings replaced; overrides are range-checked."""
        run = self.run
        if seed is not None:
            if not 0 <= seed <= MAX_SEED:
                raise ValidationError(f"seed must be within 0..{MAX_SEED}, got {seed}")
            run = replace(run, seed=seed)
        if ticks is not None:
            if not 0 <= ticks <= MAX_TICKS:
                raise ValidationError(f"ticks must be within 0..{MAX_TICKS}, got {ticks}")
            run = replace(run, ticks=ticks)
        if audit_every is not None:
            if audit_every < 1:
                raise ValidationError(f"audit_every must be at least 1, got {audit_every}")
            run = replace(run, audit_every=audit_every)
        return replace(self, run=run)


# Value parsers. Each raises ValueError with a message fit for a ScenarioIssue.


def parse_amount(text: str) -> int:
    """Convert a decimal token amount (``"12.5"``) to minimal units."""
    cleaned = str(text).strip().replace("_", "")
    try:
        value = Fraction(cleaned)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"'{text}' is not a decimal amount") from exc
    if value < 0:
        raise ValueError(f"amount '{text}' is negative")
    scaled = value * UNIT
    if scaled.denominator != 1:
        raise ValueError(f"amount '{text}' has more than {DECIMALS} decimal places")
    if scaled.numerator > MAX_AMOUNT:
        raise ValueError(f"amount '{text}' exceeds the maximum amount")
    return scaled.numerator


def parse_int(text: str, minimum: int = 0, maximum: Optional[int] = None) -> int:
    cleaned = str(text).strip().replace("_", "")
    try:
        value = int(cleaned)
    except ValueError as exc:
        raise ValueError(f"'{text}' is not an integer") from exc
    if value < minimum or (maximum is not None and value > maximum):
        bound = f"{minimum}..{maximum}" if maximum is not None else f">= {minimum}"
        raise ValueError(f"{value} is out of range ({bound})")
    return value


def parse_ratio(text: str, positive: bool = True) -> Fraction:
    """Parse ``"3/2"`` or ``"1.5"`` as an exact rational."""
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"'{text}' is not a rational number") from exc
    if positive and value <= 0:
        raise ValueError(f"'{text}' must be positive")
    if value < 0:
        raise ValueError(f"'{text}' must be non-negative")
    return value


def parse_bool(text: str) -> bool:
    lower = str(text).strip().lower()
    if lower in _BOOL_TRUE_VALUES:
        return True
    if lower in _BOOL_FALSE_VALUES:
        return False
    raise ValueError(f"cannot parse '{text}' as a boolean")


def parse_points(text: str) -> Tuple[Tuple[int, Fraction], ...]:
    """Parse ``"0:1,100:3/2"`` into ``((0, 1), (100, 3/2))``."""
    points = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        tick_text, sep, price_text = chunk.partition(":")
        if not sep:
            raise ValueError(f"point '{chunk}' must look like tick:price")
        points.append((parse_int(tick_text), parse_ratio(price_text)))
    if not points:
        raise ValueError("piecewise feed needs at least one point")
    ticks = [tick for tick, _ in points]
    if any(b <= a for a, b in zip(ticks, ticks[1:])):
        raise ValueError("point ticks must be strictly increasing")
    return tuple(points)


def parse_holdings(text: str) -> List[Tuple[str, str]]:
    """Split ``"USDT:100 wUSDT@gw:5"`` into ``[("USDT", "100"), ("wUSDT@gw", "5")]``."""
    holdings = []
    for chunk in str(text).split():
        ref, sep, amount = chunk.rpartition(":")
        if not sep or not ref:
            raise ValueError(f"holding '{chunk}' must look like TOKEN:amount")
        holdings.append((ref, amount))
    return holdings


def _is_reserved_account(account: str) -> bool:
    return account.startswith(_RESERVED_PREFIXES)


# Raw loading: both flavors produce {section: {label_or_key: value}} with string leaves.

RawScenario = Dict[str, Dict[str, Any]]


def _split_fields(text: Optional[str]) -> Dict[str, str]:
    fields: Dict[str, str] = {}
    for chunk in (text or "").split():
        key, sep, value = chunk.partition("=")
        if not sep or not key:
            raise ValueError(f"'{chunk}' must look like key=value")
        if key in fields:
            raise ValueError(f"field '{key}' given twice")
        fields[key] = value
    return fields


def _scalar_text(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ",".join(":".join(_scalar_text(v) for v in item) if isinstance(item, (list, tuple)) else _scalar_text(item) for item in value)
    return str(value)


def _read_ini(path: str, issues: List[ScenarioIssue]) -> RawScenario:
    parser = configparser.ConfigParser(allow_no_value=True, delimiters=("=",), interpolation=None, strict=True)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        issues.append(ScenarioIssue("", "", f"malformed INI: {exc}"))
        return {}

    raw: RawScenario = {}
    for section in parser.sections():
        entries: Dict[str, Any] = {}
        for key, value in parser.items(section):
            if section == "balances":
                try:
                    entries[key] = parse_holdings(value or "")
                except ValueError as exc:
                    issues.append(ScenarioIssue(section, key, str(exc)))
            elif section in FLAT_KEYS:
                entries[key] = value if value is not None else ""
            else:
                try:
                    entries[key] = _split_fields(value)
                except ValueError as exc:
                    issues.append(ScenarioIssue(section, key, str(exc)))
        raw[section] = entries
    return raw


def _read_yaml(path: str, issues: List[ScenarioIssue]) -> RawScenario:
    try:
        import yaml  # pylint: disable=import-outside-toplevel
    except ImportError as exc:
        raise ImportError("PyYAML is required for YAML scenario files. Install it with: pip install pyyaml") from exc

    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        issues.append(ScenarioIssue("", "", f"malformed YAML: {exc}"))
        return {}
    if data is None:
        return {}
    if not isinstance(data, dict):
        issues.append(ScenarioIssue("", "", f"top level must be a mapping, got {type(data).__name__}"))
        return {}

    raw: RawScenario = {}
    for section, body in data.items():
        section = str(section)
        if body is None:
            raw[section] = {}
            continue
        if section == "chains" and isinstance(body, list):
            body = {str(label): None for label in body}
        if not isinstance(body, dict):
            issues.append(ScenarioIssue(section, "", "section must be a mapping"))
            continue
        entries: Dict[str, Any] = {}
        for key, value in body.items():
            key = str(key)
            if section == "balances":
                if isinstance(value, dict):
                    entries[key] = [(str(ref), _scalar_text(amount)) for ref, amount in value.items()]
                else:
                    try:
                        entries[key] = parse_holdings(_scalar_text(value))
                    except ValueError as exc:
                        issues.append(ScenarioIssue(section, key, str(exc)))
            elif section in FLAT_KEYS:
                entries[key] = _scalar_text(value)
            elif value is None:
                entries[key] = {}
            elif isinstance(value, dict):
                entries[key] = {str(k): _scalar_text(v) for k, v in value.items()}
            else:
                issues.append(ScenarioIssue(section, key, "entry must be a mapping of fields"))
        raw[section] = entries
    return raw


def read_raw(path: str, issues: List[ScenarioIssue]) -> RawScenario:
    """Read a scenario file into the raw section layout. ``OSError`` propagates."""
    if is_yaml_file(path):
        logger.debug("Reading YAML scenario '%s'.", path)
        return _read_yaml(path, issues)
    logger.debug("Reading INI scenario '%s'.", path)
    return _read_ini(path, issues)


# Validation


class _Checker:
    """Turns a raw scenario into a ``Scenario`` while collecting every issue."""

    def __init__(self, source: str, raw: RawScenario, issues: List[ScenarioIssue]) -> None:
        self.source = source
        self.raw = raw
        self.issues = issues

    def error(self, section: str, key: str, reason: str) -> None:
        self.issues.append(ScenarioIssue(section, key, reason))

    def warn(self, section: str, key: str, reason: str) -> None:
        self.issues.append(ScenarioIssue(section, key, reason, severity="warning"))

    def value(
        self,
        section: str,
        key: str,
        fields: Dict[str, str],
        name: str,
        parser: Callable[[str], Any],
        default: Any = None,
        required: bool = False,
    ) -> Any:
        text = fields.get(name)
        if text is None or text == "":
            if required:
                self.error(section, f"{key}.{name}" if key else name, "is required")
            return default
        try:
            return parser(text)
        except ValueError as exc:
            self.error(section, f"{key}.{name}" if key else name, str(exc))
            return default

    def unknown_fields(self, section: str, key: str, fields: Dict[str, str], allowed: Set[str]) -> None:
        for name in fields:
            if name not in allowed:
                self.error(section, f"{key}.{name}" if key else name, "unknown key")

    def section(self, name: str) -> Dict[str, Any]:
        return self.raw.get(name, {})

    # Sections

    def check(self) -> Optional[Scenario]:
        for section in self.raw:
            if section not in SECTIONS:
                self.error(section, "", "unknown section")
        for section, allowed in FLAT_KEYS.items():
            self.unknown_fields(section, "", self.section(section), allowed)

        run = self._run()
        chains = self._chains()
        tokens = self._tokens({c.label for c in chains})
        token_by_label = {t.label: t for t in tokens}
        gateways = self._gateways(token_by_label, run)
        pools = self._pools(token_by_label)
        balances = self._balances(token_by_label, gateways)
        emission = self._emission()
        lp_fraction_bps = self.value("rewards", "", self.section("rewards"), "lp_fraction_bps", lambda t: parse_int(t, 0, BPS_DENOMINATOR), 8_000)
        governance = self._governance()
        feeds = self._feeds(token_by_label)
        agents = self._agents(pools, gateways, feeds)
        schedule = self._schedule(chains, token_by_label, gateways, pools, run)

        if any(issue.severity == "error" for issue in self.issues):
            return None
        return Scenario(
            source=self.source,
            chains=tuple(chains),
            tokens=tuple(tokens),
            gateways=tuple(gateways),
            pools=tuple(pools),
            balances=tuple(balances),
            emission=emission,
            lp_fraction_bps=lp_fraction_bps,
            governance=governance,
            agents=tuple(agents),
            feeds=tuple(feeds),
            schedule=tuple(schedule),
            run=run,
        )

    def _run(self) -> RunSpec:
        fields = self.section("run")
        ticks = self.value("run", "", fields, "ticks", lambda t: parse_int(t, 0, MAX_TICKS), 0, required=True)
        seed = self.value("run", "", fields, "seed", lambda t: parse_int(t, 0, MAX_SEED), 0)
        audit_every = self.value("run", "", fields, "audit_every", lambda t: parse_int(t, 1), 1)
        multi = self.value("run", "", fields, "multi_gateway", parse_bool, False)
        slippage_ref = self.value("run", "", fields, "slippage_ref", parse_amount, UNIT)
        if slippage_ref == 0:
            self.error("run", "slippage_ref", "must be positive")
        return RunSpec(ticks or 0, seed or 0, audit_every or 1, bool(multi), slippage_ref or UNIT)

    def _chains(self) -> List[ChainSpec]:
        chains = []
        names: Set[str] = set()
        for label, fields in self.section("chains").items():
            self.unknown_fields("chains", label, fields, ENTITY_FIELDS["chains"])
            name = (fields.get("name") or label).strip()
            if name in names:
                self.error("chains", label, f"duplicate chain name '{name}'")
            names.add(name)
            chains.append(ChainSpec(label, name))
        if not chains:
            self.error("chains", "", "at least one chain is required")
        return chains

    def _tokens(self, chain_labels: Set[str]) -> List[TokenSpec]:
        tokens: List[TokenSpec] = []
        seen: Dict[str, TokenSpec] = {}
        symbols: Set[Tuple[str, str]] = set()
        rgu_label: Optional[str] = None
        for label, fields in self.section("tokens").items():
            self.unknown_fields("tokens", label, fields, ENTITY_FIELDS["tokens"])
            chain = fields.get("chain", "")
            kind = fields.get("kind", "origin")
            symbol = fields.get("symbol") or label
            underlying = fields.get("underlying") or None
            ok = True
            if chain not in chain_labels:
                self.error("tokens", f"{label}.chain", f"unknown chain '{chain}'")
                ok = False
            if kind not in TOKEN_KINDS:
                self.error("tokens", f"{label}.kind", f"must be one of {', '.join(TOKEN_KINDS)}")
                ok = False
            if (chain, symbol) in symbols:
                self.error("tokens", f"{label}.symbol", f"symbol '{symbol}' already used on chain '{chain}'")
            symbols.add((chain, symbol))
            if kind == "rgu":
                if rgu_label is not None:
                    self.error("tokens", f"{label}.kind", f"RGU token already declared as '{rgu_label}'")
                rgu_label = label
            if kind == "wrapped":
                base = seen.get(underlying or "")
                if underlying is None:
                    self.error("tokens", f"{label}.underlying", "wrapped token needs an underlying token")
                elif base is None:
                    self.error("tokens", f"{label}.underlying", f"unknown or later-declared token '{underlying}'")
                elif base.kind != "origin":
                    self.error("tokens", f"{label}.underlying", f"'{underlying}' is not an origin token")
                elif base.chain == chain:
                    self.error("tokens", f"{label}.underlying", "underlying must live on another chain")
            elif underlying is not None:
                self.error("tokens", f"{label}.underlying", "only wrapped tokens take an underlying token")
            spec = TokenSpec(label, chain, symbol, kind, underlying if kind == "wrapped" else None)
            seen[label] = spec
            if ok:
                tokens.append(spec)
        return tokens

    def _gateways(self, tokens: Dict[str, TokenSpec], run: RunSpec) -> List[GatewaySpec]:
        gateways = []
        per_wrapped: Dict[str, str] = {}
        has_rgu = any(t.kind == "rgu" for t in tokens.values())
        for label, fields in self.section("gateways").items():
            self.unknown_fields("gateways", label, fields, ENTITY_FIELDS["gateways"])
            token = fields.get("token", "")
            wrapped = fields.get("wrapped", "")
            provider = fields.get("provider", "")
            latency = self.value("gateways", label, fields, "latency", parse_int, 0)
            fee = self.value("gateways", label, fields, "unwrap_fee", parse_amount, 0)
            if tokens.get(token) is None or tokens[token].kind != "origin":
                self.error("gateways", f"{label}.token", f"'{token}' is not a declared origin token")
            if tokens.get(wrapped) is None or tokens[wrapped].underlying != token:
                self.error("gateways", f"{label}.wrapped", f"'{wrapped}' is not a wrapped token of '{token}'")
            if not provider:
                self.error("gateways", f"{label}.provider", "is required")
            elif _is_reserved_account(provider):
                self.error("gateways", f"{label}.provider", f"'{provider}' is a reserved protocol account")
            if fee and not has_rgu:
                self.error("gateways", f"{label}.unwrap_fee", "an unwrap fee needs an RGU token")
            if wrapped in per_wrapped and not run.multi_gateway:
                self.error("gateways", f"{label}.wrapped", f"'{wrapped}' already has gateway '{per_wrapped[wrapped]}'")
            per_wrapped.setdefault(wrapped, label)
            gateways.append(GatewaySpec(label, token, wrapped, provider, latency or 0, fee or 0))
        return gateways

    def _pools(self, tokens: Dict[str, TokenSpec]) -> List[PoolSpec]:
        pools = []
        pairs: Dict[Tuple[str, frozenset], str] = {}
        for label, fields in self.section("pools").items():
            self.unknown_fields("pools", label, fields, ENTITY_FIELDS["pools"])
            token_w = fields.get("token_w", "")
            token_o = fields.get("token_o", "")
            fee_bps = self.value("pools", label, fields, "fee_bps", lambda t: parse_int(t, 0, MAX_POOL_FEE_BPS), 30)
            weight = self.value("pools", label, fields, "weight", lambda t: parse_int(t, 0, MAX_POOL_WEIGHT), 0)
            seed_account = fields.get("seed_account") or None
            seed_w = self.value("pools", label, fields, "seed_w", parse_amount, 0)
            seed_o = self.value("pools", label, fields, "seed_o", parse_amount, 0)
            for name, ref in (("token_w", token_w), ("token_o", token_o)):
                if ref not in tokens:
                    self.error("pools", f"{label}.{name}", f"unknown token '{ref}'")
            if token_w in tokens and token_o in tokens:
                if token_w == token_o:
                    self.error("pools", f"{label}.token_o", "a pool needs two distinct tokens")
                elif tokens[token_w].chain != tokens[token_o].chain:
                    self.error("pools", f"{label}.token_o", "both pool tokens must live on the same chain")
                else:
                    pair = (tokens[token_w].chain, frozenset((token_w, token_o)))
                    if pair in pairs:
                        self.error("pools", label, f"pair already traded by pool '{pairs[pair]}'")
                    pairs[pair] = label
            seeded = (seed_account is not None, bool(seed_w), bool(seed_o))
            if any(seeded) and not all(seeded):
                self.error("pools", label, "seed_account, seed_w and seed_o go together")
            elif seed_account is not None and _is_reserved_account(seed_account):
                self.error("pools", f"{label}.seed_account", f"'{seed_account}' is a reserved protocol account")
            pools.append(PoolSpec(label, token_w, token_o, fee_bps or 0, weight or 0, seed_account, seed_w or 0, seed_o or 0))
        return pools

    def _balances(self, tokens: Dict[str, TokenSpec], gateways: List[GatewaySpec]) -> List[HoldingSpec]:
        holdings = []
        gateway_labels = {g.label: g for g in gateways}
        for account, entries in self.section("balances").items():
            if _is_reserved_account(account):
                self.error("balances", account, "reserved protocol account")
                continue
            for ref, amount_text in entries:
                token, _, gateway = ref.partition("@")
                key = f"{account}.{ref}"
                try:
                    amount = parse_amount(amount_text)
                except ValueError as exc:
                    self.error("balances", key, str(exc))
                    continue
                spec = tokens.get(token)
                if spec is None:
                    self.error("balances", key, f"unknown token '{token}'")
                    continue
                if spec.kind == "wrapped":
                    if gateway:
                        gw = gateway_labels.get(gateway)
                        if gw is None or gw.wrapped != token:
                            self.error("balances", key, f"'{gateway}' is not a gateway of '{token}'")
                            continue
                    else:
                        candidates = [g.label for g in gateways if g.wrapped == token]
                        if not candidates:
                            self.error("balances", key, f"wrapped token '{token}' has no gateway to back it")
                            continue
                        gateway = candidates[0]
                elif gateway:
                    self.error("balances", key, "only wrapped tokens name a gateway")
                    continue
                holdings.append(HoldingSpec(account, token, amount, gateway or None))
        return holdings

    def _emission(self) -> EmissionSchedule:
        fields = self.section("emission")
        schedule = EmissionSchedule(
            e0=self.value("emission", "", fields, "e0", parse_amount, 0) or 0,
            decay_num=self.value("emission", "", fields, "decay_num", parse_int, 1),
            decay_den=self.value("emission", "", fields, "decay_den", lambda t: parse_int(t, 1), 1),
            period_ticks=self.value("emission", "", fields, "period_ticks", lambda t: parse_int(t, 1, MAX_TICKS), 1),
        )
        try:
            schedule.validate()
        except ValueError as exc:
            self.error("emission", "", str(exc))
        return schedule

    def _governance(self) -> GovParams:
        fields = self.section("governance")
        params = GovParams(
            deposit_min=self.value("governance", "", fields, "deposit_min", parse_amount, 0) or 0,
            voting_period=self.value("governance", "", fields, "voting_period", lambda t: parse_int(t, 1, MAX_TICKS), 10),
            quorum_bps=self.value("governance", "", fields, "quorum_bps", lambda t: parse_int(t, 0, BPS_DENOMINATOR), 4_000),
            threshold_bps=self.value("governance", "", fields, "threshold_bps", lambda t: parse_int(t, 0, BPS_DENOMINATOR), 5_000),
        )
        return params

    def _feeds(self, tokens: Dict[str, TokenSpec]) -> List[FeedSpec]:
        feeds = []
        bound: Dict[str, str] = {}
        for label, fields in self.section("feeds").items():
            self.unknown_fields("feeds", label, fields, ENTITY_FIELDS["feeds"])
            kind = fields.get("kind", "")
            token = fields.get("token") or None
            if token is not None:
                if token not in tokens:
                    self.error("feeds", f"{label}.token", f"unknown token '{token}'")
                elif token in bound:
                    self.error("feeds", f"{label}.token", f"'{token}' is already marked by feed '{bound[token]}'")
                bound.setdefault(token, label)
            if kind == "constant":
                price = self.value("feeds", label, fields, "price", parse_ratio, required=True)
                feeds.append(FeedSpec(label, kind, price=price, token=token))
            elif kind == "piecewise":
                points = self.value("feeds", label, fields, "points", parse_points, (), required=True)
                feeds.append(FeedSpec(label, kind, points=points or (), token=token))
            elif kind == "geometric_walk":
                p0 = self.value("feeds", label, fields, "p0", parse_ratio, required=True)
                step = self.value("feeds", label, fields, "step_bps", lambda t: parse_int(t, 0, BPS_DENOMINATOR - 1), 0)
                feeds.append(FeedSpec(label, kind, price=p0, step_bps=step or 0, token=token))
            else:
                self.error("feeds", f"{label}.kind", f"must be one of {', '.join(FEED_KINDS)}")
        return feeds

    def _agents(self, pools: List[PoolSpec], gateways: List[GatewaySpec], feeds: List[FeedSpec]) -> List[AgentSpec]:
        agents = []
        pool_labels = {p.label for p in pools}
        gateway_labels = {g.label for g in gateways}
        feed_labels = {f.label for f in feeds}
        for label, fields in self.section("agents").items():
            kind = fields.get("kind", "")
            account = fields.get("account") or label
            if kind not in AGENT_FIELDS:
                self.error("agents", f"{label}.kind", f"must be one of {', '.join(AGENT_FIELDS)}")
                continue
            self.unknown_fields("agents", label, fields, AGENT_FIELDS[kind] | {"kind", "account"})
            if _is_reserved_account(account):
                self.error("agents", f"{label}.account", f"'{account}' is a reserved protocol account")
            params: Dict[str, Any] = {}
            if "pool" in AGENT_FIELDS[kind]:
                pool = fields.get("pool", "")
                if pool not in pool_labels:
                    self.error("agents", f"{label}.pool", f"unknown pool '{pool}'")
                params["pool"] = pool
            if kind == "arbitrageur":
                feed = fields.get("feed", "")
                if feed not in feed_labels:
                    self.error("agents", f"{label}.feed", f"unknown feed '{feed}'")
                params["feed"] = feed
                params["min_profit"] = self.value("agents", label, fields, "min_profit", parse_amount, 0)
            elif kind == "random_trader":
                params["intensity"] = self.value("agents", label, fields, "intensity", lambda t: parse_ratio(t, positive=False), Fraction(1))
                params["max_size"] = self.value("agents", label, fields, "max_size", parse_amount, required=True)
                if params["max_size"] == 0:
                    self.error("agents", f"{label}.max_size", "must be positive")
            elif kind == "liquidity_provider":
                enter = self.value("agents", label, fields, "enter_tick", parse_int, 0)
                exit_tick = self.value("agents", label, fields, "exit_tick", parse_int)
                if exit_tick is not None and enter is not None and exit_tick <= enter:
                    self.error("agents", f"{label}.exit_tick", "must come after enter_tick")
                params["enter_tick"] = enter
                params["exit_tick"] = exit_tick
                params["amount_w"] = self.value("agents", label, fields, "amount_w", parse_amount, required=True)
                params["amount_o"] = self.value("agents", label, fields, "amount_o", parse_amount)
                params["claim_every"] = self.value("agents", label, fields, "claim_every", lambda t: parse_int(t, 1))
            else:
                gateway = fields.get("gateway", "")
                if gateway not in gateway_labels:
                    self.error("agents", f"{label}.gateway", f"unknown gateway '{gateway}'")
                params["gateway"] = gateway
                params["amount"] = self.value("agents", label, fields, "amount", parse_amount, required=True)
                if params["amount"] == 0:
                    self.error("agents", f"{label}.amount", "must be positive")
                policy = fields.get("policy", "lock")
                if policy not in BRIDGE_POLICIES:
                    self.error("agents", f"{label}.policy", f"must be one of {', '.join(BRIDGE_POLICIES)}")
                params["policy"] = policy
                params["claim_every"] = self.value("agents", label, fields, "claim_every", lambda t: parse_int(t, 1))
            agents.append(AgentSpec(label, kind, account, params))
        return agents

    def _schedule(
        self,
        chains: List[ChainSpec],
        tokens: Dict[str, TokenSpec],
        gateways: List[GatewaySpec],
        pools: List[PoolSpec],
        run: RunSpec,
    ) -> List[ActionSpec]:
        known = {
            "chain": {c.label for c in chains},
            "token": set(tokens),
            "gateway": {g.label for g in gateways},
            "pool": {p.label for p in pools},
        }
        entries = self.section("schedule")
        # Entities created by governance can be referenced once declared with new=.
        for label, fields in entries.items():
            if fields.get("action") == "submit" and fields.get("new"):
                category = {"add_chain": "chain", "add_token": "token", "add_pool": "pool", "add_gateway": "gateway"}.get(
                    fields.get("payload", "")
                )
                if category is None:
                    self.error("schedule", f"{label}.new", "only add_* payloads create entities")
                elif fields["new"] in known[category]:
                    self.error("schedule", f"{label}.new", f"{category} label '{fields['new']}' already exists")
                else:
                    known[category].add(fields["new"])
        proposals = {label for label, fields in entries.items() if fields.get("action") == "submit"}

        actions = []
        for label, fields in entries.items():
            action = fields.get("action", "")
            if action not in ACTION_FIELDS:
                self.error("schedule", f"{label}.action", f"must be one of {', '.join(ACTION_FIELDS)}")
                continue
            self.unknown_fields("schedule", label, fields, ACTION_FIELDS[action] | {"tick", "action"})
            tick = self.value("schedule", label, fields, "tick", lambda t: parse_int(t, 0, MAX_TICKS), 0, required=True)
            if tick is not None and tick >= run.ticks:
                self.warn("schedule", f"{label}.tick", f"tick {tick} is beyond the run length {run.ticks}; never executed")
            params = self._action_params(label, action, fields, known, proposals)
            actions.append(ActionSpec(label, tick or 0, action, params))
        return actions

    def _ref(self, label: str, fields: Dict[str, str], name: str, category: str, known: Dict[str, Set[str]]) -> str:
        ref = fields.get(name, "")
        if ref not in known[category]:
            self.error("schedule", f"{label}.{name}", f"unknown {category} '{ref}'")
        return ref

    def _account(self, label: str, fields: Dict[str, str], name: str = "account") -> str:
        account = fields.get(name, "")
        if not account:
            self.error("schedule", f"{label}.{name}", "is required")
        elif _is_reserved_account(account):
            self.error("schedule", f"{label}.{name}", f"'{account}' is a reserved protocol account")
        return account

    def _action_params(
        self, label: str, action: str, fields: Dict[str, str], known: Dict[str, Set[str]], proposals: Set[str]
    ) -> Dict[str, Any]:
        params: Dict[str, Any] = {}
        value = self.value
        if action == "submit":
            params["account"] = self._account(label, fields)
            params["deposit"] = value("schedule", label, fields, "deposit", parse_amount, 0)
            payload = fields.get("payload", "")
            if payload not in PAYLOAD_KINDS:
                self.error("schedule", f"{label}.payload", f"must be one of {', '.join(PAYLOAD_KINDS)}")
                return params
            params["payload"] = payload
            for name in fields:
                if name in ACTION_FIELDS["submit"] - {"account", "deposit", "payload"} and name not in PAYLOAD_FIELDS[payload]:
                    self.error("schedule", f"{label}.{name}", f"not used by a {payload} payload")
            params["new"] = fields.get("new") or None
            if payload == "param":
                name = fields.get("param", "")
                spec = PARAM_SPECS.get(name)
                if spec is None:
                    self.error("schedule", f"{label}.param", f"unknown parameter '{name}'")
                    return params
                params["param"] = name
                params["target"] = None
                if spec.target is not None:
                    params["target"] = self._ref(label, fields, "target", spec.target, known)
                elif fields.get("target"):
                    self.error("schedule", f"{label}.target", f"{name} does not take a target")
                parser = parse_amount if name in AMOUNT_PARAMS else parse_int
                params["value"] = value("schedule", label, fields, "value", parser, required=True)
            elif payload == "add_chain":
                params["name"] = fields.get("name") or params["new"] or ""
                if not params["name"]:
                    self.error("schedule", f"{label}.name", "is required")
            elif payload == "add_token":
                params["chain"] = self._ref(label, fields, "chain", "chain", known)
                params["symbol"] = fields.get("symbol") or params["new"] or ""
                params["token_kind"] = fields.get("token_kind", "origin")
                if params["token_kind"] not in ("origin", "wrapped"):
                    self.error("schedule", f"{label}.token_kind", "must be origin or wrapped")
                params["underlying"] = None
                if params["token_kind"] == "wrapped":
                    params["underlying"] = self._ref(label, fields, "underlying", "token", known)
            elif payload == "add_pool":
                params["token_w"] = self._ref(label, fields, "token_w", "token", known)
                params["token_o"] = self._ref(label, fields, "token_o", "token", known)
                params["fee_bps"] = value("schedule", label, fields, "fee_bps", lambda t: parse_int(t, 0, MAX_POOL_FEE_BPS), 30)
                params["weight"] = value("schedule", label, fields, "weight", lambda t: parse_int(t, 0, MAX_POOL_WEIGHT), 0)
            elif payload == "add_gateway":
                params["token"] = self._ref(label, fields, "token", "token", known)
                params["wrapped"] = self._ref(label, fields, "wrapped", "token", known)
                params["provider"] = self._account(label, fields, "provider")
                params["latency"] = value("schedule", label, fields, "latency", parse_int, 0)
                params["unwrap_fee"] = value("schedule", label, fields, "unwrap_fee", parse_amount, 0)
            else:
                params["digest"] = fields.get("digest", "")
                if not params["digest"]:
                    self.error("schedule", f"{label}.digest", "is required")
        elif action == "vote":
            proposal = fields.get("proposal", "")
            if proposal not in proposals:
                self.error("schedule", f"{label}.proposal", f"'{proposal}' is not a submit entry")
            params["proposal"] = proposal
            params["account"] = self._account(label, fields)
            params["support"] = value("schedule", label, fields, "support", parse_bool, required=True)
        elif action in ("lock", "unwrap"):
            params["gateway"] = self._ref(label, fields, "gateway", "gateway", known)
            params["account"] = self._account(label, fields)
            params["amount"] = value("schedule", label, fields, "amount", parse_amount, required=True)
        elif action == "swap":
            params["pool"] = self._ref(label, fields, "pool", "pool", known)
            params["account"] = self._account(label, fields)
            params["token_in"] = self._ref(label, fields, "token_in", "token", known)
            params["amount"] = value("schedule", label, fields, "amount", parse_amount, required=True)
            params["min_out"] = value("schedule", label, fields, "min_out", parse_amount, 0)
        elif action == "add_liquidity":
            params["pool"] = self._ref(label, fields, "pool", "pool", known)
            params["account"] = self._account(label, fields)
            params["amount_w"] = value("schedule", label, fields, "amount_w", parse_amount, required=True)
            params["amount_o"] = value("schedule", label, fields, "amount_o", parse_amount)
        elif action == "remove_liquidity":
            params["pool"] = self._ref(label, fields, "pool", "pool", known)
            params["account"] = self._account(label, fields)
            shares = fields.get("shares", "all")
            params["shares"] = None if shares == "all" else value("schedule", label, fields, "shares", lambda t: parse_int(t, 1))
        elif action == "claim_lp":
            params["pool"] = self._ref(label, fields, "pool", "pool", known)
            params["account"] = self._account(label, fields)
        elif action == "claim_gateway":
            params["gateway"] = self._ref(label, fields, "gateway", "gateway", known)
        else:
            params["token"] = self._ref(label, fields, "token", "token", known)
            params["sender"] = self._account(label, fields, "sender")
            params["recipient"] = self._account(label, fields, "recipient")
            params["amount"] = value("schedule", label, fields, "amount", parse_amount, required=True)
        return params


def check_raw(source: str, raw: RawScenario, issues: Optional[List[ScenarioIssue]] = None) -> Tuple[Optional[Scenario], ScenarioReport]:
    """Validate an already-read raw scenario; the scenario is ``None`` when there are errors."""
    issues = list(issues or [])
    scenario = _Checker(source, raw, issues).check()
    return scenario, ScenarioReport(issues)


def check_scenario(path: str) -> Tuple[Optional[Scenario], ScenarioReport]:
    """Read and validate ``path``. Raises ``OSError`` when the file cannot be read."""
    issues: List[ScenarioIssue] = []
    try:
        raw = read_raw(path, issues)
    except UnicodeDecodeError as exc:
        issues.append(ScenarioIssue("", "", f"file is not UTF-8 text: {exc}"))
        return None, ScenarioReport(issues)
    return check_raw(os.path.basename(path), raw, issues)


def load_scenario(path: str) -> Scenario:
    """Read, validate and return the scenario at ``path``; raise on any error."""
    scenario, report = check_scenario(path)
    for issue in report.issues:
        if issue.severity == "warning":
            logger.warning("Scenario '%s': %s", path, issue)
    if scenario is None:
        raise ScenarioValidationError(path, report)
    return scenario
