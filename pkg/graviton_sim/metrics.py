# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Per-tick metrics rows and their CSV / records serialization.

Every value is an exact string: amounts as decimal integers of minimal
units, rationals as reduced ``n/d``. Columns are grouped by entity kind in a
fixed order (tick, pools, gateways, RGU totals, agents), each group sorted by
entity id; entities created mid-run add columns that are empty before they
exist. Output files are written to a temporary sibling and renamed into
place, so a failed run never leaves a partial file behind.
"""

import csv
import json
import logging
import os
import tempfile
from fractions import Fraction
from typing import IO, TYPE_CHECKING, Callable, Dict, List, Optional, Sequence, Tuple

from graviton_sim.domain import PendingKind, TokenId, TokenKindTag

if TYPE_CHECKING:
    from graviton_sim.agents import Agent
    from graviton_sim.engine import Engine

logger = logging.getLogger(__name__)

MetricsRow = Dict[str, str]

OUTPUT_FORMATS = ("csv", "records")

POOL_FIELDS = ("reserve_w", "reserve_o", "total_shares", "spot", "slippage")
GATEWAY_FIELDS = ("escrow", "outstanding", "pending_mint", "pending_unlock", "accrued")
RGU_COLUMNS = ("rgu.supply", "rgu.emitted", "rgu.claimed", "rgu.burned")
AGENT_FIELDS = ("wealth",)


def format_ratio(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def mark_price(engine: "Engine", token_id: TokenId, tick: int) -> Fraction:
    """
    Price of one minimal unit of ``token_id`` in oT units.

    Tokens bound to a feed (and the origin tokens behind bound wrapped
    tokens) use that feed; RGU marks at zero and anything else at one.
    """
    label = engine.marks.get(token_id)
    if label is not None:
        return engine.feed(label).price(tick)
    token = engine.ledger.token(token_id)
    if token.kind.tag is TokenKindTag.RGU:
        return Fraction(0)
    if token.kind.is_wrapped and token.kind.underlying in engine.marks:
        return engine.feed(engine.marks[token.kind.underlying]).price(tick)  # type: ignore[index]
    return Fraction(1)


def agent_wealth(engine: "Engine", agent: "Agent", tick: int) -> int:
    """Floored feed-marked value of the agent's balances plus its LP positions."""
    ledger = engine.ledger
    total = Fraction(0)
    for token in ledger.tokens:
        held = ledger.balance_of(token.home_chain, token.token_id, agent.account)
        if held:
            total += held * mark_price(engine, token.token_id, tick)
    for pool in engine.amm.pools:
        shares = pool.shares.get(agent.account, 0)
        if shares:
            owned_w = shares * pool.reserve_w // pool.total_shares
            owned_o = shares * pool.reserve_o // pool.total_shares
            total += owned_w * mark_price(engine, pool.token_w, tick) + owned_o * mark_price(engine, pool.token_o, tick)
    return total.__floor__()


class MetricsRecorder:
    """Collects one row per tick and tracks the union of columns seen so far."""

    def __init__(self, slippage_ref: int) -> None:
        self.slippage_ref = slippage_ref
        self.rows: List[MetricsRow] = []
        self._pools: Dict[int, str] = {}
        self._gateways: Dict[int, str] = {}
        self._agents: Dict[int, str] = {}

    def observe(self, engine: "Engine") -> None:
        """Register the columns of every entity that currently exists."""
        for pool in engine.amm.pools:
            self._pools.setdefault(pool.pool_id, engine.names.pool(pool.pool_id))
        for gw in engine.gateways.gateways:
            self._gateways.setdefault(gw.gateway_id, engine.names.gateway(gw.gateway_id))
        for agent in engine.agents:
            self._agents.setdefault(agent.agent_id, agent.label)

    def columns(self) -> List[str]:
        columns = ["tick"]
        for pool_id in sorted(self._pools):
            columns.extend(f"pool.{self._pools[pool_id]}.{name}" for name in POOL_FIELDS)
        for gateway_id in sorted(self._gateways):
            columns.extend(f"gateway.{self._gateways[gateway_id]}.{name}" for name in GATEWAY_FIELDS)
        columns.extend(RGU_COLUMNS)
        for agent_id in sorted(self._agents):
            columns.extend(f"agent.{self._agents[agent_id]}.{name}" for name in AGENT_FIELDS)
        return columns

    def record(self, engine: "Engine", tick: int) -> MetricsRow:
        self.observe(engine)
        row: MetricsRow = {"tick": str(tick)}
        for pool in engine.amm.pools:
            prefix = f"pool.{self._pools[pool.pool_id]}"
            row[f"{prefix}.reserve_w"] = str(pool.reserve_w)
            row[f"{prefix}.reserve_o"] = str(pool.reserve_o)
            row[f"{prefix}.total_shares"] = str(pool.total_shares)
            if pool.is_empty:
                row[f"{prefix}.spot"] = ""
                row[f"{prefix}.slippage"] = ""
            else:
                row[f"{prefix}.spot"] = format_ratio(engine.amm.spot_price(pool.pool_id))
                row[f"{prefix}.slippage"] = format_ratio(engine.amm.quote_slippage(pool.pool_id, self.slippage_ref))
        for gw in engine.gateways.gateways:
            prefix = f"gateway.{self._gateways[gw.gateway_id]}"
            row[f"{prefix}.escrow"] = str(engine.gateways.escrow(gw.gateway_id))
            row[f"{prefix}.outstanding"] = str(gw.outstanding)
            row[f"{prefix}.pending_mint"] = str(gw.pending_total(PendingKind.MINT))
            row[f"{prefix}.pending_unlock"] = str(gw.pending_total(PendingKind.UNLOCK))
            row[f"{prefix}.accrued"] = str(engine.rewards.pending_gateway(gw.gateway_id))
        row["rgu.supply"] = str(engine.rgu_supply())
        row["rgu.emitted"] = str(engine.rewards.emitted)
        row["rgu.claimed"] = str(engine.rewards.claimed)
        row["rgu.burned"] = str(engine.rgu_burned())
        for agent in engine.agents:
            row[f"agent.{agent.label}.wealth"] = str(agent_wealth(engine, agent, tick))
        self.rows.append(row)
        return row


def write_atomic(path: str, write: Callable[[IO[str]], None]) -> None:
    """Run ``write`` against a temporary sibling of ``path``, then rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, temp_path = tempfile.mkstemp(prefix=f".{os.path.basename(path)}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write(fh)
        os.replace(temp_path, path)
    except BaseException:
        try:
            os.unlink(temp_path)
        except OSError:
            pass
        raise


def write_metrics(path: str, columns: Sequence[str], rows: Sequence[MetricsRow], output_format: str = "csv") -> None:
    """Write rows atomically as CSV (header first) or one JSON object per line."""
    if output_format not in OUTPUT_FORMATS:
        raise ValueError(f"unknown metrics format '{output_format}'")

    def write_csv(fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row.get(column, "") for column in columns])

    def write_records(fh: IO[str]) -> None:
        for row in rows:
            ordered = {column: row[column] for column in columns if column in row}
            fh.write(json.dumps(ordered, separators=(",", ":")) + "\n")

    write_atomic(path, write_csv if output_format == "csv" else write_records)
    logger.info("Wrote %d metrics row(s) to '%s' (%s).", len(rows), path, output_format)


def read_csv_metrics(path: str) -> Tuple[List[str], List[MetricsRow]]:
    """Read back a CSV metrics file; used by tests and the sweep summary."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [dict(row) for row in reader]
        return list(reader.fieldnames or []), rows


def suffixed_path(directory: str, stem: str, seed: int, output_format: str, width: Optional[int] = None) -> str:
    extension = "csv" if output_format == "csv" else "jsonl"
    seed_text = str(seed).zfill(width) if width else str(seed)
    return os.path.join(directory, f"{stem}.seed{seed_text}.{extension}")
