# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""
Engine-wide invariant sweep.

Each check returns a list of human-readable problems; an empty list means
the invariant holds. ``enforce`` aborts a run on the first violation, while
``InvariantAuditor`` keeps counting so the ``audit`` command can report on
every check.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Tuple

from graviton_sim.errors import InvariantViolation

if TYPE_CHECKING:
    from graviton_sim.engine import Engine

logger = logging.getLogger(__name__)

Check = Callable[["Engine"], List[str]]


def ledger_sums(engine: "Engine") -> List[str]:
    problems = []
    for chain, token, total, supply in engine.ledger.supply_mismatches():
        problems.append(f"chain {chain} token {token}: balances sum to {total}, supply is {supply}")
    return problems


def escrow_identity(engine: "Engine") -> List[str]:
    return engine.gateways.escrow_mismatches()


def pool_consistency(engine: "Engine") -> List[str]:
    return engine.amm.consistency_problems()


def reward_conservation(engine: "Engine") -> List[str]:
    return engine.rewards.conservation_problems()


def governance_escrow(engine: "Engine") -> List[str]:
    if engine.ledger.rgu_token is None:
        return []
    escrowed = engine.governance.escrowed()
    active = engine.governance.active_deposits()
    if escrowed != active:
        return [f"governance escrow holds {escrowed}, active deposits total {active}"]
    return []


def rgu_supply_identity(engine: "Engine") -> List[str]:
    """``supply == initial + claimed - fee burns - deposit burns``."""
    if engine.ledger.rgu_token is None:
        return []
    supply = engine.rgu_supply()
    expected = engine.initial_rgu_supply + engine.rewards.claimed - engine.gateways.total_fee_burned - engine.governance.deposits_burned
    if supply != expected:
        return [
            f"RGU supply {supply} != initial {engine.initial_rgu_supply} + claimed {engine.rewards.claimed}"
            f" - fee burns {engine.gateways.total_fee_burned} - deposit burns {engine.governance.deposits_burned}"
        ]
    return []


INVARIANTS: Tuple[Tuple[str, Check], ...] = (
    ("ledger_sums", ledger_sums),
    ("escrow_identity", escrow_identity),
    ("pool_consistency", pool_consistency),
    ("reward_conservation", reward_conservation),
    ("governance_escrow", governance_escrow),
    ("rgu_supply_identity", rgu_supply_identity),
)


def sweep(engine: "Engine") -> List[Tuple[str, str]]:
    """Run every check; return ``(invariant, problem)`` pairs."""
    found = []
    for name, check in INVARIANTS:
        found.extend((name, problem) for problem in check(engine))
    return found


def enforce(engine: "Engine", tick: Optional[int]) -> None:
    """Raise ``InvariantViolation`` for the first problem found."""
    found = sweep(engine)
    if found:
        name, detail = found[0]
        logger.error("Invariant %s violated at tick %s: %s", name, tick, detail)
        raise InvariantViolation(name, tick, detail)


@dataclass
class AuditReport:
    checks: Dict[str, int] = field(default_factory=lambda: {name: 0 for name, _ in INVARIANTS})
    violations: Dict[str, List[Tuple[Optional[int], str]]] = field(default_factory=lambda: {name: [] for name, _ in INVARIANTS})

    @property
    def violation_count(self) -> int:
        return sum(len(items) for items in self.violations.values())

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def lines(self) -> List[str]:
        lines = []
        for name, _ in INVARIANTS:
            found = self.violations[name]
            status = "OK" if not found else f"{len(found)} violation(s)"
            lines.append(f"{name:<22} checks={self.checks[name]:<8} {status}")
            for tick, detail in found[:5]:
                lines.append(f"    tick {tick}: {detail}")
        return lines


class InvariantAuditor:
    """Records every sweep result instead of aborting."""

    def __init__(self) -> None:
        self.report = AuditReport()

    def __call__(self, engine: "Engine", tick: Optional[int]) -> None:
        for name, check in INVARIANTS:
            self.report.checks[name] += 1
            for problem in check(engine):
                self.report.violations[name].append((tick, problem))
