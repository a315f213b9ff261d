# Copyright 2026 icecake0141
# SPDX-License-Identifier: Apache-2.0

"""External price series (oT per wT) that agents trade against and wealth is marked to."""

import random
from fractions import Fraction
from typing import List, Sequence, Tuple

from graviton_sim.constants import BPS_DENOMINATOR, PRICE_QUANTUM
from graviton_sim.domain import Tick


class PriceFeed:
    """Base price series; ``price(t)`` must be strictly positive for every tick."""

    kind = "feed"

    def price(self, tick: Tick) -> Fraction:
        raise NotImplementedError


class ConstantFeed(PriceFeed):
    kind = "constant"

    def __init__(self, price: Fraction) -> None:
        if price <= 0:
            raise ValueError("feed price must be positive")
        self._price = Fraction(price)

    def price(self, tick: Tick) -> Fraction:
        return self._price


class PiecewiseFeed(PriceFeed):
    """Step function: the price of the last point at or before ``tick`` (the first point before it)."""

    kind = "piecewise"

    def __init__(self, points: Sequence[Tuple[Tick, Fraction]]) -> None:
        if not points:
            raise ValueError("piecewise feed needs at least one point")
        ticks = [tick for tick, _ in points]
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise ValueError("piecewise feed ticks must be strictly increasing")
        if any(price <= 0 for _, price in points):
            raise ValueError("feed prices must be positive")
        self._ticks = ticks
        self._prices = [Fraction(price) for _, price in points]

    def price(self, tick: Tick) -> Fraction:
        index = 0
        for i, start in enumerate(self._ticks):
            if start <= tick:
                index = i
            else:
                break
        return self._prices[index]


class GeometricWalkFeed(PriceFeed):
    """
    Multiplicative random walk: each tick moves the price up or down by ``step_bps``.

    Values are floored to multiples of ``1 / PRICE_QUANTUM`` (never below one
    quantum) and memoized, so repeated reads of a tick agree.
    """

    kind = "geometric_walk"

    def __init__(self, p0: Fraction, step_bps: int, rng: random.Random) -> None:
        if p0 <= 0:
            raise ValueError("feed price must be positive")
        if not 0 <= step_bps < BPS_DENOMINATOR:
            raise ValueError(f"step_bps must be within 0..{BPS_DENOMINATOR - 1}")
        self.step_bps = step_bps
        self._rng = rng
        self._values: List[Fraction] = [self._quantize(Fraction(p0))]

    @staticmethod
    def _quantize(value: Fraction) -> Fraction:
        scaled = value.numerator * PRICE_QUANTUM // value.denominator
        return Fraction(max(scaled, 1), PRICE_QUANTUM)

    def price(self, tick: Tick) -> Fraction:
        if tick < 0:
            raise ValueError("tick must be non-negative")
        while len(self._values) <= tick:
            up = self._rng.getrandbits(1) == 1
            step = BPS_DENOMINATOR + self.step_bps if up else BPS_DENOMINATOR - self.step_bps
            self._values.append(self._quantize(self._values[-1] * Fraction(step, BPS_DENOMINATOR)))
        return self._values[tick]
