import math
import os
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

import env
from core.errors import ConfigError
from models.market import DuopolyParams, ExogenousMode, Gamma, MarketParams, SponsorshipProfile
from models.simulation import SimConfig

SweepAxis = Literal["lambda", "lambda0", "c", "c1", "c2", "gamma1", "gamma2", "rho_over_beta"]

AXIS_SYMBOLS: dict[str, str] = {
    "lambda": "λ",
    "lambda0": "λ0",
    "c": "c",
    "c1": "c1",
    "c2": "c2",
    "gamma1": "γ1",
    "gamma2": "γ2",
    "rho_over_beta": "ρ/β",
}
"""Axis label used in plots"""


class MarketConfig(BaseModel):
    """Market section of a scenario"""

    model_config = ConfigDict(extra="forbid")

    capacities: list[float] = Field(..., min_length=2, description="Service rate of each CP")
    """Service rate `m_i` of each CP"""
    total_rate: float = Field(..., description="Usual request rate λ")
    """Usual request rate `λ`"""
    access_price: float | None = Field(None, description="Access price c of the single ISP")
    """Access price `c`"""
    access_prices: tuple[float, float] | None = Field(None, description="Access prices (c1, c2) of two ISPs")
    """Access prices `(c1, c2)`"""
    repayment: float = Field(1.0, description="Repayment factor ρ")
    """Repayment factor `ρ`"""
    ad_rate: float = Field(1.0, description="Advertisement revenue β")
    """Advertisement revenue `β`"""
    exogenous_rate: float = Field(0.0, description="Exogenous demand λ0")
    """Exogenous demand `λ0`"""
    exogenous_mode: ExogenousMode = Field(
        "noncongesting",
        description="Exogenous traffic mode\n- noncongesting: exogenous requests never queue.\n- congesting: exogenous requests occupy CP capacity.",
    )
    """
    Exogenous traffic mode

    - `noncongesting`: exogenous requests never queue.
    - `congesting`: exogenous requests occupy CP capacity.
    """

    def _common(self) -> dict:
        return dict(
            capacities=tuple(self.capacities),
            total_rate=self.total_rate,
            repayment=self.repayment,
            ad_rate=self.ad_rate,
            exogenous_rate=self.exogenous_rate,
            exogenous_mode=self.exogenous_mode,
        )

    def single(self) -> MarketParams:
        if self.access_price is None:
            raise ConfigError("market.access_price is required for a single ISP scenario")

        return MarketParams(access_price=self.access_price, **self._common())

    def duopoly(self) -> DuopolyParams:
        if self.access_prices is None:
            raise ConfigError("market.access_prices is required for a two ISP scenario")

        return DuopolyParams(access_prices=self.access_prices, **self._common())


class SweepConfig(BaseModel):
    """Swept parameter"""

    model_config = ConfigDict(extra="forbid")

    axis: SweepAxis = Field(..., description="Swept parameter")
    """Swept parameter"""
    start: float = Field(..., description="First axis value")
    """First value"""
    stop: float = Field(..., description="Last axis value")
    """Last value"""
    points: int = Field(50, ge=1, description="Number of axis values")
    """Number of values"""
    scale: Literal["linear", "log"] = Field("linear", description="Axis spacing")
    """Axis spacing"""

    @model_validator(mode="after")
    def check_range(self) -> "SweepConfig":
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("sweep range must be finite")
        if self.start > self.stop or (self.points > 1 and self.start == self.stop):
            raise ValueError("sweep range must be ordered start < stop")
        if self.scale == "log" and self.start <= 0:
            raise ValueError("log sweep needs a positive start")

        return self

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)

        return np.linspace(self.start, self.stop, self.points)


class OutputConfig(BaseModel):
    """Output files"""

    model_config = ConfigDict(extra="forbid")

    csv: str | None = Field(None, description="CSV path")
    """CSV path, `<OUTPUT_PATH>/<command>.csv` when unset"""
    svg: str | None = Field(None, description="SVG path")
    """SVG path, next to the CSV when unset"""


class Scenario(BaseModel):
    """Scenario file"""

    model_config = ConfigDict(extra="forbid")

    market: MarketConfig = Field(..., description="Market parameters")
    """Market parameters"""
    gammas: list[Gamma] | None = Field(None, description="Subsidy factor of each CP")
    """Subsidy factor of each CP, command dependent default"""
    sweep: SweepConfig | None = Field(None, description="Swept parameter")
    """Swept parameter, a single point run when unset"""
    prices: list[float] | None = Field(None, description="Access price grid of the delay sweep")
    """Access price grid of the delay sweep"""
    grid: int = Field(env.DEFAULT_GRID, ge=2, description="Subsidy factor grid size")
    """Subsidy factor grid size of the continuous game"""
    simulation: SimConfig = Field(SimConfig(), description="Queue simulation")
    """Queue simulation"""
    output: OutputConfig = Field(OutputConfig(), description="Output files")
    """Output files"""

    @model_validator(mode="after")
    def check_gammas(self) -> "Scenario":
        if self.gammas is not None and len(self.gammas) != len(self.market.capacities):
            raise ValueError("gammas must give one subsidy factor per CP")

        return self

    def profile(self, default: float = 1.0) -> SponsorshipProfile:
        if self.gammas is None:
            return SponsorshipProfile.uniform(len(self.market.capacities), default)

        return SponsorshipProfile(gammas=tuple(self.gammas))

    def axis_values(self) -> list[float | None]:
        """Sweep values, `[None]` for a single point run"""
        if self.sweep is None:
            return [None]

        return [float(value) for value in self.sweep.values()]

    def check_axis(self, command: str, axes: frozenset[str]) -> None:
        """Reject a sweep over a parameter `command` does not vary"""
        if self.sweep is None or self.sweep.axis in axes:
            return

        accepted = ", ".join(sorted(axes)) or "none"
        raise ConfigError(f"{command} cannot sweep {self.sweep.axis}, accepted axes: {accepted}")

    def at(self, value: float | None) -> "Scenario":
        """Scenario with the swept parameter set to `value`"""

        if value is None or self.sweep is None:
            return self

        market = self.market.model_dump()
        gammas = self.gammas

        match self.sweep.axis:
            case "lambda":
                market["total_rate"] = value
            case "lambda0":
                market["exogenous_rate"] = value
            case "c":
                market["access_price"] = value
            case "c1" | "c2":
                if market["access_prices"] is None:
                    raise ConfigError(f"sweep axis {self.sweep.axis} needs market.access_prices")
                prices = list(market["access_prices"])
                prices[0 if self.sweep.axis == "c1" else 1] = value
                market["access_prices"] = tuple(prices)
            case "gamma1" | "gamma2":
                gammas = list(self.gammas or [1.0] * len(self.market.capacities))
                gammas[0 if self.sweep.axis == "gamma1" else 1] = value
            case "rho_over_beta":
                if value <= 0:
                    raise ConfigError("ρ/β sweep values must be positive")
                market["ad_rate"] = market["repayment"] / value

        try:
            return self.model_copy(update={"market": MarketConfig(**market), "gammas": gammas})
        except ValidationError as e:
            raise ConfigError(f"{self.sweep.axis}={value:g}: {e}") from e

    @property
    def axis_name(self) -> str:
        return self.sweep.axis if self.sweep is not None else "point"

    def csv_path(self, command: str) -> str:
        return self.output.csv or os.path.join(env.OUTPUT_PATH, f"{command}.csv")

    def svg_path(self, command: str) -> str:
        return self.output.svg or os.path.splitext(self.csv_path(command))[0] + ".svg"


def load_scenario(path: str) -> Scenario:
    """Read a JSON scenario, unknown keys are errors"""
    try:
        with open(path, "rb") as f:
            text = f.read().decode("utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario {path}: {e.strerror}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"scenario {path} is not UTF-8 text: byte {e.start} is invalid") from e

    return Scenario.model_validate_json(text)
