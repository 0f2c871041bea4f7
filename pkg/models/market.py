from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field

ExogenousMode = Literal["noncongesting", "congesting"]
"""
Exogenous traffic mode

- `noncongesting`: exogenous requests are added on top of the Wardrop split and never queue.
- `congesting`: exogenous requests occupy CP capacity, the split is solved on `m_i - λ0(1-γ_i)`.
"""

Gamma = Annotated[float, Field(ge=0.0, le=1.0)]


class MarketBase(BaseModel):
    """Capacities, demand and revenue coefficients shared by the single and two ISP markets"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    capacities: tuple[float, ...] = Field(..., min_length=2, description="Service rate of each CP (requests/unit time)")
    """Service rate `m_i` of each CP"""
    total_rate: float = Field(..., description="Usual request rate λ")
    """Usual request rate `λ`"""
    repayment: float = Field(1.0, description="Negotiated repayment ρ in (0, 1]")
    """Negotiated repayment factor `ρ`"""
    ad_rate: float = Field(1.0, description="Advertisement revenue β per request")
    """Advertisement revenue `β` per unit of traffic"""
    exogenous_rate: float = Field(0.0, description="Exogenous demand λ0 attracted by full sponsorship")
    """Exogenous demand `λ0`"""
    exogenous_mode: ExogenousMode = Field("noncongesting", description="Exogenous traffic mode")
    """Exogenous traffic mode"""

    @property
    def size(self) -> int:
        """Number of CPs"""
        return len(self.capacities)

    @property
    def excess_capacity(self) -> float:
        """Excess service capacity `m̄ = Σ m_i - λ`"""
        return sum(self.capacities) - self.total_rate

    @property
    def prices(self) -> tuple[float, ...]:
        return ()


class MarketParams(MarketBase):
    """Single ISP market"""

    access_price: float = Field(..., description="Access price c per unit of traffic")
    """Access price `c`"""

    @property
    def prices(self) -> tuple[float, ...]:
        return (self.access_price,)


class DuopolyParams(MarketBase):
    """Two ISP market, ISP 1 is the cheaper one"""

    access_prices: tuple[float, float] = Field(..., description="Access prices (c1, c2) of the two ISPs")
    """Access prices `(c1, c2)`"""

    @property
    def prices(self) -> tuple[float, ...]:
        return self.access_prices

    def single_isp(self) -> MarketParams:
        """View of the market through the cheaper ISP, used once each CP's effective price is known"""
        return MarketParams(
            capacities=self.capacities,
            total_rate=self.total_rate,
            repayment=self.repayment,
            ad_rate=self.ad_rate,
            exogenous_rate=self.exogenous_rate,
            exogenous_mode=self.exogenous_mode,
            access_price=self.access_prices[0],
        )


class SponsorshipProfile(BaseModel):
    """Subsidy factor chosen by each CP"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    gammas: tuple[Gamma, ...] = Field(..., min_length=1, description="Subsidy factor γ_i of each CP, 0 = full sponsorship")
    """
    Subsidy factors

    - `0`: the CP sponsors the whole access price (S).
    - `1`: the user pays the whole access price (N).
    """

    @classmethod
    def uniform(cls, size: int, gamma: float) -> "SponsorshipProfile":
        return cls(gammas=(gamma,) * size)
