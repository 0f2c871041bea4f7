from enum import Enum


class DiscreteAction(str, Enum):
    """Sponsor or not sponsor"""

    S = "S"
    N = "N"

    @property
    def gamma(self) -> float:
        """Subsidy factor of the action"""
        return 0.0 if self is DiscreteAction.S else 1.0


class MultiAction(str, Enum):
    """
    Sponsorship decision of a CP facing two ISPs

    - `SN`: sponsor traffic through ISP 1 only.
    - `NS`: sponsor traffic through ISP 2 only.
    - `NN`: sponsor nothing.

    Sponsoring through both ISPs is not an action: a CP contracts with one ISP at most.
    """

    SN = "SN"
    NS = "NS"
    NN = "NN"

    @property
    def gammas(self) -> tuple[float, float]:
        """Subsidy factors `(γ_1j, γ_2j)` on ISP 1 and ISP 2"""
        match self:
            case MultiAction.SN:
                return (0.0, 1.0)
            case MultiAction.NS:
                return (1.0, 0.0)
            case _:
                return (1.0, 1.0)
