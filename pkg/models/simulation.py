from pydantic import BaseModel, ConfigDict, Field

import env


class SimConfig(BaseModel):
    """Queue simulation run"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon: int = Field(1_000_000, ge=1, description="Number of usual arrivals to simulate")
    """Number of usual arrivals"""
    seed: int = Field(env.DEFAULT_SEED, ge=0, le=2**64 - 1, description="Root seed of the random streams")
    """Root seed, split into one stream per random source"""
    warmup_fraction: float = Field(0.1, ge=0.0, lt=1.0, description="Leading fraction of arrivals discarded")
    """Leading fraction of arrivals left out of the statistics"""
