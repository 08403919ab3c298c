"""Configuration management for modvoa using pydantic-settings."""

from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from modvoa_core.field import check_prime
from modvoa_heisenberg.fock import ContextError, FockContext


class AlgebraConfig(BaseModel):
    """Parameters (p, d, l, gram, lambda0) of V(l, 0) or M(l, lambda0)."""

    p: int = Field(default=3, description="Characteristic, a prime below 2**20")
    dim: int = Field(default=1, ge=1, description="Dimension d of h")
    level: int = Field(default=1, description="Level l")
    gram: list[int] | list[list[int]] | None = Field(
        default=None, description="Gram matrix: diagonal entries or full rows (default identity)"
    )
    lambda0: list[int] = Field(default_factory=list, description="Zero-mode character")

    @field_validator("p")
    @classmethod
    def _prime(cls, value: int) -> int:
        check_prime(value)
        return value

    @model_validator(mode="after")
    def _context(self) -> "AlgebraConfig":
        try:
            self.to_context()
        except ContextError as exc:
            raise ValueError(str(exc)) from exc
        return self

    def to_context(self) -> FockContext:
        return FockContext.create(self.p, self.dim, self.level, self.gram, self.lambda0)

    @property
    def gram_diagonal(self) -> list[int]:
        ctx = self.to_context()
        return [ctx.g(i, i) for i in ctx.generators()]


class RunConfig(BaseModel):
    """Sizes and seed of a verification run."""

    max_weight: int = Field(default=3, ge=0, description="Largest weight of sampled vectors")
    exhaustive_weight: int = Field(
        default=2, ge=0, description="Total weight bound for exhaustive basis triples"
    )
    pair_radius: int = Field(default=2, ge=0, description="Borcherds (m, n) range is [-r, r]^2")
    mode_window: int = Field(default=2, ge=0, description="Window for mode and series checks")
    samples: int = Field(default=20, ge=0, description="Random samples per randomized check")
    seed: int = Field(default=0, description="Seed for numpy.random.default_rng")


class LogConfig(BaseModel):
    """Configuration for logging."""

    enabled: bool = Field(default=True, description="Enable check logging")
    level: str = Field(default="WARNING", description="Log level")
    format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format string",
    )
    log_file: Path | None = Field(default=None, description="Log file path (optional)")
    log_checks: bool = Field(default=True, description="Record every check outcome")


class VOAConfig(BaseSettings):
    """Main configuration for modvoa runs."""

    model_config = SettingsConfigDict(
        env_prefix="MODVOA_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    algebra: AlgebraConfig = Field(default_factory=AlgebraConfig, description="Algebra")
    run: RunConfig = Field(default_factory=RunConfig, description="Run sizes and seed")
    logging: LogConfig = Field(default_factory=LogConfig, description="Logging configuration")

    @classmethod
    def for_algebra(
        cls,
        p: int,
        dim: int = 1,
        level: int = 1,
        gram: list[int] | list[list[int]] | None = None,
        lambda0: list[int] | None = None,
        **kwargs: Any,
    ) -> "VOAConfig":
        """Create a configuration for the algebra with these parameters."""
        return cls(
            algebra=AlgebraConfig(
                p=p,
                dim=dim,
                level=level,
                gram=gram,
                lambda0=lambda0 or [],
            ),
            **kwargs,
        )

    def to_context(self) -> FockContext:
        return self.algebra.to_context()
