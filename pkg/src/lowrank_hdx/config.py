"""Configuration for verification runs."""

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional


class Config:
    """Defaults read from the environment."""

    def __init__(self):
        """Initialize configuration from environment variables."""
        try:
            self.threads = int(os.environ.get("HDX_THREADS", "1"))
        except ValueError:
            raise ValueError("HDX_THREADS must be an integer")

        # Enumeration caps: faces per rank, and matrices per rank level
        try:
            self.cap = int(os.environ.get("HDX_CAP", "10000000"))
        except ValueError:
            raise ValueError("HDX_CAP must be an integer")

        try:
            self.enum_cap = int(os.environ.get("HDX_ENUM_CAP", "100000000"))
        except ValueError:
            raise ValueError("HDX_ENUM_CAP must be an integer")

        try:
            self.seed = int(os.environ.get("HDX_SEED", "0"))
        except ValueError:
            raise ValueError("HDX_SEED must be an integer")

        try:
            self.tol = float(os.environ.get("HDX_TOL", "1e-9"))
        except ValueError:
            raise ValueError("HDX_TOL must be a float")

        # Run ledger (optional)
        self.database_url = os.environ.get("HDX_DATABASE_URL")

        self.report_dir = os.environ.get("HDX_REPORT_DIR", "hdx-reports")

    def __repr__(self):
        """Return a string representation of the config."""
        return (
            f"<Config(threads={self.threads}, cap={self.cap}, "
            f"enum_cap={self.enum_cap}, seed={self.seed}, tol={self.tol}, "
            f"report_dir='{self.report_dir}')>"
        )


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; the report embeds its hash."""

    command: str = "verify"
    suite: str = "all"
    r: int = 1
    b: int = 1
    n: int = 4
    q: int = 16
    m: int = 2
    cap: int = 10_000_000
    enum_cap: int = 100_000_000
    seed: int = 0
    tol: float = 1e-9
    threads: int = 1
    samples: int = 20
    quick: bool = False
    out: Optional[str] = None
    verbosity: int = 0

    @classmethod
    def from_config(cls, config: Config, **overrides) -> "RunConfig":
        base = {
            "cap": config.cap,
            "enum_cap": config.enum_cap,
            "seed": config.seed,
            "tol": config.tol,
            "threads": config.threads,
        }
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def validate(self) -> "RunConfig":
        if self.cap <= 0 or self.enum_cap <= 0:
            raise ValueError("caps must be positive")
        if not 0 < self.tol <= 1e-3:
            raise ValueError("tolerance must lie in (0, 1e-3]")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        return self

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of every field except output and verbosity."""
        fields = self.to_json()
        fields.pop("out")
        fields.pop("verbosity")
        canonical = json.dumps(fields, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()
