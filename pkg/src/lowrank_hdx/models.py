"""Database models for the verification-run ledger."""

from datetime import datetime
from sqlalchemy import Column, Float, ForeignKey, Integer, String, DateTime, Text, create_engine
from sqlalchemy.orm import declarative_base, relationship, sessionmaker

Base = declarative_base()


class VerificationRun(Base):
    """One `hdx verify` invocation."""

    __tablename__ = "verification_runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    config_hash = Column(String(64), nullable=False, index=True)
    suite = Column(String(50), nullable=False)
    seed = Column(Integer, nullable=False)
    started_at = Column(DateTime, nullable=False, default=datetime.utcnow)
    finished_at = Column(DateTime, nullable=True)
    passed = Column(Integer, nullable=False, default=0)
    failed = Column(Integer, nullable=False, default=0)
    skipped = Column(Integer, nullable=False, default=0)

    checks = relationship("CheckResult", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<VerificationRun(suite='{self.suite}', passed={self.passed}, failed={self.failed})>"


class CheckResult(Base):
    """A single check record of a run."""

    __tablename__ = "check_results"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("verification_runs.id"), nullable=False, index=True)
    check_id = Column(String(100), nullable=False)
    anchor = Column(String(255), nullable=False)
    params = Column(Text, nullable=False)  # canonical JSON
    measured = Column(Text, nullable=True)
    bound = Column(Text, nullable=True)
    status = Column(String(20), nullable=False)  # pass / fail / skipped / deviation
    wall_time = Column(Float, nullable=False, default=0.0)

    run = relationship("VerificationRun", back_populates="checks")

    def __repr__(self):
        return f"<CheckResult(check_id='{self.check_id}', status='{self.status}')>"


def get_engine(database_url):
    """Create a database engine."""
    return create_engine(database_url)


def get_session(engine):
    """Create a database session."""
    Session = sessionmaker(bind=engine)
    return Session()


def init_db(database_url):
    """Initialize the database with all tables."""
    engine = get_engine(database_url)
    Base.metadata.create_all(engine)
    return engine
