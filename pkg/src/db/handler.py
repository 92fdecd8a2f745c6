import hashlib
import json
from datetime import datetime, timezone

import sqlalchemy as sa
import sqlalchemy.dialects.postgresql as sap
import sqlalchemy.dialects.sqlite as sas

from config.logger import setup_logger

logger = setup_logger(__name__)

REPORT_TABLE = "lab_report"


def report_key(body: dict) -> str:
    """
    SHA-256 of the canonical JSON of a report without its ``meta`` section,
    so reruns of an identical configuration share one row.
    """
    canonical = {k: v for k, v in body.items() if k != "meta"}
    text = json.dumps(canonical, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ReportStore:
    """
    Archive of lab reports in a relational database (SQLite or PostgreSQL).
    """

    def __init__(self, url: str):
        """
        Initialize the store and create its table if missing.

        Args:
            url: SQLAlchemy database URL, e.g. ``sqlite:///reports.db``.
        """
        self.url = url
        self.engine = sa.create_engine(url)
        self.conn = self.engine.connect()
        self.metadata = sa.MetaData()
        self.table = sa.Table(
            REPORT_TABLE,
            self.metadata,
            sa.Column("report_key", sa.String(64), primary_key=True),
            sa.Column("command", sa.String(64), nullable=False),
            sa.Column("passed", sa.Boolean, nullable=False),
            sa.Column("payload", sa.Text, nullable=False),
            sa.Column("tool_version", sa.String(32), nullable=False),
            sa.Column("created_at", sa.DateTime(timezone=True), nullable=False),
        )
        self.metadata.create_all(self.engine)

    def _insert(self):
        dialect = self.engine.dialect.name
        if dialect == "postgresql":
            return sap.insert(self.table)
        if dialect == "sqlite":
            return sas.insert(self.table)
        raise NotImplementedError(f"Upserts are not supported on dialect '{dialect}'.")

    def upsert(self, body: dict) -> str:
        """
        Inserts a report, or refreshes the stored copy of an identical run.

        Args:
            body: Report dictionary as emitted on stdout.

        Returns:
            str: The report key.
        """
        key = report_key(body)
        row = {
            "report_key": key,
            "command": body["command"],
            "passed": bool(body.get("passed", False)),
            "payload": json.dumps(body, sort_keys=True),
            "tool_version": body.get("meta", {}).get("version", ""),
            "created_at": datetime.now(timezone.utc),
        }
        stmt = self._insert().values([row])
        stmt = stmt.on_conflict_do_update(
            index_elements=["report_key"],
            set_={col: stmt.excluded[col] for col in ("payload", "tool_version", "created_at")},
        )
        self.conn.execute(stmt)
        self.conn.commit()
        logger.info("Archived %s report %s", body["command"], key[:12])
        return key

    def select(self, criteria: dict) -> list[dict]:
        """
        Stored reports matching all criteria (column -> value); all if empty.

        Returns:
            list[dict]: Rows as dictionaries, ``payload`` still JSON text.
        """
        stmt = sa.select(self.table).where(
            *[getattr(self.table.c, col) == value for col, value in criteria.items()]
        )
        result = self.conn.execute(stmt)
        return [dict(row._mapping) for row in result]

    def close(self):
        """
        Closes the database connection
        """
        try:
            if self.conn:
                self.conn.close()
        except Exception:
            pass

        try:
            if self.engine:
                self.engine.dispose()
        except Exception:
            pass
