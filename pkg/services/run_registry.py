import json
import sqlite3
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from models.schemas import MetricsRecord


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunRegistry:
    """SQLite index of the runs in one output directory and their metrics"""

    def __init__(self, db_path: Union[str, Path]):
        self.db_path = str(db_path)
        self._init_db()

    def _init_db(self):
        """Initialize database schema"""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                run_id TEXT PRIMARY KEY,
                command TEXT NOT NULL,
                rule TEXT,
                seed INTEGER,
                config_hash TEXT,
                out_dir TEXT,
                status TEXT NOT NULL,
                created_at TEXT NOT NULL,
                updated_at TEXT NOT NULL,
                metadata TEXT
            )
        """)

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS metrics (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id TEXT NOT NULL,
                epoch INTEGER NOT NULL,
                train_loss REAL,
                train_acc REAL,
                test_acc REAL,
                wall_seconds REAL,
                eta REAL,
                created_at TEXT NOT NULL,
                FOREIGN KEY (run_id) REFERENCES runs(run_id)
            )
        """)

        conn.commit()
        conn.close()

    def create_run(
        self,
        command: str,
        rule: Optional[str] = None,
        seed: Optional[int] = None,
        config_hash: Optional[str] = None,
        out_dir: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None,
        run_id: Optional[str] = None,
    ) -> str:
        """Register a run in state `running`"""
        if not run_id:
            run_id = str(uuid.uuid4())

        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        now = utc_now()

        cursor.execute(
            """INSERT OR REPLACE INTO runs
               (run_id, command, rule, seed, config_hash, out_dir, status, created_at, updated_at, metadata)
               VALUES (?, ?, ?, ?, ?, ?, 'running', ?, ?, ?)""",
            (run_id, command, rule, seed, config_hash, out_dir, now, now, json.dumps(metadata or {})),
        )

        conn.commit()
        conn.close()
        return run_id

    def add_metrics(self, run_id: str, record: MetricsRecord):
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        now = utc_now()

        cursor.execute(
            """INSERT INTO metrics (run_id, epoch, train_loss, train_acc, test_acc, wall_seconds, eta, created_at)
               VALUES (?, ?, ?, ?, ?, ?, ?, ?)""",
            (
                run_id,
                record.epoch,
                record.train_loss,
                record.train_acc,
                record.test_acc,
                record.wall_seconds,
                record.eta,
                now,
            ),
        )
        cursor.execute("UPDATE runs SET updated_at = ? WHERE run_id = ?", (now, run_id))

        conn.commit()
        conn.close()

    def finish_run(self, run_id: str, status: str = "finished"):
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute("UPDATE runs SET status = ?, updated_at = ? WHERE run_id = ?", (status, utc_now(), run_id))
        conn.commit()
        conn.close()

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        runs = [r for r in self.list_runs() if r["run_id"] == run_id]
        return runs[0] if runs else None

    def list_runs(self, command: Optional[str] = None) -> List[Dict[str, Any]]:
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        cursor = conn.cursor()

        if command:
            cursor.execute("SELECT * FROM runs WHERE command = ? ORDER BY created_at", (command,))
        else:
            cursor.execute("SELECT * FROM runs ORDER BY created_at")
        runs = []
        for row in cursor.fetchall():
            run = dict(row)
            run["metadata"] = json.loads(run["metadata"] or "{}")
            runs.append(run)

        conn.close()
        return runs

    def get_metrics(self, run_id: str) -> List[Dict[str, Any]]:
        """Metric rows of a run in epoch order"""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()

        cursor.execute(
            """SELECT epoch, train_loss, train_acc, test_acc, wall_seconds, eta FROM metrics
               WHERE run_id = ? ORDER BY epoch""",
            (run_id,),
        )
        columns = ["epoch", "train_loss", "train_acc", "test_acc", "wall_seconds", "eta"]
        rows = [dict(zip(columns, row)) for row in cursor.fetchall()]

        conn.close()
        return rows

