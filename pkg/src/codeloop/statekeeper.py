"""Snapshots, rollback, and the append-only audit trail.

Storage layout under one data directory:

    snapshots/snap-<id>     full serialized HostState, one file per snapshot
    audit.log               one JSON object per line, seq strictly increasing
    sessions.log            session lifecycle records for crash recovery

Appends are serialized through a single writer lock and flushed line-atomic;
readers re-read the files and therefore always see a consistent prefix. There
is deliberately no update or delete in the audit interface: rollback restores
host state, never history.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from codeloop.hostapp.diffing import StateDiff
from codeloop.hostapp.state import HostState, deserialize_state, serialize_state

TERMINAL_STATUSES = ("succeeded", "failed", "rolled_back")


class StorageError(Exception):
    pass


class UnknownSnapshot(Exception):
    pass


@dataclass
class Snapshot:
    id: int
    state_text: str
    created_at: float
    session_id: str
    iteration_index: int

    def state(self) -> HostState:
        return deserialize_state(self.state_text)


@dataclass
class AuditEntry:
    seq: int
    timestamp: float
    session_id: str
    iteration_index: int
    code_hash: str
    verdict_decision: str
    result_status: str
    snapshot_id: int
    state_diff: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "session_id": self.session_id,
            "iteration_index": self.iteration_index,
            "code_hash": self.code_hash,
            "verdict_decision": self.verdict_decision,
            "result_status": self.result_status,
            "snapshot_id": self.snapshot_id,
            "state_diff": self.state_diff,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuditEntry":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})  # type: ignore[arg-type]

    def diff(self) -> StateDiff:
        return StateDiff.from_list(self.state_diff)


class StateKeeper:
    """Single-writer persistence for snapshots, audit entries, and sessions."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.snapshot_dir = self.data_dir / "snapshots"
        self.audit_path = self.data_dir / "audit.log"
        self.sessions_path = self.data_dir / "sessions.log"
        self._lock = threading.Lock()
        try:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create data directory: {exc}") from exc
        self._next_snapshot_id = self._scan_next_snapshot_id()
        self._next_seq = self._scan_next_seq()

    # --- scanning ---

    def _scan_next_snapshot_id(self) -> int:
        highest = 0
        for path in self.snapshot_dir.glob("snap-*"):
            suffix = path.name.split("-", 1)[1]
            if suffix.isdigit():
                highest = max(highest, int(suffix))
        return highest + 1

    def _scan_next_seq(self) -> int:
        entries = self.read_audit()
        return entries[-1].seq + 1 if entries else 1

    # --- snapshots ---

    def take_snapshot(self, state: HostState, session_id: str, iteration_index: int) -> int:
        with self._lock:
            snapshot_id = self._next_snapshot_id
            self._next_snapshot_id += 1
            payload = {
                "id": snapshot_id,
                "created_at": time.time(),
                "session_id": session_id,
                "iteration_index": iteration_index,
                "state": serialize_state(state),
            }
            path = self.snapshot_dir / f"snap-{snapshot_id}"
            try:
                tmp = path.with_suffix(".tmp")
                tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
                os.replace(tmp, path)
            except OSError as exc:
                raise StorageError(f"cannot write snapshot: {exc}") from exc
        return snapshot_id

    def load_snapshot(self, snapshot_id: int) -> Snapshot:
        path = self.snapshot_dir / f"snap-{snapshot_id}"
        if not path.exists():
            raise UnknownSnapshot(f"no snapshot with id {snapshot_id}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise StorageError(f"cannot read snapshot {snapshot_id}: {exc}") from exc
        return Snapshot(
            id=payload["id"],
            state_text=payload["state"],
            created_at=payload["created_at"],
            session_id=payload["session_id"],
            iteration_index=payload["iteration_index"],
        )

    def snapshot_ids(self) -> list[int]:
        ids = []
        for path in self.snapshot_dir.glob("snap-*"):
            suffix = path.name.split("-", 1)[1]
            if suffix.isdigit():
                ids.append(int(suffix))
        return sorted(ids)

    def rollback(self, snapshot_id: int, session_id: str = "") -> HostState:
        """Restore the snapshotted state; the restoration itself is audited."""
        snapshot = self.load_snapshot(snapshot_id)
        state = snapshot.state()
        self.append_audit(
            session_id=session_id or snapshot.session_id,
            iteration_index=snapshot.iteration_index,
            code_hash="",
            verdict_decision="",
            result_status="rolled_back",
            snapshot_id=snapshot_id,
            state_diff=[],
        )
        return state

    def gc(self, keep_last: int) -> list[int]:
        """Delete all but the newest `keep_last` snapshots; returns deleted ids."""
        if keep_last < 0:
            raise ValueError("keep_last must be >= 0")
        ids = self.snapshot_ids()
        doomed = ids[:-keep_last] if keep_last else ids
        with self._lock:
            for snapshot_id in doomed:
                try:
                    (self.snapshot_dir / f"snap-{snapshot_id}").unlink(missing_ok=True)
                except OSError as exc:
                    raise StorageError(f"cannot delete snapshot {snapshot_id}: {exc}") from exc
        return doomed

    # --- audit log ---

    def append_audit(
        self,
        session_id: str,
        iteration_index: int,
        code_hash: str,
        verdict_decision: str,
        result_status: str,
        snapshot_id: int,
        state_diff: list,
    ) -> AuditEntry:
        with self._lock:
            entry = AuditEntry(
                seq=self._next_seq,
                timestamp=time.time(),
                session_id=session_id,
                iteration_index=iteration_index,
                code_hash=code_hash,
                verdict_decision=verdict_decision,
                result_status=result_status,
                snapshot_id=snapshot_id,
                state_diff=state_diff,
            )
            self._next_seq += 1
            self._append_line(self.audit_path, entry.to_dict())
        return entry

    def _append_line(self, path: Path, payload: dict) -> None:
        try:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(payload, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(f"cannot append to {path.name}: {exc}") from exc

    def read_audit(self) -> list[AuditEntry]:
        return [AuditEntry.from_dict(d) for d in self._read_lines(self.audit_path)]

    def _read_lines(self, path: Path) -> list[dict]:
        if not path.exists():
            return []
        out = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(json.loads(line))
                except ValueError:
                    # a torn final line (crash mid-append) is ignored; every
                    # complete prefix stays readable
                    break
        return out

    def query_audit(
        self,
        session_id: str | None = None,
        seq_from: int | None = None,
        seq_to: int | None = None,
    ) -> list[AuditEntry]:
        entries = self.read_audit()
        if session_id is not None:
            entries = [e for e in entries if e.session_id == session_id]
        if seq_from is not None:
            entries = [e for e in entries if e.seq >= seq_from]
        if seq_to is not None:
            entries = [e for e in entries if e.seq <= seq_to]
        return entries

    # --- session registry (crash recovery) ---

    def record_session_created(self, session_id: str, instruction: str, fixture: str, pre_snapshot: int) -> None:
        with self._lock:
            self._append_line(
                self.sessions_path,
                {
                    "event": "created",
                    "session_id": session_id,
                    "instruction": instruction,
                    "fixture": fixture,
                    "pre_snapshot": pre_snapshot,
                    "timestamp": time.time(),
                },
            )

    def record_session_status(self, session_id: str, status: str) -> None:
        with self._lock:
            self._append_line(
                self.sessions_path,
                {
                    "event": "status",
                    "session_id": session_id,
                    "status": status,
                    "timestamp": time.time(),
                },
            )

    def session_records(self) -> dict[str, dict]:
        """Fold the session log into {id: {instruction, fixture, pre_snapshot, status}}."""
        sessions: dict[str, dict] = {}
        for record in self._read_lines(self.sessions_path):
            sid = record.get("session_id", "")
            if record.get("event") == "created":
                sessions[sid] = {
                    "instruction": record.get("instruction", ""),
                    "fixture": record.get("fixture", ""),
                    "pre_snapshot": record.get("pre_snapshot", 0),
                    "status": "running",
                }
            elif record.get("event") == "status" and sid in sessions:
                sessions[sid]["status"] = record.get("status", "")
        return sessions

    def recover_interrupted_sessions(self) -> list[str]:
        """Mark every non-terminal persisted session as failed; returns their ids."""
        interrupted = [
            sid
            for sid, rec in self.session_records().items()
            if rec["status"] not in TERMINAL_STATUSES
        ]
        for sid in interrupted:
            self.record_session_status(sid, "failed")
        return interrupted
