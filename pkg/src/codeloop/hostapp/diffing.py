"""Path-based structural diff between two host states.

Paths address fields of the serialized state dict, segments joined by "/".
Granularity: dicts are compared per key and equal-length lists per index, so
a lone volume change yields the single entry "player/volume". A list whose
length changed (tab opened, history appended) is reported as one entry whose
before/after carry the whole list; that keeps replaying the diff exact.

An absent `before` means the path was created; an absent `after` means it was
removed. Applying every entry's `after` onto the before-state reproduces the
after-state (see apply_diff), which audit display and rollback tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

from codeloop.hostapp.state import HostState, state_from_dict, state_to_dict


class _Absent:
    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return "<absent>"


ABSENT = _Absent()


@dataclass
class DiffEntry:
    path: str
    before: object  # JSON value or ABSENT
    after: object  # JSON value or ABSENT

    def to_dict(self) -> dict:
        out: dict = {"path": self.path}
        if self.before is not ABSENT:
            out["before"] = self.before
        if self.after is not ABSENT:
            out["after"] = self.after
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DiffEntry":
        return cls(
            path=data["path"],
            before=data["before"] if "before" in data else ABSENT,
            after=data["after"] if "after" in data else ABSENT,
        )


@dataclass
class StateDiff:
    entries: list[DiffEntry]

    def is_empty(self) -> bool:
        return not self.entries

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]

    @classmethod
    def from_list(cls, data: list[dict]) -> "StateDiff":
        return cls(entries=[DiffEntry.from_dict(e) for e in data])


def _collect(before: object, after: object, path: str, out: list[DiffEntry]) -> None:
    if isinstance(before, dict) and isinstance(after, dict):
        for key in sorted(set(before) | set(after)):
            sub = f"{path}/{key}" if path else key
            if key not in before:
                out.append(DiffEntry(sub, ABSENT, after[key]))
            elif key not in after:
                out.append(DiffEntry(sub, before[key], ABSENT))
            else:
                _collect(before[key], after[key], sub, out)
        return
    if isinstance(before, list) and isinstance(after, list) and len(before) == len(after):
        for i, (b, a) in enumerate(zip(before, after)):
            _collect(b, a, f"{path}/{i}" if path else str(i), out)
        return
    if before != after or type(before) is not type(after):
        out.append(DiffEntry(path, before, after))


def diff(before: HostState, after: HostState) -> StateDiff:
    entries: list[DiffEntry] = []
    _collect(state_to_dict(before), state_to_dict(after), "", entries)
    return StateDiff(entries=entries)


def _set_path(root: dict, segments: list[str], value: object) -> None:
    node: object = root
    for seg in segments[:-1]:
        if isinstance(node, list):
            node = node[int(seg)]
        else:
            assert isinstance(node, dict)
            node = node[seg]
    last = segments[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        assert isinstance(node, dict)
        node[last] = value


def _delete_path(root: dict, segments: list[str]) -> None:
    node: object = root
    for seg in segments[:-1]:
        node = node[int(seg)] if isinstance(node, list) else node[seg]
    last = segments[-1]
    if isinstance(node, list):
        node.pop(int(last))
    else:
        assert isinstance(node, dict)
        node.pop(last, None)


def apply_diff(before: HostState, state_diff: StateDiff) -> HostState:
    """Reconstruct the after-state by replaying the diff onto `before`."""
    data = state_to_dict(before)
    for entry in state_diff.entries:
        if entry.after is ABSENT:
            continue
        _set_path(data, entry.path.split("/"), entry.after)
    for entry in state_diff.entries:
        if entry.after is ABSENT:
            _delete_path(data, entry.path.split("/"))
    return state_from_dict(data)
