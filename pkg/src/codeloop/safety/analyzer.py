"""Static rule analysis over the action-code syntax tree.

The walk collects "sites": bridge reads/writes/invokes whose paths are
literal member chains rooted at `app` (or at a const alias of an app chain),
free global references, and unresolvable bridge accesses (chains containing a
computed segment). Each site is matched against the RuleSet first-match-wins;
across sites Deny dominates NeedsApproval dominates Allow.

Statically invisible effects (mutations through arbitrary locals, values
passed into functions) are the dynamic guard's job; the layered soundness
property is "static OR dynamic blocks every violation".
"""

from __future__ import annotations

from dataclasses import dataclass, field

from codeloop.hostapp.bridge import (
    INVOKE,
    NAMESPACES,
    READ,
    WRITE,
    invokable_paths,
    readable_paths,
    writable_paths,
)
from codeloop.sandbox import parser as P
from codeloop.sandbox.executor import ActionCode
from codeloop.safety import rules as R

BRIDGE_ROOT = "app"

# names the interpreter itself provides; they are still matched against
# deny_global rules but are never "undeclared"
BUILTIN_GLOBALS = frozenset(
    {
        "app", "console", "Math", "JSON", "Array", "Object", "Number", "String",
        "Boolean", "parseInt", "parseFloat", "isNaN", "isFinite", "NaN",
        "Infinity", "Error", "TypeError", "RangeError", "undefined", "this",
    }
)


@dataclass(frozen=True)
class Site:
    kind: str  # read | write | invoke | global | dynamic
    path: str  # bridge path, global name, or textual description
    line: int
    col: int


@dataclass
class Verdict:
    decision: str  # Allow | Deny | NeedsApproval
    reasons: list[tuple[str, str]] = field(default_factory=list)  # (reason, "line:col")

    @property
    def allowed(self) -> bool:
        return self.decision == R.ALLOW

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "reasons": [{"reason": reason, "at": at} for reason, at in self.reasons],
        }


class _Scope:
    """Tracks declared names and const aliases of literal app chains."""

    def __init__(self, parent: "_Scope | None" = None):
        self.names: set[str] = set()
        self.aliases: dict[str, str] = {}  # var name -> bridge path prefix
        self.parent = parent

    def declare(self, name: str) -> None:
        self.names.add(name)
        self.aliases.pop(name, None)

    def declare_alias(self, name: str, path: str) -> None:
        self.names.add(name)
        self.aliases[name] = path

    def is_declared(self, name: str) -> bool:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                return True
            scope = scope.parent
        return False

    def alias_of(self, name: str) -> str | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                return scope.aliases.get(name)
            scope = scope.parent
        return None

    def invalidate(self, name: str) -> None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                scope.aliases.pop(name, None)
                return
            scope = scope.parent


class _Collector:
    def __init__(self):
        self.sites: list[Site] = []
        self.seen: set[tuple] = set()

    def add(self, kind: str, path: str, node) -> None:
        key = (kind, path, node.line, node.col)
        if key not in self.seen:
            self.seen.add(key)
            self.sites.append(Site(kind, path, node.line, node.col))


class _OffBridge:
    """A chain that crossed a leaf entry: the continuation is a local value."""

    def __init__(self, base_path: str):
        self.base_path = base_path


def _leaf_paths() -> frozenset[str]:
    return readable_paths() | writable_paths() | invokable_paths()


def _chain_path(node, scope: _Scope) -> object:
    """Resolve a member chain to a bridge path.

    Returns the path string, None when the expression is not bridge-rooted,
    Ellipsis when it is bridge-rooted but has a computed (unresolvable)
    segment, or _OffBridge when the chain continues past a leaf entry (the
    continuation operates on a copied value, not on the bridge).
    """
    if isinstance(node, P.Ident):
        if node.name == BRIDGE_ROOT and not scope.is_declared(BRIDGE_ROOT):
            return BRIDGE_ROOT
        alias = scope.alias_of(node.name)
        return alias  # may be None
    if isinstance(node, P.Member):
        base = _chain_path(node.obj, scope)
        if base is None or base is Ellipsis or isinstance(base, _OffBridge):
            return base
        if base in _leaf_paths():
            return _OffBridge(base)
        if node.computed:
            return Ellipsis
        return f"{base}.{node.prop}"
    return None


class _Walker:
    def __init__(self, collector: _Collector):
        self.out = collector

    # --- statements ---

    def walk_statements(self, statements: list, scope: _Scope) -> None:
        for stmt in statements:
            if isinstance(stmt, P.FunctionDecl):
                scope.declare(stmt.name)
        for stmt in statements:
            self.walk_stmt(stmt, scope)

    def walk_stmt(self, stmt, scope: _Scope) -> None:
        kind = type(stmt)
        if kind is P.ExprStmt:
            self.walk_expr(stmt.expr, scope)
        elif kind is P.VarDecl:
            for name, init in stmt.declarations:
                if init is not None:
                    self.walk_expr(init, scope)
                    path = _chain_path(init, scope) if isinstance(init, (P.Ident, P.Member)) else None
                    if isinstance(path, str) and path in NAMESPACES:
                        scope.declare_alias(name, path)
                        continue
                scope.declare(name)
        elif kind is P.FunctionDecl:
            inner = _Scope(scope)
            for param in stmt.params:
                inner.declare(param)
            self.walk_statements(stmt.body.body, inner)
        elif kind is P.If:
            self.walk_expr(stmt.test, scope)
            self.walk_stmt(stmt.consequent, scope)
            if stmt.alternate is not None:
                self.walk_stmt(stmt.alternate, scope)
        elif kind is P.Block:
            self.walk_statements(stmt.body, _Scope(scope))
        elif kind in (P.While, P.DoWhile):
            self.walk_expr(stmt.test, scope)
            self.walk_stmt(stmt.body, scope)
        elif kind is P.For:
            inner = _Scope(scope)
            if stmt.init is not None:
                self.walk_stmt(stmt.init, inner)
            if stmt.test is not None:
                self.walk_expr(stmt.test, inner)
            if stmt.update is not None:
                self.walk_expr(stmt.update, inner)
            self.walk_stmt(stmt.body, inner)
        elif kind is P.ForOf:
            self.walk_expr(stmt.iterable, scope)
            inner = _Scope(scope)
            inner.declare(stmt.name)
            self.walk_stmt(stmt.body, inner)
        elif kind is P.Return:
            if stmt.arg is not None:
                self.walk_expr(stmt.arg, scope)
        elif kind is P.Throw:
            self.walk_expr(stmt.arg, scope)
        elif kind is P.Try:
            self.walk_statements(stmt.block.body, _Scope(scope))
            if stmt.handler is not None:
                inner = _Scope(scope)
                if stmt.param is not None:
                    inner.declare(stmt.param)
                self.walk_statements(stmt.handler.body, inner)
            if stmt.finalizer is not None:
                self.walk_statements(stmt.finalizer.body, _Scope(scope))
        # Break / Continue / Empty carry nothing

    # --- expressions ---

    def walk_expr(self, node, scope: _Scope) -> None:
        kind = type(node)
        if kind is P.Ident:
            self._reference(node, scope)
        elif kind is P.Member:
            self._member_site(node, scope, READ)
        elif kind is P.Assign:
            if isinstance(node.target, P.Member):
                self._member_site(node.target, scope, WRITE)
            elif isinstance(node.target, P.Ident):
                scope.invalidate(node.target.name)
                if node.op == "=" and scope.is_declared(node.target.name):
                    alias = (
                        _chain_path(node.value, scope)
                        if isinstance(node.value, (P.Ident, P.Member))
                        else None
                    )
                    if isinstance(alias, str) and alias in NAMESPACES:
                        scope.declare_alias(node.target.name, alias)
            self.walk_expr(node.value, scope)
        elif kind is P.Update:
            if isinstance(node.target, P.Member):
                self._member_site(node.target, scope, WRITE)
                self._member_site(node.target, scope, READ)
            elif isinstance(node.target, P.Ident):
                scope.invalidate(node.target.name)
        elif kind is P.Call:
            callee = node.callee
            if isinstance(callee, (P.Ident, P.Member)):
                self._member_site(callee, scope, INVOKE)
            else:
                self.walk_expr(callee, scope)
            for arg in node.args:
                self.walk_expr(arg, scope)
        elif kind is P.New:
            if isinstance(node.callee, (P.Ident, P.Member)):
                self._member_site(node.callee, scope, INVOKE)
            for arg in node.args:
                self.walk_expr(arg, scope)
        elif kind is P.Unary:
            if node.op == "typeof" and isinstance(node.operand, P.Ident):
                return  # typeof probing an undeclared global is not a reference
            self.walk_expr(node.operand, scope)
        elif kind in (P.Binary, P.Logical):
            self.walk_expr(node.left, scope)
            self.walk_expr(node.right, scope)
        elif kind is P.Conditional:
            self.walk_expr(node.test, scope)
            self.walk_expr(node.consequent, scope)
            self.walk_expr(node.alternate, scope)
        elif kind is P.ArrayLit:
            for el in node.elements:
                self.walk_expr(el, scope)
        elif kind is P.ObjectLit:
            for _key, value in node.props:
                self.walk_expr(value, scope)
        elif kind is P.Template:
            for part in node.parts:
                if not isinstance(part, str):
                    self.walk_expr(part, scope)
        elif kind is P.Arrow:
            inner = _Scope(scope)
            for param in node.params:
                inner.declare(param)
            if node.expression:
                self.walk_expr(node.body, inner)
            else:
                self.walk_statements(node.body.body, inner)
        elif kind is P.FunctionExpr:
            inner = _Scope(scope)
            if node.name:
                inner.declare(node.name)
            for param in node.params:
                inner.declare(param)
            self.walk_statements(node.body.body, inner)
        # literals carry nothing

    def _reference(self, node: P.Ident, scope: _Scope) -> None:
        if scope.is_declared(node.name):
            return
        self.out.add("global", node.name, node)

    def _member_site(self, node, scope: _Scope, call_kind: str) -> None:
        """Record the site for a member chain used as read/write/invoke."""
        if isinstance(node, P.Ident):
            if call_kind == INVOKE and not scope.is_declared(node.name):
                self.out.add("global", node.name, node)
            elif call_kind == READ:
                self._reference(node, scope)
            return
        path = _chain_path(node, scope)
        if isinstance(path, str):
            self.out.add(call_kind, path, node)
            return
        if isinstance(path, _OffBridge):
            # the bridge interaction is the read of the leaf; what happens to
            # the returned value afterwards is local
            self.out.add(READ, path.base_path, node)
            if isinstance(node, P.Member) and node.computed:
                self.walk_expr(node.prop, scope)
            return
        if path is Ellipsis:
            self.out.add("dynamic", describe(node), node)
        # walk constituents: computed props, nested expressions, the base object
        if isinstance(node, P.Member):
            self.walk_expr(node.obj, scope)
            if node.computed:
                self.walk_expr(node.prop, scope)


def describe(node) -> str:
    from codeloop.sandbox.interpreter import describe_target

    return describe_target(node)


def collect_sites(program: P.Program) -> list[Site]:
    collector = _Collector()
    _Walker(collector).walk_statements(program.body, _Scope())
    return collector.sites


def analyze(code: ActionCode, rules: R.RuleSet) -> Verdict:
    """Static verdict for one action-code unit under a RuleSet.

    Raises JsSyntaxError when the source does not parse; callers surface that
    before any execution.
    """
    program = P.parse(code.source)
    sites = collect_sites(program)

    deny_reasons: list[tuple[str, str]] = []
    approval_reasons: list[tuple[str, str]] = []

    write_paths: set[str] = set()
    for site in sites:
        at = f"{site.line}:{site.col}"
        if site.kind == "global":
            decision, rule = R.evaluate_global(rules, site.path)
            if decision == R.DENY and rule is not None:
                deny_reasons.append((rule.reason or f"global {site.path} is denied", at))
            continue
        if site.kind == "dynamic":
            if rules.has_restrictions():
                approval_reasons.append(
                    (f"dynamic bridge access ({site.path}) cannot be statically verified", at)
                )
            continue
        if site.kind == WRITE:
            write_paths.add(site.path)
        decision, rule = R.evaluate_path(rules, site.path, site.kind)
        if decision == R.DENY:
            reason = rule.reason if rule and rule.reason else (
                "not allowlisted" if rule else "denied by default"
            )
            deny_reasons.append((f"{site.path}: {reason}", at))
        elif decision == R.NEEDS_APPROVAL:
            reason = rule.reason if rule and rule.reason else "requires approval"
            approval_reasons.append((f"{site.path}: {reason}", at))

    if (
        rules.multi_write_threshold is not None
        and len(write_paths) >= rules.multi_write_threshold
    ):
        approval_reasons.append(
            (
                f"{len(write_paths)} distinct write paths (threshold "
                f"{rules.multi_write_threshold}): {rules.multi_write_reason}",
                "1:1",
            )
        )

    if deny_reasons:
        return Verdict(R.DENY, deny_reasons)
    if approval_reasons:
        return Verdict(R.NEEDS_APPROVAL, approval_reasons)
    return Verdict(R.ALLOW, [])
