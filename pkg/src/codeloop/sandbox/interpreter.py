"""Tree-walking evaluator for the action-code subset.

Values map onto Python ones: numbers are floats/ints, strings str, arrays
list, plain objects dict, null is None, and undefined is the UNDEFINED
sentinel. The only impure capabilities are the `app` bridge root (every
property read/write/invoke is routed through a BridgeSession, which consults
the dynamic guard first) and `console`, which appends to a bounded buffer.

Execution is budgeted: every AST step counts against the step budget, the
wall deadline is polled on a fixed stride, and console output is capped.
Guard denials and limit hits are not catchable by script-level try/catch.
"""

from __future__ import annotations

import json
import math
import random
import time
from functools import cmp_to_key

from codeloop.hostapp import bridge as hostbridge
from codeloop.hostapp.state import HostState
from codeloop.sandbox import parser as P


class JsUndefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "undefined"

    def __bool__(self) -> bool:
        return False


UNDEFINED = JsUndefined()

_DEADLINE_STRIDE = 2048


# --- control-flow and failure signals ---------------------------------------


class BreakSignal(Exception):
    pass


class ContinueSignal(Exception):
    pass


class ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class JsThrow(Exception):
    """A script-level `throw`; catchable by script try/catch."""

    def __init__(self, value):
        self.value = value


class JsRuntimeError(Exception):
    """TypeError-like / ReferenceError-like failures; catchable in-script."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind  # "TypeError-like" | "ReferenceError-like"
        self.message = message


class GuardDeniedError(Exception):
    """Dynamic rule denial. Aborts the script; never catchable."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class LimitExceededError(Exception):
    """Resource budget exhausted. Aborts the script; never catchable."""

    def __init__(self, what: str, message: str):
        super().__init__(message)
        self.what = what  # "wall" | "steps" | "output"
        self.message = message


def type_error(message: str) -> JsRuntimeError:
    return JsRuntimeError("TypeError-like", message)


def reference_error(message: str) -> JsRuntimeError:
    return JsRuntimeError("ReferenceError-like", message)


# --- runtime object kinds -----------------------------------------------------


class JsError:
    def __init__(self, name: str, message: str):
        self.name = name
        self.message = message

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"{self.name}: {self.message}"


class ErrorCtor:
    def __init__(self, name: str):
        self.name = name

    def construct(self, args: list) -> JsError:
        message = js_to_string(args[0]) if args else ""
        return JsError(self.name, message)


class JsFunction:
    def __init__(self, name: str | None, params: list, body, env: "Environment", is_arrow: bool, expression: bool = False):
        self.name = name or ""
        self.params = params
        self.body = body
        self.env = env
        self.is_arrow = is_arrow
        self.expression = expression


class NativeFunction:
    def __init__(self, name: str, fn):
        self.name = name
        self.fn = fn


class HostNamespace:
    """A node of the bridge root; property traffic flows through the session."""

    def __init__(self, path: str, session: "BridgeSession"):
        self.path = path
        self.session = session

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"[bridge {self.path}]"


class UiHandle:
    """Handle over one UI node; click() is a bridge invoke."""

    def __init__(self, data: dict, session: "BridgeSession"):
        self.data = data
        self.session = session


class BridgeSession:
    """Mediates every bridge call of one execution against a working state.

    The guard is consulted before the surface is even resolved, so deny rules
    fire for paths that do not exist (and for read-only paths) alike.
    """

    def __init__(self, state: HostState, guard=None):
        self.state = state
        self.guard = guard
        self.calls: list[hostbridge.BridgeCall] = []

    def precheck(self, call: hostbridge.BridgeCall) -> None:
        if self.guard is None:
            return
        allowed, reason = self.guard(call)
        if not allowed:
            raise GuardDeniedError(reason)

    def perform(self, call: hostbridge.BridgeCall):
        self.precheck(call)
        self.calls.append(call)
        try:
            return hostbridge.apply_call(self.state, call)
        except hostbridge.UnknownPath as exc:
            raise type_error(str(exc)) from None
        except (hostbridge.ArityError, hostbridge.ArgumentTypeError, hostbridge.DomainError) as exc:
            raise JsThrow(JsError("Error", str(exc))) from None

    def read(self, path: str):
        return self.perform(hostbridge.BridgeCall(path, hostbridge.READ, []))

    def write(self, path: str, value):
        return self.perform(hostbridge.BridgeCall(path, hostbridge.WRITE, [value]))

    def invoke(self, path: str, args: list):
        return self.perform(hostbridge.BridgeCall(path, hostbridge.INVOKE, args))


# --- value helpers -------------------------------------------------------------


def js_type(value) -> str:
    if value is UNDEFINED:
        return "undefined"
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "array"
    if isinstance(value, (JsFunction, NativeFunction, ErrorCtor)):
        return "function"
    return "object"


def js_truthy(value) -> bool:
    if value is UNDEFINED or value is None:
        return False
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return not (value == 0 or (isinstance(value, float) and math.isnan(value)))
    if isinstance(value, str):
        return len(value) > 0
    return True  # arrays, objects, functions, host objects


def format_number(value) -> str:
    if isinstance(value, bool):  # pragma: no cover - guarded by callers
        return "true" if value else "false"
    f = float(value)
    if math.isnan(f):
        return "NaN"
    if math.isinf(f):
        return "Infinity" if f > 0 else "-Infinity"
    if f == int(f) and abs(f) < 1e21:
        return str(int(f))
    return f"{f:.12g}"


def js_to_string(value) -> str:
    if value is UNDEFINED:
        return "undefined"
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return format_number(value)
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return ",".join("" if v is UNDEFINED or v is None else js_to_string(v) for v in value)
    if isinstance(value, JsError):
        return f"{value.name}: {value.message}" if value.message else value.name
    if isinstance(value, (JsFunction, NativeFunction)):
        return f"[function {getattr(value, 'name', '')}]"
    if isinstance(value, HostNamespace):
        return f"[bridge {value.path}]"
    if isinstance(value, UiHandle):
        return f"[UiNode {value.data['id']}]"
    return "[object Object]"


def js_to_number(value) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, (int, float)):
        return float(value)
    if value is None:
        return 0.0
    if value is UNDEFINED:
        return math.nan
    if isinstance(value, str):
        s = value.strip()
        if s == "":
            return 0.0
        try:
            return float(s)
        except ValueError:
            return math.nan
    return math.nan


def display_value(value, nested: bool = False) -> str:
    """console.log rendering. Top-level strings print raw, nested ones quoted."""
    if isinstance(value, str):
        return f"'{value}'" if nested else value
    if isinstance(value, list):
        return "[" + ", ".join(display_value(v, nested=True) for v in value) + "]"
    if isinstance(value, dict):
        inner = ", ".join(f"{k}: {display_value(v, nested=True)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, UiHandle):
        d = value.data
        return f"[UiNode {d['kind']} '{d['label']}']"
    return js_to_string(value)


def strict_equals(a, b) -> bool:
    ta, tb = js_type(a), js_type(b)
    if ta != tb:
        return False
    if ta == "number":
        fa, fb = float(a), float(b)
        if math.isnan(fa) or math.isnan(fb):
            return False
        return fa == fb
    if ta in ("undefined", "null"):
        return True
    if ta in ("boolean", "string"):
        return a == b
    return a is b  # arrays, objects, functions, host objects: identity


def loose_equals(a, b) -> bool:
    ta, tb = js_type(a), js_type(b)
    if ta == tb:
        return strict_equals(a, b)
    nullish = ("null", "undefined")
    if ta in nullish and tb in nullish:
        return True
    if ta == "number" and tb == "string":
        return not math.isnan(js_to_number(b)) and float(a) == js_to_number(b)
    if ta == "string" and tb == "number":
        return loose_equals(b, a)
    if ta == "boolean":
        return loose_equals(js_to_number(a), b)
    if tb == "boolean":
        return loose_equals(a, js_to_number(b))
    return False


def to_plain(value, depth: int = 0):
    """Convert an interpreter value into plain JSON-ish data for the bridge."""
    if depth > 16:
        raise type_error("value is nested too deeply for a bridge call")
    if value is UNDEFINED:
        return None
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, list):
        return [to_plain(v, depth + 1) for v in value]
    if isinstance(value, dict):
        return {k: to_plain(v, depth + 1) for k, v in value.items()}
    if isinstance(value, UiHandle):
        return value.data["id"]
    raise type_error(f"a {js_type(value)} value cannot cross the bridge")


def to_jsonable(value, depth: int = 0):
    """Serialize a result value for ExecutionResult.return_value."""
    if depth > 16:
        return "<deep>"
    if value is UNDEFINED:
        return None
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, list):
        return [to_jsonable(v, depth + 1) for v in value]
    if isinstance(value, dict):
        return {k: to_jsonable(v, depth + 1) for k, v in value.items()}
    if isinstance(value, UiHandle):
        return dict(value.data)
    if isinstance(value, JsError):
        return f"{value.name}: {value.message}"
    return js_to_string(value)


# --- environment ---------------------------------------------------------------


class Environment:
    __slots__ = ("vars", "consts", "parent")

    def __init__(self, parent: "Environment | None" = None):
        self.vars: dict = {}
        self.consts: set = set()
        self.parent = parent

    def declare(self, name: str, value, const: bool = False) -> None:
        self.vars[name] = value
        if const:
            self.consts.add(name)

    def lookup(self, name: str):
        env: Environment | None = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        raise reference_error(f"{name} is not defined")

    def has(self, name: str) -> bool:
        env: Environment | None = self
        while env is not None:
            if name in env.vars:
                return True
            env = env.parent
        return False

    def assign(self, name: str, value) -> None:
        env: Environment | None = self
        while env is not None:
            if name in env.vars:
                if name in env.consts:
                    raise type_error(f"Assignment to constant variable '{name}'")
                env.vars[name] = value
                return
            env = env.parent
        raise reference_error(f"{name} is not defined")


# --- interpreter -----------------------------------------------------------------


class Interpreter:
    def __init__(
        self,
        session: BridgeSession,
        step_budget: int,
        deadline: float,
        output_budget: int,
    ):
        self.session = session
        self.step_budget = step_budget
        self.deadline = deadline
        self.output_budget = output_budget
        self.steps = 0
        self.console: list[str] = []
        self.console_bytes = 0
        self.rng = random.Random(0xC0DE)
        self.globals = self._build_globals()

    # --- budgets ---

    def _step(self) -> None:
        self.steps += 1
        if self.steps > self.step_budget:
            raise LimitExceededError("steps", f"step budget of {self.step_budget} exhausted")
        if self.steps % _DEADLINE_STRIDE == 0 and time.monotonic() > self.deadline:
            raise LimitExceededError("wall", "wall-clock timeout exceeded")

    def _console_write(self, line: str) -> None:
        self.console_bytes += len(line.encode("utf-8")) + 1
        if self.console_bytes > self.output_budget:
            raise LimitExceededError("output", f"console output budget of {self.output_budget} bytes exhausted")
        self.console.append(line)

    # --- globals ---

    def _build_globals(self) -> dict:
        def log(args):
            self._console_write(" ".join(display_value(a) for a in args))
            return UNDEFINED

        console = {
            "log": NativeFunction("log", log),
            "error": NativeFunction("error", log),
            "warn": NativeFunction("warn", log),
            "info": NativeFunction("info", log),
        }

        math_obj = {
            "min": NativeFunction("min", lambda a: min((js_to_number(x) for x in a), default=math.inf)),
            "max": NativeFunction("max", lambda a: max((js_to_number(x) for x in a), default=-math.inf)),
            "abs": NativeFunction("abs", lambda a: abs(js_to_number(a[0])) if a else math.nan),
            "floor": NativeFunction("floor", lambda a: float(math.floor(js_to_number(a[0]))) if a else math.nan),
            "ceil": NativeFunction("ceil", lambda a: float(math.ceil(js_to_number(a[0]))) if a else math.nan),
            "round": NativeFunction("round", lambda a: float(math.floor(js_to_number(a[0]) + 0.5)) if a else math.nan),
            "trunc": NativeFunction("trunc", lambda a: float(math.trunc(js_to_number(a[0]))) if a else math.nan),
            "sqrt": NativeFunction("sqrt", lambda a: math.sqrt(js_to_number(a[0])) if a and js_to_number(a[0]) >= 0 else math.nan),
            "pow": NativeFunction("pow", lambda a: js_to_number(a[0]) ** js_to_number(a[1]) if len(a) >= 2 else math.nan),
            "sign": NativeFunction("sign", lambda a: math.copysign(1.0, js_to_number(a[0])) if a and js_to_number(a[0]) != 0 else 0.0),
            "random": NativeFunction("random", lambda a: self.rng.random()),
            "PI": math.pi,
            "E": math.e,
        }

        def json_stringify(args):
            if not args:
                return UNDEFINED
            indent = None
            if len(args) >= 3 and isinstance(args[2], (int, float)) and not isinstance(args[2], bool):
                indent = int(args[2])
            try:
                return json.dumps(to_jsonable(args[0]), indent=indent, ensure_ascii=False)
            except (TypeError, ValueError) as exc:
                raise JsThrow(JsError("TypeError", f"JSON.stringify failed: {exc}")) from None

        def json_parse(args):
            if not args or not isinstance(args[0], str):
                raise JsThrow(JsError("SyntaxError", "JSON.parse expects a string"))
            try:
                return json.loads(args[0])
            except ValueError as exc:
                raise JsThrow(JsError("SyntaxError", f"JSON.parse: {exc}")) from None

        json_obj = {
            "stringify": NativeFunction("stringify", json_stringify),
            "parse": NativeFunction("parse", json_parse),
        }

        def parse_int(args):
            if not args:
                return math.nan
            text = js_to_string(args[0]).strip()
            radix = int(js_to_number(args[1])) if len(args) > 1 and js_truthy(args[1]) else 10
            sign = 1
            if text[:1] in "+-":
                sign = -1 if text[0] == "-" else 1
                text = text[1:]
            digits = "0123456789abcdefghijklmnopqrstuvwxyz"[:radix]
            acc = ""
            for ch in text.lower():
                if ch in digits:
                    acc += ch
                else:
                    break
            if not acc:
                return math.nan
            return float(sign * int(acc, radix))

        def parse_float(args):
            if not args:
                return math.nan
            text = js_to_string(args[0]).strip()
            best = math.nan
            for end in range(len(text), 0, -1):
                try:
                    best = float(text[:end])
                    break
                except ValueError:
                    continue
            return best

        def array_is_array(args):
            return bool(args) and isinstance(args[0], list)

        array_obj = {"isArray": NativeFunction("isArray", array_is_array)}

        object_obj = {
            "keys": NativeFunction("keys", lambda a: list(a[0].keys()) if a and isinstance(a[0], dict) else []),
            "values": NativeFunction("values", lambda a: list(a[0].values()) if a and isinstance(a[0], dict) else []),
            "entries": NativeFunction(
                "entries",
                lambda a: [[k, v] for k, v in a[0].items()] if a and isinstance(a[0], dict) else [],
            ),
        }

        number_obj = {
            "isInteger": NativeFunction(
                "isInteger",
                lambda a: bool(a)
                and isinstance(a[0], (int, float))
                and not isinstance(a[0], bool)
                and float(a[0]).is_integer(),
            ),
            "isFinite": NativeFunction(
                "isFinite",
                lambda a: bool(a)
                and isinstance(a[0], (int, float))
                and not isinstance(a[0], bool)
                and math.isfinite(float(a[0])),
            ),
            "parseFloat": NativeFunction("parseFloat", parse_float),
            "parseInt": NativeFunction("parseInt", parse_int),
        }

        return {
            "app": HostNamespace("app", self.session),
            "console": console,
            "Math": math_obj,
            "JSON": json_obj,
            "Array": array_obj,
            "Object": object_obj,
            "Number": number_obj,
            "String": NativeFunction("String", lambda a: js_to_string(a[0]) if a else ""),
            "Boolean": NativeFunction("Boolean", lambda a: js_truthy(a[0]) if a else False),
            "parseInt": NativeFunction("parseInt", parse_int),
            "parseFloat": NativeFunction("parseFloat", parse_float),
            "isNaN": NativeFunction("isNaN", lambda a: math.isnan(js_to_number(a[0])) if a else True),
            "isFinite": NativeFunction("isFinite", lambda a: math.isfinite(js_to_number(a[0])) if a else False),
            "NaN": math.nan,
            "Infinity": math.inf,
            "Error": ErrorCtor("Error"),
            "TypeError": ErrorCtor("TypeError"),
            "RangeError": ErrorCtor("RangeError"),
        }

    # --- program -----------------------------------------------------------

    def run(self, program: P.Program):
        env = Environment()
        return self.exec_statements(program.body, env)

    def exec_statements(self, statements: list, env: Environment):
        completion = UNDEFINED
        for stmt in statements:
            if isinstance(stmt, P.FunctionDecl):
                env.declare(stmt.name, JsFunction(stmt.name, stmt.params, stmt.body, env, is_arrow=False))
        for stmt in statements:
            value = self.exec_stmt(stmt, env)
            if not isinstance(stmt, (P.FunctionDecl, P.Empty)):
                completion = value
        return completion

    def exec_stmt(self, stmt, env: Environment):
        self._step()
        kind = type(stmt)
        if kind is P.ExprStmt:
            return self.eval(stmt.expr, env)
        if kind is P.VarDecl:
            for name, init in stmt.declarations:
                value = self.eval(init, env) if init is not None else UNDEFINED
                env.declare(name, value, const=stmt.kind == "const")
            return UNDEFINED
        if kind is P.FunctionDecl:
            return UNDEFINED  # hoisted by exec_statements
        if kind is P.If:
            if js_truthy(self.eval(stmt.test, env)):
                return self.exec_stmt(stmt.consequent, env)
            if stmt.alternate is not None:
                return self.exec_stmt(stmt.alternate, env)
            return UNDEFINED
        if kind is P.Block:
            return self.exec_statements(stmt.body, Environment(env))
        if kind is P.While:
            while js_truthy(self.eval(stmt.test, env)):
                self._step()
                try:
                    self.exec_stmt(stmt.body, env)
                except BreakSignal:
                    break
                except ContinueSignal:
                    continue
            return UNDEFINED
        if kind is P.DoWhile:
            while True:
                self._step()
                try:
                    self.exec_stmt(stmt.body, env)
                except BreakSignal:
                    break
                except ContinueSignal:
                    pass
                if not js_truthy(self.eval(stmt.test, env)):
                    break
            return UNDEFINED
        if kind is P.For:
            loop_env = Environment(env)
            if stmt.init is not None:
                self.exec_stmt(stmt.init, loop_env)
            while stmt.test is None or js_truthy(self.eval(stmt.test, loop_env)):
                self._step()
                try:
                    self.exec_stmt(stmt.body, loop_env)
                except BreakSignal:
                    break
                except ContinueSignal:
                    pass
                if stmt.update is not None:
                    self.eval(stmt.update, loop_env)
            else:
                return UNDEFINED
            return UNDEFINED
        if kind is P.ForOf:
            iterable = self.eval(stmt.iterable, env)
            if isinstance(iterable, str):
                items = list(iterable)
            elif isinstance(iterable, list):
                items = list(iterable)
            else:
                raise type_error(f"{js_type(iterable)} is not iterable")
            for item in items:
                self._step()
                iter_env = Environment(env)
                iter_env.declare(stmt.name, item, const=stmt.kind == "const")
                try:
                    self.exec_stmt(stmt.body, iter_env)
                except BreakSignal:
                    break
                except ContinueSignal:
                    continue
            return UNDEFINED
        if kind is P.Return:
            raise ReturnSignal(self.eval(stmt.arg, env) if stmt.arg is not None else UNDEFINED)
        if kind is P.Break:
            raise BreakSignal()
        if kind is P.Continue:
            raise ContinueSignal()
        if kind is P.Throw:
            raise JsThrow(self.eval(stmt.arg, env))
        if kind is P.Try:
            try:
                self.exec_statements(stmt.block.body, Environment(env))
            except (JsThrow, JsRuntimeError) as exc:
                if stmt.handler is not None:
                    handler_env = Environment(env)
                    if stmt.param is not None:
                        handler_env.declare(stmt.param, self._catch_value(exc))
                    self.exec_statements(stmt.handler.body, handler_env)
                elif stmt.finalizer is None:
                    raise
                else:
                    self.exec_statements(stmt.finalizer.body, Environment(env))
                    raise
            finally:
                if stmt.finalizer is not None and stmt.handler is not None:
                    self.exec_statements(stmt.finalizer.body, Environment(env))
            if stmt.finalizer is not None and stmt.handler is None:
                self.exec_statements(stmt.finalizer.body, Environment(env))
            return UNDEFINED
        if kind is P.Empty:
            return UNDEFINED
        raise type_error(f"unsupported statement {kind.__name__}")  # pragma: no cover

    @staticmethod
    def _catch_value(exc):
        if isinstance(exc, JsThrow):
            return exc.value
        name = "TypeError" if exc.kind == "TypeError-like" else "ReferenceError"
        return JsError(name, exc.message)

    # --- expressions --------------------------------------------------------

    def eval(self, node, env: Environment):
        self._step()
        kind = type(node)
        if kind is P.Num:
            return node.value
        if kind is P.Str:
            return node.value
        if kind is P.Bool:
            return node.value
        if kind is P.Null:
            return None
        if kind is P.Undef:
            return UNDEFINED
        if kind is P.Ident:
            if env.has(node.name):
                return env.lookup(node.name)
            if node.name in self.globals:
                return self.globals[node.name]
            raise reference_error(f"{node.name} is not defined")
        if kind is P.Template:
            out = []
            for part in node.parts:
                out.append(part if isinstance(part, str) else js_to_string(self.eval(part, env)))
            return "".join(out)
        if kind is P.ArrayLit:
            return [self.eval(e, env) for e in node.elements]
        if kind is P.ObjectLit:
            return {key: self.eval(value, env) for key, value in node.props}
        if kind is P.Member:
            obj = self.eval(node.obj, env)
            if node.optional and (obj is UNDEFINED or obj is None):
                return UNDEFINED
            prop = js_to_string(self.eval(node.prop, env)) if node.computed else node.prop
            return self.get_member(obj, prop, describe_target(node.obj))
        if kind is P.Call:
            return self.eval_call(node, env)
        if kind is P.New:
            callee = self.eval(node.callee, env)
            args = [self.eval(a, env) for a in node.args]
            if isinstance(callee, ErrorCtor):
                return callee.construct(args)
            raise type_error(f"{describe_target(node.callee)} is not a constructor")
        if kind is P.Unary:
            if node.op == "typeof":
                if isinstance(node.operand, P.Ident):
                    name = node.operand.name
                    if not env.has(name) and name not in self.globals:
                        return "undefined"
                value = self.eval(node.operand, env)
                t = js_type(value)
                return {"array": "object", "null": "object"}.get(t, t)
            value = self.eval(node.operand, env)
            if node.op == "!":
                return not js_truthy(value)
            if node.op == "-":
                return -js_to_number(value)
            return js_to_number(value)  # unary +
        if kind is P.Update:
            old = js_to_number(self.eval_target(node.target, env))
            new = old + 1 if node.op == "++" else old - 1
            self.assign_target(node.target, new, env)
            return new if node.prefix else old
        if kind is P.Logical:
            left = self.eval(node.left, env)
            if node.op == "&&":
                return self.eval(node.right, env) if js_truthy(left) else left
            if node.op == "||":
                return left if js_truthy(left) else self.eval(node.right, env)
            # nullish coalescing
            return self.eval(node.right, env) if left is UNDEFINED or left is None else left
        if kind is P.Binary:
            return self.eval_binary(node, env)
        if kind is P.Conditional:
            return self.eval(node.consequent if js_truthy(self.eval(node.test, env)) else node.alternate, env)
        if kind is P.Assign:
            if node.op == "=":
                value = self.eval(node.value, env)
            else:
                current = self.eval_target(node.target, env)
                operand = self.eval(node.value, env)
                value = self.apply_binary_op(node.op[:-1], current, operand)
            self.assign_target(node.target, value, env)
            return value
        if kind is P.Arrow:
            return JsFunction(None, node.params, node.body, env, is_arrow=True, expression=node.expression)
        if kind is P.FunctionExpr:
            return JsFunction(node.name, node.params, node.body, env, is_arrow=False)
        raise type_error(f"unsupported expression {kind.__name__}")  # pragma: no cover

    def eval_target(self, target, env: Environment):
        if isinstance(target, P.Ident):
            if env.has(target.name):
                return env.lookup(target.name)
            if target.name in self.globals:
                return self.globals[target.name]
            raise reference_error(f"{target.name} is not defined")
        assert isinstance(target, P.Member)
        obj = self.eval(target.obj, env)
        prop = js_to_string(self.eval(target.prop, env)) if target.computed else target.prop
        return self.get_member(obj, prop, describe_target(target.obj))

    def assign_target(self, target, value, env: Environment) -> None:
        if isinstance(target, P.Ident):
            env.assign(target.name, value)
            return
        assert isinstance(target, P.Member)
        obj = self.eval(target.obj, env)
        prop = js_to_string(self.eval(target.prop, env)) if target.computed else target.prop
        self.set_member(obj, prop, value, describe_target(target.obj))

    def eval_binary(self, node, env: Environment):
        left = self.eval(node.left, env)
        right = self.eval(node.right, env)
        return self.apply_binary_op(node.op, left, right)

    def apply_binary_op(self, op: str, left, right):
        if op == "+":
            if isinstance(left, str) or isinstance(right, str):
                return js_to_string(left) + js_to_string(right)
            if isinstance(left, list) or isinstance(right, list):
                return js_to_string(left) + js_to_string(right)
            return js_to_number(left) + js_to_number(right)
        if op == "-":
            return js_to_number(left) - js_to_number(right)
        if op == "*":
            return js_to_number(left) * js_to_number(right)
        if op == "/":
            rn = js_to_number(right)
            ln = js_to_number(left)
            if rn == 0:
                if math.isnan(ln) or ln == 0:
                    return math.nan
                return math.inf if (ln > 0) == (math.copysign(1, rn) > 0) else -math.inf
            return ln / rn
        if op == "%":
            rn = js_to_number(right)
            ln = js_to_number(left)
            if rn == 0 or math.isnan(ln) or math.isnan(rn) or math.isinf(ln):
                return math.nan
            return math.fmod(ln, rn)
        if op == "**":
            return js_to_number(left) ** js_to_number(right)
        if op == "===":
            return strict_equals(left, right)
        if op == "!==":
            return not strict_equals(left, right)
        if op == "==":
            return loose_equals(left, right)
        if op == "!=":
            return not loose_equals(left, right)
        if op in ("<", "<=", ">", ">="):
            if isinstance(left, str) and isinstance(right, str):
                pass
            else:
                left, right = js_to_number(left), js_to_number(right)
                if math.isnan(left) or math.isnan(right):
                    return False
            if op == "<":
                return left < right
            if op == "<=":
                return left <= right
            if op == ">":
                return left > right
            return left >= right
        raise type_error(f"unsupported operator {op!r}")  # pragma: no cover

    # --- calls ----------------------------------------------------------------

    def eval_call(self, node: P.Call, env: Environment):
        callee = node.callee
        if isinstance(callee, P.Member):
            obj = self.eval(callee.obj, env)
            if callee.optional and (obj is UNDEFINED or obj is None):
                return UNDEFINED
            prop = js_to_string(self.eval(callee.prop, env)) if callee.computed else callee.prop
            desc = f"{describe_target(callee.obj)}.{prop}"
            fn = self.get_member(obj, prop, describe_target(callee.obj))
            args = [self.eval(a, env) for a in node.args]
            if node.optional and (fn is UNDEFINED or fn is None):
                return UNDEFINED
            return self.call_value(fn, args, desc, this=obj)
        fn = self.eval(callee, env)
        args = [self.eval(a, env) for a in node.args]
        if node.optional and (fn is UNDEFINED or fn is None):
            return UNDEFINED
        return self.call_value(fn, args, describe_target(callee))

    def call_value(self, fn, args: list, desc: str, this=None):
        self._step()
        if isinstance(fn, NativeFunction):
            return fn.fn(args)
        if isinstance(fn, ErrorCtor):
            return fn.construct(args)
        if isinstance(fn, JsFunction):
            call_env = Environment(fn.env)
            for i, param in enumerate(fn.params):
                call_env.declare(param, args[i] if i < len(args) else UNDEFINED)
            if not fn.is_arrow and this is not None:
                call_env.declare("this", this)
            if fn.is_arrow and fn.expression:
                return self.eval(fn.body, call_env)
            try:
                self.exec_statements(fn.body.body, call_env)
            except ReturnSignal as ret:
                return ret.value
            return UNDEFINED
        raise type_error(f"{desc} is not a function")

    # --- member access ----------------------------------------------------------

    def get_member(self, obj, prop: str, owner_desc: str):
        if obj is UNDEFINED or obj is None:
            where = "undefined" if obj is UNDEFINED else "null"
            raise type_error(f"Cannot read property '{prop}' of {where}")
        if isinstance(obj, HostNamespace):
            return self._host_get(obj, prop)
        if isinstance(obj, UiHandle):
            return self._handle_get(obj, prop)
        if isinstance(obj, str):
            return self._string_member(obj, prop)
        if isinstance(obj, list):
            return self._array_member(obj, prop)
        if isinstance(obj, dict):
            return obj.get(prop, UNDEFINED)
        if isinstance(obj, JsError):
            if prop == "name":
                return obj.name
            if prop == "message":
                return obj.message
            if prop == "stack":
                return f"{obj.name}: {obj.message}"
            if prop == "toString":
                return NativeFunction("toString", lambda a: js_to_string(obj))
            return UNDEFINED
        if isinstance(obj, bool):
            return UNDEFINED
        if isinstance(obj, (int, float)):
            return self._number_member(float(obj), prop)
        return UNDEFINED

    def set_member(self, obj, prop: str, value, owner_desc: str) -> None:
        if obj is UNDEFINED or obj is None:
            where = "undefined" if obj is UNDEFINED else "null"
            raise type_error(f"Cannot set property '{prop}' of {where}")
        if isinstance(obj, HostNamespace):
            self._host_set(obj, prop, value)
            return
        if isinstance(obj, dict):
            obj[prop] = value
            return
        if isinstance(obj, list):
            if prop.lstrip("-").isdigit():
                idx = int(prop)
                if idx < 0:
                    raise type_error(f"invalid array index {idx}")
                while len(obj) <= idx:
                    obj.append(UNDEFINED)
                obj[idx] = value
                return
            raise type_error(f"Cannot set property '{prop}' on an array")
        raise type_error(f"Cannot set property '{prop}' on a {js_type(obj)} value")

    # --- host bridge ---

    def _host_get(self, ns: HostNamespace, prop: str):
        full = f"{ns.path}.{prop}"
        if full in hostbridge.NAMESPACES:
            return HostNamespace(full, ns.session)
        if full in hostbridge.readable_paths():
            value = ns.session.read(full)
            if full == "app.editor.activeDocument.paragraphs":
                return list(value)
            return value
        if full in hostbridge.invokable_paths():
            def invoke(args, _full=full):
                plain = [to_plain(a) for a in args]
                result = ns.session.invoke(_full, plain)
                if _full == "app.ui.find":
                    return [UiHandle(d, ns.session) for d in result]
                return result

            return NativeFunction(prop, invoke)
        return UNDEFINED

    def _host_set(self, ns: HostNamespace, prop: str, value) -> None:
        full = f"{ns.path}.{prop}"
        if full in hostbridge.writable_paths():
            ns.session.write(full, to_plain(value))
            return
        # guard still sees the attempt (deny rules fire before this tier)
        call = hostbridge.BridgeCall(full, hostbridge.WRITE, [None])
        ns.session.precheck(call)
        if full in hostbridge.NAMESPACES or full in hostbridge.readable_paths() or full in hostbridge.invokable_paths():
            raise type_error(f"Cannot assign to read-only property '{prop}' of {ns.path}")
        raise type_error(f"Cannot add property {prop}, object {ns.path} is not extensible")

    def _handle_get(self, handle: UiHandle, prop: str):
        if prop in ("id", "kind", "label", "route"):
            value = handle.data.get(prop)
            return UNDEFINED if prop == "route" and value is None else value
        if prop == "click":
            def click(args, _handle=handle):
                return _handle.session.invoke("app.ui.click", [_handle.data["id"]])

            return NativeFunction("click", click)
        return UNDEFINED

    # --- built-in members ---

    def _string_member(self, s: str, prop: str):
        if prop == "length":
            return float(len(s))
        if prop.lstrip("-").isdigit():
            idx = int(prop)
            return s[idx] if 0 <= idx < len(s) else UNDEFINED

        def need_str(args, i=0, default=""):
            return js_to_string(args[i]) if len(args) > i else default

        methods = {
            "toLowerCase": lambda a: s.lower(),
            "toUpperCase": lambda a: s.upper(),
            "trim": lambda a: s.strip(),
            "includes": lambda a: need_str(a) in s,
            "startsWith": lambda a: s.startswith(need_str(a)),
            "endsWith": lambda a: s.endswith(need_str(a)),
            "indexOf": lambda a: float(s.find(need_str(a))),
            "lastIndexOf": lambda a: float(s.rfind(need_str(a))),
            "charAt": lambda a: s[int(js_to_number(a[0]))] if a and 0 <= int(js_to_number(a[0])) < len(s) else "",
            "slice": lambda a: _slice_seq(s, a),
            "substring": lambda a: _substring(s, a),
            "split": lambda a: list(s) if not a else (s.split(need_str(a)) if need_str(a) else list(s)),
            "replace": lambda a: s.replace(need_str(a), need_str(a, 1), 1),
            "replaceAll": lambda a: s.replace(need_str(a), need_str(a, 1)),
            "repeat": lambda a: s * max(0, int(js_to_number(a[0]))) if a else "",
            "padStart": lambda a: s.rjust(int(js_to_number(a[0])), need_str(a, 1, " ") or " ") if a else s,
            "padEnd": lambda a: s.ljust(int(js_to_number(a[0])), need_str(a, 1, " ") or " ") if a else s,
            "concat": lambda a: s + "".join(js_to_string(x) for x in a),
            "toString": lambda a: s,
        }
        fn = methods.get(prop)
        return NativeFunction(prop, fn) if fn else UNDEFINED

    def _array_member(self, arr: list, prop: str):
        if prop == "length":
            return float(len(arr))
        if prop.lstrip("-").isdigit():
            idx = int(prop)
            return arr[idx] if 0 <= idx < len(arr) else UNDEFINED

        interp = self

        def call_fn(fn, args, desc):
            return interp.call_value(fn, args, desc)

        def js_sort(args):
            if args and isinstance(args[0], (JsFunction, NativeFunction)):
                comparator = args[0]

                def cmp(a, b):
                    r = js_to_number(call_fn(comparator, [a, b], "comparator"))
                    if math.isnan(r):
                        return 0
                    return -1 if r < 0 else (1 if r > 0 else 0)

                arr.sort(key=cmp_to_key(cmp))
            else:
                arr.sort(key=js_to_string)
            return arr

        def js_reduce(args):
            if not args:
                raise type_error("reduce requires a callback")
            fn = args[0]
            if len(args) >= 2:
                acc = args[1]
                start = 0
            else:
                if not arr:
                    raise type_error("reduce of empty array with no initial value")
                acc = arr[0]
                start = 1
            for i in range(start, len(arr)):
                acc = call_fn(fn, [acc, arr[i], float(i), arr], "reducer")
            return acc

        def index_of(args):
            target = args[0] if args else UNDEFINED
            for i, v in enumerate(arr):
                if strict_equals(v, target):
                    return float(i)
            return -1.0

        methods = {
            "push": lambda a: (arr.extend(a), float(len(arr)))[1],
            "pop": lambda a: arr.pop() if arr else UNDEFINED,
            "shift": lambda a: arr.pop(0) if arr else UNDEFINED,
            "unshift": lambda a: (arr.__setitem__(slice(0, 0), a), float(len(arr)))[1],
            "slice": lambda a: _slice_seq(arr, a),
            "splice": lambda a: _splice(arr, a),
            "indexOf": index_of,
            "includes": lambda a: any(strict_equals(v, a[0] if a else UNDEFINED) for v in arr),
            "join": lambda a: (js_to_string(a[0]) if a else ",").join(
                "" if v is UNDEFINED or v is None else js_to_string(v) for v in arr
            ),
            "map": lambda a: [call_fn(a[0], [v, float(i), arr], "callback") for i, v in enumerate(arr)],
            "filter": lambda a: [v for i, v in enumerate(arr) if js_truthy(call_fn(a[0], [v, float(i), arr], "callback"))],
            "forEach": lambda a: ([call_fn(a[0], [v, float(i), arr], "callback") for i, v in enumerate(arr)], UNDEFINED)[1],
            "find": lambda a: next((v for i, v in enumerate(arr) if js_truthy(call_fn(a[0], [v, float(i), arr], "callback"))), UNDEFINED),
            "findIndex": lambda a: next((float(i) for i, v in enumerate(arr) if js_truthy(call_fn(a[0], [v, float(i), arr], "callback"))), -1.0),
            "some": lambda a: any(js_truthy(call_fn(a[0], [v, float(i), arr], "callback")) for i, v in enumerate(arr)),
            "every": lambda a: all(js_truthy(call_fn(a[0], [v, float(i), arr], "callback")) for i, v in enumerate(arr)),
            "concat": lambda a: arr + [x for part in a for x in (part if isinstance(part, list) else [part])],
            "reverse": lambda a: (arr.reverse(), arr)[1],
            "sort": js_sort,
            "reduce": js_reduce,
            "flat": lambda a: [x for part in arr for x in (part if isinstance(part, list) else [part])],
            "toString": lambda a: js_to_string(arr),
        }
        fn = methods.get(prop)
        return NativeFunction(prop, fn) if fn else UNDEFINED

    def _number_member(self, value: float, prop: str):
        methods = {
            "toFixed": lambda a: f"{value:.{int(js_to_number(a[0])) if a else 0}f}",
            "toString": lambda a: format_number(value),
        }
        fn = methods.get(prop)
        return NativeFunction(prop, fn) if fn else UNDEFINED


def _norm_index(i: float, length: int) -> int:
    idx = int(i)
    if idx < 0:
        idx += length
    return max(0, min(length, idx))


def _slice_seq(seq, args: list):
    length = len(seq)
    start = _norm_index(js_to_number(args[0]), length) if args else 0
    end = _norm_index(js_to_number(args[1]), length) if len(args) > 1 and args[1] is not UNDEFINED else length
    out = seq[start:end]
    return out if isinstance(seq, (list, str)) else list(out)


def _substring(s: str, args: list) -> str:
    length = len(s)
    a = max(0, min(length, int(js_to_number(args[0])))) if args else 0
    b = max(0, min(length, int(js_to_number(args[1])))) if len(args) > 1 else length
    if a > b:
        a, b = b, a
    return s[a:b]


def _splice(arr: list, args: list) -> list:
    length = len(arr)
    start = _norm_index(js_to_number(args[0]), length) if args else 0
    count = int(js_to_number(args[1])) if len(args) > 1 else length - start
    count = max(0, min(count, length - start))
    removed = arr[start:start + count]
    arr[start:start + count] = list(args[2:])
    return removed


def describe_target(node) -> str:
    """Human-readable source path for error messages ("app.player.volume")."""
    if isinstance(node, P.Ident):
        return node.name
    if isinstance(node, P.Member):
        base = describe_target(node.obj)
        if node.computed:
            return f"{base}[...]"
        return f"{base}.{node.prop}"
    if isinstance(node, P.Call):
        return f"{describe_target(node.callee)}(...)"
    return "expression"
