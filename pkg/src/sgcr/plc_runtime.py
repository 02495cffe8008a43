"""Automation controllers: typed expression programs over device points.

A program declares named variables bound to device attribute paths and
a list of assignment statements in a small expression language (and,
or, not, comparisons, arithmetic, numeric constants).  Each scan the
controller fetches its inputs with read requests over the emulated
network, evaluates the statements in order, and issues write requests
for outputs whose value changed.  A controller never touches the
process store directly; every write lands with the provenance the
serving device assigns to controller traffic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ExpressionTypeError, SchemaViolation, UnboundVariable, Unroutable
from .ied_runtime import decode_messages, encode_message
from .net_emu import Frame, TCP_SEGMENT
from .scl.documents import split_attribute_path
from .scl.supplements import SupplementDoc

BOOL = "bool"
REAL = "real"

IN = "in"
OUT = "out"


def binding_type(path: str) -> str:
    """Booleans are switch positions and operate/start flags."""
    _, _, rest = split_attribute_path(path)
    if "Pos" in rest or rest[-1] == "general":
        return BOOL
    return REAL


# -- expression language ---------------------------------------------------------

_COMPARISONS = ("<", ">", "=")


def _tokenize(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()<>=+*":
            out.append(ch)
            i += 1
        elif ch in "-−":  # ASCII hyphen or minus sign
            out.append("-")
            i += 1
        elif ch in "×":  # multiplication sign
            out.append("*")
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] == "."):
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
        else:
            raise SchemaViolation(f"unexpected character {ch!r} in expression")
    return out


class _Parser:
    def __init__(self, tokens: list[str], text: str):
        self.tokens = tokens
        self.pos = 0
        self.text = text

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise SchemaViolation(f"expression ends early: {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> tuple:
        node = self.or_expr()
        if self.peek() is not None:
            raise SchemaViolation(
                f"trailing tokens after expression: {self.text!r}")
        return node

    def or_expr(self) -> tuple:
        node = self.and_expr()
        while self.peek() == "or":
            self.take()
            node = ("or", node, self.and_expr())
        return node

    def and_expr(self) -> tuple:
        node = self.not_expr()
        while self.peek() == "and":
            self.take()
            node = ("and", node, self.not_expr())
        return node

    def not_expr(self) -> tuple:
        if self.peek() == "not":
            self.take()
            return ("not", self.not_expr())
        return self.comparison()

    def comparison(self) -> tuple:
        node = self.sum()
        if self.peek() in _COMPARISONS:
            op = self.take()
            node = (op, node, self.sum())
        return node

    def sum(self) -> tuple:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            node = (op, node, self.term())
        return node

    def term(self) -> tuple:
        node = self.factor()
        while self.peek() == "*":
            self.take()
            node = ("*", node, self.factor())
        return node

    def factor(self) -> tuple:
        tok = self.take()
        if tok == "(":
            node = self.or_expr()
            if self.take() != ")":
                raise SchemaViolation(f"unbalanced parentheses: {self.text!r}")
            return node
        if tok == "-":
            return ("neg", self.factor())
        if tok in ("true", "false"):
            return ("bool", tok == "true")
        if tok and (tok[0].isdigit() or tok[0] == "."):
            try:
                return ("num", float(tok))
            except ValueError as exc:
                raise SchemaViolation(f"bad number {tok!r}") from exc
        if tok and (tok[0].isalpha() or tok[0] == "_"):
            return ("var", tok)
        raise SchemaViolation(f"unexpected token {tok!r} in {self.text!r}")


def parse_expression(text: str) -> tuple:
    return _Parser(_tokenize(text), text).parse()


def infer_type(node: tuple, var_types: dict[str, str]) -> str:
    kind = node[0]
    if kind == "num":
        return REAL
    if kind == "bool":
        return BOOL
    if kind == "var":
        name = node[1]
        if name not in var_types:
            raise UnboundVariable(name)
        return var_types[name]
    if kind == "neg":
        _expect(node[1], REAL, var_types, "unary minus")
        return REAL
    if kind == "not":
        _expect(node[1], BOOL, var_types, "not")
        return BOOL
    if kind in ("and", "or"):
        _expect(node[1], BOOL, var_types, kind)
        _expect(node[2], BOOL, var_types, kind)
        return BOOL
    if kind in ("<", ">"):
        _expect(node[1], REAL, var_types, kind)
        _expect(node[2], REAL, var_types, kind)
        return BOOL
    if kind == "=":
        left = infer_type(node[1], var_types)
        right = infer_type(node[2], var_types)
        if left != right:
            raise ExpressionTypeError(
                f"'=' compares {left} with {right}")
        return BOOL
    if kind in ("+", "-", "*"):
        _expect(node[1], REAL, var_types, kind)
        _expect(node[2], REAL, var_types, kind)
        return REAL
    raise SchemaViolation(f"unknown expression node {kind!r}")


def _expect(node: tuple, wanted: str, var_types: dict[str, str],
            op: str) -> None:
    got = infer_type(node, var_types)
    if got != wanted:
        raise ExpressionTypeError(f"operator {op!r} needs {wanted}, got {got}")


def eval_expression(node: tuple, env: dict[str, object]) -> object:
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "bool":
        return node[1]
    if kind == "var":
        return env[node[1]]
    if kind == "neg":
        return -eval_expression(node[1], env)
    if kind == "not":
        return not eval_expression(node[1], env)
    if kind == "and":
        return bool(eval_expression(node[1], env)) and \
            bool(eval_expression(node[2], env))
    if kind == "or":
        return bool(eval_expression(node[1], env)) or \
            bool(eval_expression(node[2], env))
    if kind == "<":
        return eval_expression(node[1], env) < eval_expression(node[2], env)
    if kind == ">":
        return eval_expression(node[1], env) > eval_expression(node[2], env)
    if kind == "=":
        return eval_expression(node[1], env) == eval_expression(node[2], env)
    if kind == "+":
        return eval_expression(node[1], env) + eval_expression(node[2], env)
    if kind == "-":
        return eval_expression(node[1], env) - eval_expression(node[2], env)
    if kind == "*":
        return eval_expression(node[1], env) * eval_expression(node[2], env)
    raise SchemaViolation(f"unknown expression node {kind!r}")


# -- program ---------------------------------------------------------------------


@dataclass
class PlcVariableState:
    name: str
    binding: str
    direction: str  # in | out
    var_type: str  # bool | real
    value: object = None
    stale: bool = False

    def coerce(self, raw: object) -> object:
        return bool(raw) if self.var_type == BOOL else float(raw)


@dataclass
class PlcProgram:
    name: str
    scan_interval_ticks: int = 1
    variables: dict[str, PlcVariableState] = field(default_factory=dict)
    statements: list[tuple[str, tuple, str]] = field(default_factory=list)

    def in_vars(self) -> list[PlcVariableState]:
        return [v for v in self.variables.values() if v.direction == IN]

    def out_vars(self) -> list[PlcVariableState]:
        return [v for v in self.variables.values() if v.direction == OUT]

    def evaluate(self) -> list[tuple[str, object, str]]:
        """Run all statements; list (var, new value, binding) per change."""
        writes: list[tuple[str, object, str]] = []
        for target, ast, _text in self.statements:
            state = self.variables[target]
            env = {n: v.value for n, v in self.variables.items()}
            result = state.coerce(eval_expression(ast, env))
            if state.value is None or result != state.value:
                writes.append((target, result, state.binding))
            state.value = result
        return writes


def load_program(doc: SupplementDoc, name: str | None = None) -> PlcProgram:
    """Build an executable program from its supplement document.

    Raises UnboundVariable for statements naming undeclared variables,
    ExpressionTypeError for bool/real mismatches, and SchemaViolation
    for repeated assignment to the same output in one scan.
    """
    prog = PlcProgram(name=name or doc.name or "PLC",
                      scan_interval_ticks=doc.scan_interval_ticks)
    for var in doc.variables:
        split_attribute_path(var.binding)  # malformed bindings fail loudly
        prog.variables[var.name] = PlcVariableState(
            name=var.name, binding=var.binding, direction=var.direction,
            var_type=binding_type(var.binding),
            value=False if binding_type(var.binding) == BOOL else 0.0)
    var_types = {n: v.var_type for n, v in prog.variables.items()}
    assigned: set[str] = set()
    for stmt in doc.statements:
        if stmt.target_var not in prog.variables:
            raise UnboundVariable(stmt.target_var)
        target = prog.variables[stmt.target_var]
        if target.direction != OUT:
            raise SchemaViolation(
                f"statement assigns to non-output {stmt.target_var!r}")
        if stmt.target_var in assigned:
            raise SchemaViolation(
                f"output {stmt.target_var!r} assigned twice in one scan")
        assigned.add(stmt.target_var)
        ast = parse_expression(stmt.expression)
        expr_type = infer_type(ast, var_types)
        if expr_type != target.var_type:
            raise ExpressionTypeError(
                f"{stmt.target_var} is {target.var_type} but expression "
                f"yields {expr_type}")
        prog.statements.append((stmt.target_var, ast, stmt.expression))
    for state in prog.out_vars():
        state.value = None  # first evaluation always writes
    return prog


# -- network actor ---------------------------------------------------------------


@dataclass
class PlcLogEntry:
    tick: int
    plc: str
    kind: str  # write | stale | unreachable
    subject: str
    value: object = None

    def as_dict(self) -> dict:
        return {"tick": self.tick, "plc": self.plc, "kind": self.kind,
                "subject": self.subject, "value": self.value}


class PlcActor:
    """One controller on the network: request-driven inputs and outputs."""

    def __init__(self, name: str, program: PlcProgram, emulator=None):
        self.name = name
        self.program = program
        self.emulator = emulator
        self._awaiting: dict[str, list[str]] = {}  # device -> pending vars
        self._scan_open = False
        self.log: list[PlcLogEntry] = []

    def attach(self, emulator) -> None:
        self.emulator = emulator

    def _device_of(self, binding: str) -> str:
        return split_attribute_path(binding)[0]

    def begin_scan(self, now_tick: int) -> None:
        """Issue read requests for every input variable."""
        if now_tick % self.program.scan_interval_ticks != 0:
            return
        self._scan_open = True
        for state in sorted(self.program.in_vars(), key=lambda v: v.name):
            device = self._device_of(state.binding)
            payload = encode_message({"op": "read", "path": state.binding})
            try:
                self.emulator.send_frame(Frame(
                    kind=TCP_SEGMENT, src=self.name, dst=device,
                    payload=payload))
            except Unroutable:
                state.stale = True
                self.log.append(PlcLogEntry(now_tick, self.name,
                                            "unreachable", state.binding))
                continue
            self._awaiting.setdefault(device, []).append(state.name)

    def handle_frame(self, frame: Frame, time_ms: float) -> None:
        """Responses return in request order on each device's stream."""
        responses, _ = decode_messages(frame.payload)
        queue = self._awaiting.get(frame.src, [])
        for resp in responses:
            if not queue:
                break
            var_name = queue.pop(0)
            state = self.program.variables[var_name]
            if resp.get("ok"):
                state.value = state.coerce(resp.get("value"))
                state.stale = False
            else:
                state.stale = True

    def finish_scan(self, now_tick: int) -> list[tuple[str, object, str]]:
        """Evaluate and write changed outputs; stale inputs never crash."""
        if not self._scan_open:
            return []
        self._scan_open = False
        for device, pending in sorted(self._awaiting.items()):
            for var_name in pending:
                state = self.program.variables[var_name]
                state.stale = True
                self.log.append(PlcLogEntry(now_tick, self.name, "stale",
                                            state.binding))
        self._awaiting = {}
        writes = self.program.evaluate()
        for var_name, value, binding in writes:
            device = self._device_of(binding)
            payload = encode_message({"op": "write", "path": binding,
                                      "value": value})
            try:
                self.emulator.send_frame(Frame(
                    kind=TCP_SEGMENT, src=self.name, dst=device,
                    payload=payload))
                self.log.append(PlcLogEntry(now_tick, self.name, "write",
                                            binding, value))
            except Unroutable:
                self.log.append(PlcLogEntry(now_tick, self.name,
                                            "unreachable", binding, value))
        return writes


def plc_scan(program: PlcProgram, read_values: dict[str, object],
             now_tick: int = 0) -> list[tuple[str, object, str]]:
    """Synchronous scan for direct testing: inputs by binding path."""
    if now_tick % program.scan_interval_ticks != 0:
        return []
    for state in program.in_vars():
        if state.binding in read_values:
            state.value = state.coerce(read_values[state.binding])
            state.stale = False
        else:
            state.stale = True  # retain the previous value
    return program.evaluate()
