"""Reading and writing workflows as DOT files.

The accepted grammar is the restricted subset documented in
docs/FORMATS.md: one ``digraph`` block containing node statements with
optional ``work``/``memory`` attributes and edge statements with an
optional ``size`` attribute.  Node ids are bare words or double-quoted
strings.  A node missing ``work`` defaults to 1; missing ``memory`` or
``size`` default to 0.
"""

from __future__ import annotations

import re

from .workflow import Edge, Task, WorkflowDag, validate

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|\#[^\n]*|/\*.*?\*/)
  | (?P<arrow>->)
  | (?P<punct>[{}\[\];=,])
  | (?P<quoted>"(?:[^"\\]|\\.)*")
  | (?P<word>[A-Za-z0-9_.+-]+)
    """,
    re.VERBOSE | re.DOTALL,
)

_KEYWORDS = {"digraph", "graph", "subgraph", "node", "edge", "strict"}


class DotSyntaxError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _tokenize(text: str):
    tokens: list[tuple[str, str, int]] = []
    line = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DotSyntaxError(line, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append((kind, value, line))
        line += value.count("\n")
        pos = m.end()
    return tokens


def _unquote(value: str) -> str:
    if value.startswith('"'):
        return value[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    return value


def parse_workflow_text(text: str) -> WorkflowDag:
    tokens = _tokenize(text)
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else (None, None, tokens[-1][2] if tokens else 1)

    def take(expect_kind=None, expect_value=None):
        nonlocal i
        kind, value, line = peek()
        if kind is None:
            raise DotSyntaxError(line, "unexpected end of file")
        if expect_kind and kind != expect_kind:
            raise DotSyntaxError(line, f"expected {expect_kind}, got {value!r}")
        if expect_value and value != expect_value:
            raise DotSyntaxError(line, f"expected {expect_value!r}, got {value!r}")
        i += 1
        return kind, value, line

    kind, value, line = take()
    if value == "strict":
        kind, value, line = take()
    if value != "digraph":
        raise DotSyntaxError(line, "file must start with 'digraph'")
    kind, value, line = take()
    if kind in ("word", "quoted"):
        kind, value, line = take()
    if value != "{":
        raise DotSyntaxError(line, "expected '{' after graph name")

    tasks: dict[str, dict] = {}
    order: list[str] = []
    edges: list[Edge] = []

    def parse_attrs(line):
        attrs: dict[str, float] = {}
        take("punct", "[")
        while True:
            kind, value, aline = take()
            if value == "]":
                break
            if kind not in ("word", "quoted"):
                raise DotSyntaxError(aline, f"expected attribute name, got {value!r}")
            name = _unquote(value)
            take("punct", "=")
            kind, raw, vline = take()
            if kind not in ("word", "quoted"):
                raise DotSyntaxError(vline, f"expected attribute value, got {raw!r}")
            try:
                attrs[name] = float(_unquote(raw))
            except ValueError:
                raise DotSyntaxError(vline, f"attribute {name!r} is not a number: {raw!r}") from None
            kind, value, _ = peek()
            if value == ",":
                take()
        return attrs

    def ensure_task(tid):
        if tid not in tasks:
            tasks[tid] = {}
            order.append(tid)

    while True:
        kind, value, line = peek()
        if kind is None:
            raise DotSyntaxError(line, "missing closing '}'")
        if value == "}":
            take()
            break
        if value == ";":
            take()
            continue
        if kind not in ("word", "quoted"):
            raise DotSyntaxError(line, f"unexpected token {value!r}")
        if value in _KEYWORDS:
            raise DotSyntaxError(line, f"unsupported statement {value!r}")
        take()
        name = _unquote(value)
        kind, nxt, _ = peek()
        if nxt == "->":
            tail = name
            while nxt == "->":
                take()
                kind, value, hline = take()
                if kind not in ("word", "quoted"):
                    raise DotSyntaxError(hline, f"expected node id after '->', got {value!r}")
                head = _unquote(value)
                ensure_task(tail)
                ensure_task(head)
                attrs = {}
                kind, look, _ = peek()
                if look == "[":
                    attrs = parse_attrs(hline)
                edges.append(Edge(tail, head, attrs.get("size", 0.0)))
                tail = head
                kind, nxt, _ = peek()
        else:
            ensure_task(name)
            if nxt == "[":
                attrs = parse_attrs(line)
                tasks[name].update(attrs)
    task_objs = [
        Task(tid, tasks[tid].get("work", 1.0), tasks[tid].get("memory", 0.0))
        for tid in order
    ]
    dag = WorkflowDag(task_objs, edges)
    report = validate(dag)
    if not report.ok:
        raise ValueError(f"invalid workflow: {report}")
    return dag


def parse_workflow(path: str) -> WorkflowDag:
    """Parse and validate a workflow DOT file."""
    with open(path) as f:
        text = f.read()
    return parse_workflow_text(text)


def _fmt(x: float) -> str:
    # shortest decimal that round-trips the float exactly
    return repr(float(x))


def _quote(tid: str) -> str:
    if re.fullmatch(r"[A-Za-z0-9_.]+", tid):
        return tid
    return '"' + tid.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_workflow(dag: WorkflowDag, name: str = "workflow") -> str:
    lines = [f"digraph {name} {{"]
    for t in dag.tasks:
        lines.append(
            f"  {_quote(t.id)} [work={_fmt(t.work)}, memory={_fmt(t.memory)}];"
        )
    for e in dag.edges:
        lines.append(
            f"  {_quote(e.tail)} -> {_quote(e.head)} [size={_fmt(e.volume)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_workflow(dag: WorkflowDag, path: str, name: str = "workflow") -> None:
    with open(path, "w") as f:
        f.write(serialize_workflow(dag, name))
