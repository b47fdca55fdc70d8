"""Loop fusion by code generation.

Python has no specializing compiler, so ``fold`` does the specialization
itself: every stream node contributes source fragments for its five
components (``Gen``), the fragments are spliced into a single loop, and the
loop is compiled once per distinct expression structure. Data and functions
are passed in as parameters, so one compiled loop serves every stream of
the same shape.

Nested streams are inlined as nested loops. When a ``map``/``zip_with``
function produces or consumes streams, it is called once at compile time
with symbolic arguments (``Sym``, ``TemplateStream``) to discover the
structure of the streams it builds. Such functions must be pure.

Two backends share the generated source: ``"python"`` (``exec``) and
``"numba"`` (``numba.njit``; numeric keys/values and jit-able functions
only, no sinks).
"""

from __future__ import annotations

import bisect
import operator
from typing import Any, Callable

from .core import (BOTTOM, Contraction, FuelExhausted, IndexedStream, MaskFn,
                   instrumentation, take_left, take_right)

INDENT = "    "


def indent(lines):
    return [INDENT + line for line in lines]


class NotFusable(TypeError):
    """The expression cannot be compiled for the requested backend."""


# ---------------------------------------------------------------------------
# generated-code fragments


class Val:
    """An emitted value: ``stmts`` to run, then ``expr`` to read.

    ``kind`` is ``"scalar"`` (known non-stream), ``"any"`` (decided at run
    time), ``"stream"``, ``"contract"`` or ``"mask"``; the last three carry
    a template (``node``/``ref``) that consumers inline as a nested loop.
    ``expr`` is the run-time value and may be None for pure templates.
    """

    __slots__ = ("expr", "stmts", "kind", "node", "ref", "call")

    def __init__(self, expr, stmts=(), kind="scalar", node=None, ref=None):
        self.expr = expr
        self.stmts = list(stmts)
        self.kind = kind
        self.node = node
        self.ref = ref
        self.call = None  # re-applies a pure traced function at run time

    def gen(self, em):
        return self.node._gen(em, self.ref)

    def runtime(self, em):
        if self.expr is None:
            if isinstance(self.ref, DynRef):
                return self.ref.expr
            if isinstance(self.ref, StaticRef) and symbolic_emitter(self.node) is None:
                node = self.node if self.kind != "contract" else Contraction(self.node)
                self.expr = em.lift(node, "v")
            elif self.call is not None:
                self.expr = self.call()
            else:
                raise NotFusable("value only exists as a compile-time template")
        return self.expr


class Gen:
    """Source fragments of one stream.

    ``init`` statements create the state locals; ``prep`` runs once per
    iteration while valid (caching index parts); ``seek(key, strict)``
    returns statements, where ``key`` is a local name and ``strict`` is a
    local name or the literal ``"True"``/``"False"``. ``index`` is None for
    streams that never bound the key space (``repeat``).
    """

    __slots__ = ("init", "valid", "prep", "index", "ready", "value", "seek")

    def __init__(self, init, valid, index, ready, value, seek, prep=()):
        self.init = list(init)
        self.valid = valid
        self.prep = list(prep)
        self.index = index
        self.ready = ready
        self.value = value
        self.seek = seek


def below(key_expr, target, strict):
    """Expression: does ``key_expr`` lie before the seek target?"""
    if strict == "True":
        return f"{key_expr} <= {target}"
    if strict == "False":
        return f"{key_expr} < {target}"
    return f"({key_expr} <= {target} if {strict} else {key_expr} < {target})"


def and_(*parts):
    parts = [p for p in parts if p != "True"]
    if not parts:
        return "True"
    if len(parts) == 1:
        return parts[0]
    return "(" + " and ".join(parts) + ")"


class StaticRef:
    """A node known at compile time; its data are passed as parameters."""

    __slots__ = ("node",)

    def __init__(self, node):
        self.node = node

    def load(self, em, init, attr, base):
        v = getattr(self.node, attr)
        if isinstance(v, Sym):
            init.extend(v.stmts)
            name = em.fresh(base)
            init.append(f"{name} = {v.expr}")
            return name
        return em.lift(v, base)

    def child(self, attr):
        return StaticRef(getattr(self.node, attr))

    def data(self, attr):
        return getattr(self.node, attr)


class DynRef:
    """A node that only exists at run time, reached through ``expr``; its
    structure is that of a representative of the same shape."""

    __slots__ = ("expr", "rep")

    def __init__(self, expr, rep):
        self.expr = expr
        self.rep = rep

    def load(self, em, init, attr, base):
        if em.backend != "python":
            raise NotFusable("run-time nested streams need the python backend")
        name = em.fresh(base)
        init.append(f"{name} = {self.expr}.{attr}")
        return name

    def child(self, attr):
        return DynRef(f"{self.expr}.{attr}", getattr(self.rep, attr))

    def data(self, attr):
        return getattr(self.rep, attr)


# ---------------------------------------------------------------------------
# symbolic tracing


class TraceError(TypeError):
    pass


def _operand(em, x):
    if isinstance(x, Sym):
        return x.expr, x.stmts, x.folds
    if type(x) in (int, float, bool):
        return repr(x), [], False
    return em.lift(x, "k"), [], False


def _binop(op, reflected=False):
    def method(self, other):
        a, sa, fa = self.expr, self.stmts, self.folds
        b, sb, fb = _operand(self.em, other)
        if reflected:
            a, b = b, a
        return Sym(self.em, f"({a} {op} {b})", sa + sb, fa or fb)
    return method


class Sym:
    """A scalar known only as a source expression during tracing."""

    __slots__ = ("em", "expr", "stmts", "folds")
    __hash__ = None

    def __init__(self, em, expr, stmts=(), folds=False):
        self.em = em
        self.expr = expr
        self.stmts = list(stmts)
        self.folds = folds

    def __bool__(self):
        raise TraceError("symbolic value used as a condition")

    def __index__(self):
        raise TraceError("symbolic value used as an index")

    def __neg__(self):
        return Sym(self.em, f"(-{self.expr})", self.stmts, self.folds)

    __add__ = _binop("+")
    __radd__ = _binop("+", True)
    __sub__ = _binop("-")
    __rsub__ = _binop("-", True)
    __mul__ = _binop("*")
    __rmul__ = _binop("*", True)
    __truediv__ = _binop("/")
    __rtruediv__ = _binop("/", True)
    __floordiv__ = _binop("//")
    __rfloordiv__ = _binop("//", True)
    __mod__ = _binop("%")
    __rmod__ = _binop("%", True)
    __pow__ = _binop("**")
    __lt__ = _binop("<")
    __le__ = _binop("<=")
    __gt__ = _binop(">")
    __ge__ = _binop(">=")
    __eq__ = _binop("==")
    __ne__ = _binop("!=")

    def __repr__(self):
        return f"Sym({self.expr})"


class TemplateStream(IndexedStream):
    """Stand-in for a stream-valued argument during tracing."""

    __slots__ = ("em", "node", "ref", "expr")

    def __init__(self, em, node, ref, expr):
        self.em = em
        self.node = node
        self.ref = ref
        self.expr = expr

    def _gen(self, em, ref):
        return self.node._gen(em, self.ref)

    def start(self):
        raise TraceError("template streams cannot be traversed directly")


def symbolic_emitter(x):
    """The emitter a traced expression belongs to, or None if ``x`` is
    concrete."""
    if isinstance(x, (TemplateStream, Sym)):
        return x.em
    if isinstance(x, Contraction):
        return symbolic_emitter(x.stream)
    if isinstance(x, IndexedStream):
        for attr in _slot_names(type(x)):
            v = getattr(x, attr, None)
            if isinstance(v, (IndexedStream, Sym, Contraction)):
                em = symbolic_emitter(v)
                if em is not None:
                    return em
    return None


_SLOTS: dict[type, tuple[str, ...]] = {}


def _slot_names(cls):
    names = _SLOTS.get(cls)
    if names is None:
        names = tuple(n for c in cls.__mro__ for n in getattr(c, "__slots__", ()))
        _SLOTS[cls] = names
    return names


# ---------------------------------------------------------------------------
# the emitter

_INLINE2 = {
    operator.mul: "({0} * {1})",
    operator.add: "({0} + {1})",
    operator.sub: "({0} - {1})",
    take_left: "{0}",
    take_right: "{1}",
}


def _buries_sym(node) -> bool:
    """Does a traced stream hold symbolic values inside a container field?
    Scalar fields become parameters; symbols in lists cannot."""
    for cls in type(node).__mro__:
        for name in getattr(cls, "__slots__", ()):
            v = getattr(node, name, None)
            if isinstance(v, IndexedStream):
                if _buries_sym(v):
                    return True
            elif isinstance(v, (list, tuple)) and any(isinstance(x, Sym) for x in v):
                return True
    return False


class Emitter:
    def __init__(self, backend="python", counting=False, fuel=None):
        if backend not in ("python", "numba"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self.params: list[tuple[str, Any]] = []
        self._lifted: dict[int, str] = {}
        self._alive: list[Any] = []
        self._n = 0
        self.cnt = None
        self.fuel_box = None
        # local -> the cursor it was copied from, while that copy is current
        self.aliases: dict[str, str] = {}
        if counting:
            self.cnt = self.lift(_counter_cells(backend), "cnt")
        if fuel is not None:
            if backend != "python":
                raise NotFusable("fuel limits need the python backend")
            self.fuel_box = self.lift([fuel], "fuel")
            self.fuel_exc = self.lift(FuelExhausted, "FuelExhausted")

    def own_index(self, key: str, cursor: str) -> bool:
        """Is ``key`` a snapshot of ``cursor`` taken this iteration?"""
        return self.aliases.get(key) == cursor

    def fresh(self, base="t"):
        self._n += 1
        return f"{base}_{self._n}"

    def lift(self, value, base="c"):
        if type(value) is int and value == 0 and self.backend == "numba":
            # a literal zero lets LLVM prove cursors non-negative, as a
            # handwritten range(n) loop would; other ints stay parameters
            return "0"
        key = id(value)
        name = None if type(value) in _PLAIN else self._lifted.get(key)
        if name is None:
            name = self.fresh(base)
            self._alive.append(value)
            self._lifted[key] = name
            self.params.append((name, _for_backend(value, self.backend)))
        return name

    # instrumentation fragments

    def count(self, field, amount="1"):
        if self.cnt is None:
            return []
        slot = {"seeks": 0, "comparisons": 1, "emissions": 2}[field]
        return [f"{self.cnt}[{slot}] += {amount}"]

    @property
    def counting(self):
        return self.cnt is not None

    # function application, with tracing for stream-shaped results

    def apply(self, f, args: list[Val]) -> Val:
        stmts = [s for a in args for s in a.stmts]
        if all(a.kind in ("scalar", "any") for a in args):
            try:
                template = _INLINE2.get(f) if len(args) == 2 else None
            except TypeError:
                template = None
            if template is not None:
                return Val(template.format(*(a.expr for a in args)), stmts, "any")
        bound = []
        for a in args:
            if a.kind in ("scalar", "any") and a.expr is not None and not a.expr.isidentifier():
                name = self.fresh("a")
                stmts.append(f"{name} = {a.expr}")
                bound.append(Val(name, (), a.kind))
            else:
                bound.append(Val(a.expr, (), a.kind, a.node, a.ref))
        traced = self._trace(f, bound, stmts)
        if traced is not None:
            if traced.expr is None:
                traced.call = lambda: (f"{self.lift(f, 'f')}"
                                       f"({', '.join(a.runtime(self) for a in bound)})")
            return traced
        fname = self.lift(f, "f")
        call = f"{fname}({', '.join(a.runtime(self) for a in bound)})"
        return Val(call, stmts, "any")

    def _trace(self, f, args, stmts):
        syms = []
        for a in args:
            if a.kind == "stream":
                syms.append(TemplateStream(self, a.node, a.ref, a.expr))
            elif a.kind == "contract":
                syms.append(Contraction(TemplateStream(self, a.node, a.ref, None)))
            elif a.kind == "mask":
                syms.append(a.node)
            else:
                syms.append(Sym(self, a.expr))
        try:
            out = f(*syms)
        except Exception:
            return None
        if isinstance(out, IndexedStream):
            if _buries_sym(out):
                return None
            return Val(None, stmts, "stream", out, StaticRef(out))
        if isinstance(out, Contraction):
            return Val(None, stmts, "contract", out.stream, StaticRef(out.stream))
        if isinstance(out, MaskFn):
            return Val(None, stmts, "mask", out, StaticRef(out))
        if isinstance(out, Sym) and out.em is self:
            return Val(out.expr, stmts + out.stmts, "scalar")
        if type(out) in (int, float, bool):
            return Val(repr(out), stmts, "scalar")
        return None

    # assembling and running

    def build(self, args, body, result):
        names = [n for n, _ in self.params] + list(args)
        src = [f"def _fused({', '.join(names)}):"]
        src += indent(body)
        src.append(f"{INDENT}return {result}")
        source = "\n".join(src) + "\n"
        return _compile(source, self.backend)

    def bind(self, fn):
        values = [v for _, v in self.params]
        cells = dict(self.params)[self.cnt] if self.cnt is not None else None
        counter = instrumentation.counter

        def run(*args):
            if cells is not None:
                for i in range(3):
                    cells[i] = 0
            out = fn(*values, *args)
            if cells is not None and counter is not None:
                counter.seeks += int(cells[0])
                counter.comparisons += int(cells[1])
                counter.emissions += int(cells[2])
            return out

        run.source = fn.source
        return run


def _counter_cells(backend):
    if backend == "numba":
        import numpy as np
        return np.zeros(3, dtype=np.int64)
    return [0, 0, 0]


_NUMBA_FUNCS: dict[Any, Any] = {}


def _for_backend(value, backend):
    if backend != "numba":
        return value
    import numpy as np
    if isinstance(value, (list, tuple)) and all(isinstance(x, (int, float)) for x in value):
        arr = np.asarray(value)
        if arr.dtype == object:
            raise NotFusable("numba backend needs numeric arrays")
        return arr
    if callable(value) and not isinstance(value, type):
        return _njit_function(value)
    return value


def _njit_function(f):
    import numba
    if isinstance(f, numba.core.registry.CPUDispatcher):
        return f
    code = getattr(f, "__code__", None)
    if code is None:
        raise NotFusable(f"cannot jit {f!r}")
    cells = tuple(c.cell_contents for c in (f.__closure__ or ()))
    try:
        key = (code, cells, f.__defaults__)
        hash(key)
    except TypeError:
        key = f
    jf = _NUMBA_FUNCS.get(key)
    if jf is None:
        jf = numba.njit(f)
        _NUMBA_FUNCS[key] = jf
    return jf


_CODE_CACHE: dict[tuple[str, str], Callable] = {}


def _compile(source, backend):
    key = (backend, source)
    fn = _CODE_CACHE.get(key)
    if fn is None:
        namespace: dict[str, Any] = {}
        exec(compile(source, "<fused>", "exec"), namespace)
        fn = namespace["_fused"]
        if backend == "numba":
            import numba
            fn = numba.njit(fn)
        try:
            fn.source = source
        except AttributeError:
            pass
        _CODE_CACHE[key] = fn
    return fn


# ---------------------------------------------------------------------------
# loops


def emit_loop(em: Emitter, g: Gen, on_ready: Callable[[str, Val], list[str]]):
    """Statements that run the stream ``g`` to exhaustion, calling
    ``on_ready(index_name, value)`` for the body of each emission."""
    lines = list(g.init)
    index = g.index
    if index is None:
        if em.fuel_box is None:
            raise NotFusable("unbounded stream (a bare repeat) cannot be folded")
        index = em.lift(BOTTOM, "bottom")
    i = em.fresh("i")
    body = []
    if em.fuel_box is not None:
        fb = em.fuel_box
        body += [f"if {fb}[0] <= 0:",
                 f"{INDENT}raise {em.fuel_exc}('stream traversal ran out of fuel')",
                 f"{fb}[0] -= 1"]
    body += g.prep
    body.append(f"{i} = {index}")
    if index.isidentifier():
        em.aliases[i] = index
    emit = em.count("emissions") + on_ready(i, g.value)
    if g.ready == "True":
        body += emit
        body += g.seek(i, "True")
    else:
        body.append(f"if {g.ready}:")
        body += indent(emit + (g.seek(i, "True") or ["pass"]))
        skip = g.seek(i, "False")
        if skip:
            body.append("else:")
            body += indent(skip)
    lines.append(f"while {g.valid}:")
    lines += indent(body)
    return lines


_SUM = object()


def _reduce_lines(em, f, acc, i, v: Val):
    if f is _SUM:
        if v.kind in ("stream", "contract"):
            raise TypeError("sum of stream-valued streams is undefined; use eval_into")
        return v.stmts + [f"{acc} = {acc} + {v.expr}"]
    if f in _INLINE3:
        return v.stmts + [_INLINE3[f].format(acc=acc, i=i, v=v.expr)]
    fname = em.lift(f, "f")
    return v.stmts + [f"{acc} = {fname}({acc}, {i}, {v.runtime(em)})"]


_INLINE3: dict[Any, str] = {}


def emit_fold(em, g, f, acc):
    return emit_loop(em, g, lambda i, v: _reduce_lines(em, f, acc, i, v))


def emit_eval(em: Emitter, v: Val, dst: str, proto) -> list[str]:
    """Statements that set ``dst`` to ``eval(v, dst)``.

    ``proto`` is an example of the destination (the accumulator itself at
    the top level, a fresh default below it) used to choose between the
    nested, aggregating and scalar evaluators.
    """
    lines = list(v.stmts)
    if v.kind in ("stream", "contract"):
        g = v.gen(em)
        if v.kind == "stream" and is_modifiable(proto):
            child = proto.zero()
            if hasattr(proto, "add") and not is_modifiable(child):
                def on_ready(i, w):
                    if w.kind == "scalar":
                        gen_add = getattr(proto, "gen_add", None)
                        if gen_add is not None:
                            return w.stmts + gen_add(em, dst, i, w.expr)
                        return w.stmts + [f"{dst}.add({i}, {w.expr})"]
                    o = em.fresh("o")
                    return ([f"{o} = {dst}.slot({i})"] + emit_eval(em, w, o, child)
                            + [f"{dst}.put({i}, {o})"])
            elif hasattr(proto, "slot"):
                def on_ready(i, w):
                    o = em.fresh("o")
                    return ([f"{o} = {dst}.slot({i})"] + emit_eval(em, w, o, child)
                            + [f"{dst}.put({i}, {o})"])
            else:
                if em.backend != "python":
                    raise NotFusable("update-only sinks need the python backend")

                def on_ready(i, w):
                    m = em.fresh("modify")
                    old = em.fresh("old")
                    return ([f"def {m}({old}):"] + indent(emit_eval(em, w, old, child))
                            + [f"{INDENT}return {old}", f"{dst} = {dst}.update({i}, {m})"])
        else:
            def on_ready(i, w):
                return emit_eval(em, w, dst, proto)
        return lines + emit_loop(em, g, on_ready)
    if is_modifiable(proto):
        if v.kind == "scalar":
            raise TypeError("cannot evaluate a scalar into a keyed container")
    if v.kind == "any" and em.backend == "python":
        ev = em.lift(_runtime_eval, "eval_into")
        lazy = em.lift((IndexedStream, Contraction), "lazy")
        return lines + [f"{dst} = {ev}({v.expr}, {dst}) if isinstance({v.expr}, {lazy}) "
                        f"else {dst} + {v.expr}"]
    return lines + [f"{dst} = {dst} + {v.expr}"]


def is_modifiable(x):
    return hasattr(x, "zero") and (hasattr(x, "update") or hasattr(x, "slot"))


def _runtime_eval(value, dst):
    from .evaluate import eval_into
    return eval_into(value, dst)


# ---------------------------------------------------------------------------
# entry points


def stream_val(s) -> Val:
    if isinstance(s, Contraction):
        return Val(None, (), "contract", s.stream, StaticRef(s.stream))
    return Val(None, (), "stream", s, StaticRef(s))


def compile_fold(s: IndexedStream, f, *, backend="python", fuel=None):
    """Compile ``fold(f, s, ·)``; returns a callable taking the initial
    accumulator."""
    em = Emitter(backend, instrumentation.counter is not None, fuel)
    g = s._gen(em, StaticRef(s))
    fn = em.build(["acc"], emit_fold(em, g, f, "acc"), "acc")
    return em.bind(fn)


def compile_sum(s: IndexedStream, *, backend="python", fuel=None):
    return compile_fold(s, _SUM, backend=backend, fuel=fuel)


def compile_eval(value, proto, *, backend="python", fuel=None):
    """Compile ``eval_into(value, ·)`` for destinations shaped like
    ``proto``."""
    em = Emitter(backend, instrumentation.counter is not None, fuel)
    fn = em.build(["dst"], emit_eval(em, stream_val(value), "dst", proto), "dst")
    return em.bind(fn)


def inline_fold(em: Emitter, s, f, init) -> Sym:
    """A fold met while tracing: becomes a nested loop in the caller."""
    acc = em.fresh("acc")
    init_expr, init_stmts, _ = _operand(em, init)
    g = s._gen(em, StaticRef(s))
    lines = init_stmts + [f"{acc} = {init_expr}"] + emit_fold(em, g, f, acc)
    return Sym(em, acc, lines, folds=True)


def run_fold(f, s, init, *, backend="python", fuel=None):
    em = symbolic_emitter(s)
    if em is not None:
        return inline_fold(em, s, f, init)
    return compile_fold(s, f, backend=backend, fuel=fuel)(init)


def run_sum(s, zero=0, *, backend="python", fuel=None):
    em = symbolic_emitter(s)
    if em is not None:
        return inline_fold(em, s, _SUM, zero)
    return compile_sum(s, backend=backend, fuel=fuel)(zero)


# helpers for node implementations

_PLAIN = (int, float, bool, str, bytes, type(None))


def data_val(em, ref, init, attr) -> Val:
    """The value stored in field ``attr`` of a node, as a ``Val``."""
    v = ref.data(attr)
    if isinstance(v, IndexedStream):
        return Val(None, (), "stream", v, ref.child(attr))
    if isinstance(v, Contraction):
        inner = ref.child(attr).child("stream")
        return Val(None, (), "contract", v.stream, inner)
    if isinstance(v, MaskFn):
        return Val(None, (), "mask", v, ref.child(attr))
    name = ref.load(em, init, attr, "v")
    scalar = isinstance(v, (Sym,) + _PLAIN) or type(v).__module__ == "numpy"
    return Val(name, (), "scalar" if scalar else "any")


def element_val(em, arr, pos, vshape) -> Val:
    """``arr[pos]`` for an array whose elements were classified as
    ``vshape`` (see ``sources.classify``)."""
    expr = f"{arr}[{pos}]"
    if vshape[0] == "stream":
        return Val(expr, (), "stream", vshape[1], DynRef(expr, vshape[1]))
    return Val(expr, (), vshape[0])

def lift_bisect(em, strict):
    return em.lift(bisect.bisect_right if strict == "True" else bisect.bisect_left, "bisect")
