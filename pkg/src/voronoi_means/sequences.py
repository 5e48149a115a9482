"""
Evaluable real sequences.

Every sequence is indexed from n = 0. A :class:`SequenceSpec` is an immutable,
hashable description; :func:`values` materializes its prefix ``s_0..s_N`` as a
read-only float64 array, memoized per spec. Indices below ``domain_start``
are filled with zeros so that they contribute nothing to sums.
"""
import ast
import logging
import math
import re
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from scipy import special

from .errors import ParameterError, SequenceError

log = logging.getLogger(__name__)

TAIL_RULES = ("zero", "constant", "error")

# Factorials are exact in float64 up to here; beyond it we go through gammaln.
_FACTORIAL_LIMIT = 170


class SequenceSpec:
    """Base class of all sequence descriptions."""

    domain_start: int = 0

    def _compute(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _log_compute(self, n: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Sign and log-magnitude, for families that have them in closed form."""
        return None

    def describe(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.describe()


# Anything the transforms accept as a sequence: a spec or a precomputed prefix.
SequenceLike = Union[SequenceSpec, np.ndarray]


# ---------------------------------------------------------------------------
# Builtin families
# ---------------------------------------------------------------------------


def _inverse_factorial(n):
    small = np.minimum(n, _FACTORIAL_LIMIT)
    return np.where(
        n <= _FACTORIAL_LIMIT,
        1.0 / special.factorial(small),
        np.exp(-special.gammaln(n + 1.0)),
    )


def _geometric_log(n, r):
    sign = np.where((r < 0) & (n % 2 == 1), -1.0, 1.0)
    if r == 0:
        return np.where(n == 0, 1.0, 0.0), np.where(n == 0, 0.0, -np.inf)
    return sign, n * math.log(abs(r))


def _euler_weight(n, r):
    if r == 0:
        return np.where(n == 0, 1.0, 0.0)
    return np.exp(n * math.log(r) - special.gammaln(n + 1.0))


def _euler_weight_log(n, r):
    if r == 0:
        return np.ones_like(n), np.where(n == 0, 0.0, -np.inf)
    return np.ones_like(n), n * math.log(r) - special.gammaln(n + 1.0)


def _check_nonnegative(name):
    def check(params):
        if params[name] < 0:
            raise ParameterError(f"{name} must be non-negative, got {params[name]}")

    return check


def _check_positive(name):
    def check(params):
        if params[name] <= 0:
            raise ParameterError(f"{name} must be positive, got {params[name]}")

    return check


def _check_nonnegative_int(name):
    def check(params):
        value = params[name]
        if value < 0 or value != int(value):
            raise ParameterError(f"{name} must be a non-negative integer, got {value}")

    return check


@dataclass(frozen=True)
class BuiltinFamily:
    fn: Callable[..., np.ndarray]
    defaults: Dict[str, float]
    log_fn: Optional[Callable[..., Tuple[np.ndarray, np.ndarray]]] = None
    check: Optional[Callable[[Dict[str, float]], None]] = None
    formula: str = ""


BUILTINS: Dict[str, BuiltinFamily] = {
    "one": BuiltinFamily(lambda n: np.ones_like(n), {}, formula="1"),
    "zero": BuiltinFamily(lambda n: np.zeros_like(n), {}, formula="0"),
    "delta": BuiltinFamily(lambda n: (n == 0).astype(float), {}, formula="[n=0]"),
    "alt01": BuiltinFamily(lambda n: (n % 2 == 0).astype(float), {}, formula="1,0,1,0,..."),
    "alt_sign": BuiltinFamily(lambda n: np.where(n % 2 == 0, 1.0, -1.0), {}, formula="(-1)^n"),
    "alt_growth": BuiltinFamily(
        lambda n: np.where(n % 2 == 0, 1.0, -1.0) * (n + 1.0), {}, formula="(-1)^n (n+1)"
    ),
    "one_plus_alt": BuiltinFamily(
        lambda n: np.where(n % 2 == 0, 2.0, 0.0), {}, formula="1+(-1)^n"
    ),
    "alt_harmonic": BuiltinFamily(
        lambda n: np.where(n % 2 == 0, 1.0, -1.0) / (n + 1.0), {}, formula="(-1)^n/(n+1)"
    ),
    "linear": BuiltinFamily(lambda n: n + 1.0, {}, formula="n+1"),
    "identity": BuiltinFamily(lambda n: n * 1.0, {}, formula="n"),
    "square": BuiltinFamily(lambda n: (n + 1.0) ** 2, {}, formula="(n+1)^2"),
    "power": BuiltinFamily(lambda n, a: (n + 1.0) ** a, {"a": 1.0}, formula="(n+1)^a"),
    "harmonic": BuiltinFamily(lambda n: 1.0 / (n + 1.0), {}, formula="1/(n+1)"),
    "inverse_factorial": BuiltinFamily(
        _inverse_factorial,
        {},
        log_fn=lambda n: (np.ones_like(n), -special.gammaln(n + 1.0)),
        formula="1/n!",
    ),
    "geometric": BuiltinFamily(
        lambda n, r: np.power(r, n), {"r": 0.5}, log_fn=_geometric_log, formula="r^n"
    ),
    "euler_weight": BuiltinFamily(
        _euler_weight,
        {"r": 0.5},
        log_fn=_euler_weight_log,
        check=_check_nonnegative("r"),
        formula="r^n/n!",
    ),
    "cesaro_weight": BuiltinFamily(
        lambda n, k: special.binom(n + k - 1.0, n),
        {"k": 1.0},
        check=_check_positive("k"),
        formula="Gamma(n+k)/(Gamma(n+1)Gamma(k))",
    ),
    "log_shift": BuiltinFamily(lambda n: np.log(n + 2.0), {}, formula="log(n+2)"),
    "log_ratio": BuiltinFamily(
        lambda n: np.log(n + 2.0) / (n + 2.0), {}, formula="log(n+2)/(n+2)"
    ),
    "constant": BuiltinFamily(lambda n, c: np.full_like(n, c), {"c": 1.0}, formula="c"),
    "single": BuiltinFamily(
        lambda n, index: (n == index).astype(float),
        {"index": 0.0},
        check=_check_nonnegative_int("index"),
        formula="[n=index]",
    ),
}


@dataclass(frozen=True)
class Builtin(SequenceSpec):
    name: str
    params: Tuple[Tuple[str, float], ...] = ()
    domain_start: int = 0

    def __post_init__(self):
        family = BUILTINS.get(self.name)
        if family is None:
            raise ParameterError(f"unknown builtin sequence: {self.name}")
        unknown = set(dict(self.params)) - set(family.defaults)
        if unknown:
            raise ParameterError(
                f"unknown parameter(s) for {self.name}: {', '.join(sorted(unknown))}"
            )
        if family.check:
            family.check(self.param_dict)

    @property
    def family(self) -> BuiltinFamily:
        return BUILTINS[self.name]

    @property
    def param_dict(self) -> Dict[str, float]:
        merged = dict(BUILTINS[self.name].defaults)
        merged.update(dict(self.params))
        return merged

    def _compute(self, n):
        return np.asarray(self.family.fn(n, **self.param_dict), dtype=float)

    def _log_compute(self, n):
        if self.family.log_fn is None:
            return None
        sign, logabs = self.family.log_fn(n, **self.param_dict)
        return np.asarray(sign, dtype=float), np.asarray(logabs, dtype=float)

    def describe(self):
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.name}({args})"


def builtin(name: str, domain_start: int = 0, **params: float) -> Builtin:
    """Build a builtin sequence with keyword parameters."""
    items = tuple(sorted((k, float(v)) for k, v in params.items()))
    return Builtin(name, items, domain_start)


@dataclass(frozen=True)
class Prefix(SequenceSpec):
    """An explicit prefix continued by a tail rule."""

    values: Tuple[float, ...]
    tail: str = "zero"
    tail_value: float = 0.0
    domain_start: int = 0

    def __post_init__(self):
        if self.tail not in TAIL_RULES:
            raise ParameterError(f"unknown tail rule {self.tail!r}, expected one of {TAIL_RULES}")

    def _compute(self, n):
        head = np.asarray(self.values, dtype=float)
        if len(n) > len(head) and self.tail == "error":
            raise SequenceError(
                f"prefix of length {len(head)} has no term {len(n) - 1} (tail=error)"
            )
        fill = self.tail_value if self.tail == "constant" else 0.0
        out = np.full(len(n), fill, dtype=float)
        m = min(len(head), len(n))
        out[:m] = head[:m]
        return out

    def describe(self):
        head = ",".join(f"{v:g}" for v in self.values)
        tail = f"const({self.tail_value:g})" if self.tail == "constant" else self.tail
        return f"[{head}]+{tail}"


@dataclass(frozen=True)
class Expr(SequenceSpec):
    """Closed form in the variable ``n``, e.g. ``sq(n+1)`` or ``log(n+2)/(n+2)``."""

    text: str
    domain_start: int = 0

    def __post_init__(self):
        compile_expression(self.text, "n")

    def _compute(self, n):
        fn = compile_expression(self.text, "n")
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(fn(n), dtype=float), n.shape).copy()

    def describe(self):
        return self.text


@dataclass(frozen=True)
class CauchyProduct(SequenceSpec):
    """(left * right)_n, the Cauchy convolution as a sequence in its own right."""

    left: SequenceSpec
    right: SequenceSpec
    domain_start: int = 0

    def _compute(self, n):
        from .convolution import cauchy_prefix

        N = len(n) - 1
        return cauchy_prefix(values(self.left, N), values(self.right, N))

    def describe(self):
        return f"({self.left.describe()} * {self.right.describe()})"


@dataclass(frozen=True)
class Difference(SequenceSpec):
    """First differences with the convention diff_0 = base_0."""

    base: SequenceSpec
    domain_start: int = 0

    def _compute(self, n):
        return np.diff(values(self.base, len(n) - 1), prepend=0.0)

    def describe(self):
        return f"diff({self.base.describe()})"


@dataclass(frozen=True)
class Sampled(SequenceSpec):
    """A real function sampled at the integers, s_n = fn(n)."""

    fn: Callable[[np.ndarray], np.ndarray]
    label: str
    domain_start: int = 0

    def _compute(self, n):
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(self.fn(n), dtype=float), n.shape).copy()

    def describe(self):
        return self.label


# ---------------------------------------------------------------------------
# Closed-form expressions
# ---------------------------------------------------------------------------

_EXPR_FUNCTIONS: Dict[str, Callable[..., Any]] = {
    "sq": np.square,
    "sqrt": np.sqrt,
    "log": np.log,
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
    "floor": np.floor,
    "ceil": np.ceil,
    "gamma": special.gamma,
    "lgamma": special.gammaln,
    "factorial": special.factorial,
    "binom": special.binom,
    "min": np.minimum,
    "max": np.maximum,
}

_EXPR_CONSTANTS = {"pi": math.pi, "e": math.e}

_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.Mod,
    ast.FloorDiv,
    ast.USub,
    ast.UAdd,
)

_compiled_expressions: Dict[Tuple[str, str], Callable[[np.ndarray], np.ndarray]] = {}


def compile_expression(text: str, variable: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile a restricted arithmetic expression in one variable.

    Only numbers, ``+ - * / ** % //``, the names in ``_EXPR_FUNCTIONS`` and
    ``_EXPR_CONSTANTS`` and the variable itself are accepted.
    """
    key = (text, variable)
    if key in _compiled_expressions:
        return _compiled_expressions[key]
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as e:
        raise ParameterError(f"cannot parse expression {text!r}: {e.msg}") from e

    allowed_names = set(_EXPR_FUNCTIONS) | set(_EXPR_CONSTANTS) | {variable}
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ParameterError(
                f"expression {text!r} uses unsupported syntax {type(node).__name__}"
            )
        if isinstance(node, ast.Name) and node.id not in allowed_names:
            raise ParameterError(f"expression {text!r} uses unknown name {node.id!r}")
        if isinstance(node, ast.Call) and not (
            isinstance(node.func, ast.Name) and node.func.id in _EXPR_FUNCTIONS
        ):
            raise ParameterError(f"expression {text!r} calls an unknown function")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ParameterError(f"expression {text!r} contains a non-numeric constant")

    code = compile(tree, f"<expr {text}>", "eval")
    namespace: Dict[str, Any] = {"__builtins__": {}}
    namespace.update(_EXPR_FUNCTIONS)
    namespace.update(_EXPR_CONSTANTS)

    def fn(x):
        out = eval(code, namespace, {variable: x})
        if np.ndim(out) != np.ndim(x):
            # constant expressions still map arrays to arrays
            out = np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)).copy()
        return out

    _compiled_expressions[key] = fn
    return fn


# ---------------------------------------------------------------------------
# Materialization
# ---------------------------------------------------------------------------


class _PrefixCache:
    """Memoized prefixes, shared across threads."""

    def __init__(self, max_entries: int = 512):
        self._lock = threading.Lock()
        self._store: "OrderedDict[SequenceSpec, np.ndarray]" = OrderedDict()
        self.max_entries = max_entries

    def get(self, spec: SequenceSpec, N: int) -> np.ndarray:
        with self._lock:
            cached = self._store.get(spec)
            if cached is not None and len(cached) > N:
                self._store.move_to_end(spec)
                return cached[: N + 1]

        arr = _materialize(spec, N)
        arr.setflags(write=False)
        with self._lock:
            current = self._store.get(spec)
            if current is None or len(current) < len(arr):
                self._store[spec] = arr
                self._store.move_to_end(spec)
                while len(self._store) > self.max_entries:
                    self._store.popitem(last=False)
        return arr

    def clear(self):
        with self._lock:
            self._store.clear()


_cache = _PrefixCache()


def _materialize(spec: SequenceSpec, N: int) -> np.ndarray:
    n = np.arange(N + 1, dtype=float)
    out = np.zeros(N + 1, dtype=float)
    start = spec.domain_start
    if start <= N:
        computed = spec._compute(n)
        out[start:] = computed[start:]
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        raise SequenceError(f"{spec.describe()}: non-finite term at n={int(bad[0])}")
    log.debug("materialized %s up to n=%d", spec.describe(), N)
    return out


def values(seq: SequenceLike, N: int) -> np.ndarray:
    """Prefix ``seq_0..seq_N`` as a float64 array (read-only for specs)."""
    if N < 0:
        raise ParameterError(f"horizon must be non-negative, got {N}")
    if isinstance(seq, SequenceSpec):
        return _cache.get(seq, N)
    arr = np.asarray(seq, dtype=float)
    if arr.ndim != 1:
        raise ParameterError("sequence arrays must be one-dimensional")
    if len(arr) <= N:
        raise SequenceError(f"array of length {len(arr)} has no term {N}")
    return arr[: N + 1]


def log_values(seq: SequenceLike, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sign and natural log of |seq_n| for n <= N (log 0 = -inf).

    Factorial and geometric families are evaluated in log space directly, so
    terms that would underflow as plain floats keep their magnitude.
    """
    if isinstance(seq, SequenceSpec):
        n = np.arange(N + 1, dtype=float)
        native = seq._log_compute(n)
        if native is not None:
            sign, logabs = native
            if seq.domain_start:
                sign = sign.copy()
                logabs = logabs.copy()
                sign[: seq.domain_start] = 0.0
                logabs[: seq.domain_start] = -np.inf
            return sign, logabs
    v = values(seq, N)
    with np.errstate(divide="ignore"):
        return np.sign(v), np.log(np.abs(v))


def eval_sequence(spec: SequenceSpec, n: int) -> float:
    """The n-th term of ``spec``."""
    if n < spec.domain_start:
        raise SequenceError(
            f"{spec.describe()} starts at n={spec.domain_start}, asked for n={n}"
        )
    return float(values(spec, n)[n])


def is_constant_one(seq: SequenceLike) -> bool:
    return isinstance(seq, Builtin) and seq.name == "one" and seq.domain_start == 0


def is_unit_impulse(seq: SequenceLike) -> bool:
    return isinstance(seq, Builtin) and seq.name == "delta" and seq.domain_start == 0


def clear_cache():
    _cache.clear()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_PREFIX_RE = re.compile(r"^\[(?P<body>[^\]]*)\](?:\+(?P<tail>\w+)(?:\((?P<arg>[^)]*)\))?)?$")
_CALL_RE = re.compile(r"^(?P<name>[A-Za-z_]\w*)(?:\((?P<args>[^()]*)\))?$")


def _parse_params(args: str) -> Dict[str, float]:
    params: Dict[str, float] = {}
    for item in filter(None, (a.strip() for a in args.split(","))):
        if "=" not in item:
            raise ParameterError(f"expected key=value, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        try:
            params[key] = float(raw)
        except ValueError as e:
            raise ParameterError(f"parameter {key} is not a number: {raw!r}") from e
    return params


def parse_sequence(text: str, named: Optional[Mapping[str, Any]] = None) -> SequenceSpec:
    """Parse a command-line sequence.

    Accepted forms, tried in order: a name from ``named`` (config ``sequences``),
    ``[3,1,4]`` with optional ``+zero``, ``+error`` or ``+const(x)`` tail, a builtin
    name with optional ``(key=value, ...)`` parameters, and otherwise a closed-form
    expression in ``n``.
    """
    text = text.strip()
    if named and text in named:
        return from_config_entry(named[text])

    match = _PREFIX_RE.match(text)
    if match:
        try:
            head = tuple(float(x) for x in match["body"].split(",") if x.strip())
        except ValueError as e:
            raise ParameterError(f"bad prefix {text!r}") from e
        tail = match["tail"] or "zero"
        if tail == "const":
            return Prefix(head, "constant", float(match["arg"] or 0.0))
        return Prefix(head, tail)

    match = _CALL_RE.match(text)
    if match and match["name"] in BUILTINS:
        return builtin(match["name"], **_parse_params(match["args"] or ""))

    return Expr(text)


def from_config_entry(entry: Any) -> SequenceSpec:
    """Build a spec from a ``sequences:`` config entry (mapping or string)."""
    if isinstance(entry, str):
        return parse_sequence(entry)
    if not isinstance(entry, Mapping):
        raise ParameterError(f"sequence definition must be a mapping, got {entry!r}")
    kind = entry.get("kind", "builtin")
    start = int(entry.get("domain_start", 0))
    if kind == "builtin":
        params = {k: float(v) for k, v in (entry.get("params") or {}).items()}
        return builtin(entry["name"], domain_start=start, **params)
    if kind == "prefix":
        return Prefix(
            tuple(float(v) for v in entry["values"]),
            entry.get("tail", "zero"),
            float(entry.get("tail_value", 0.0)),
            start,
        )
    if kind == "expr":
        return Expr(entry["text"], start)
    raise ParameterError(f"unknown sequence kind {kind!r}")


# ---------------------------------------------------------------------------
# Weight triples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightTriple:
    """The (p, q, u) defining a (V, p_n, q_n, u_n) mean."""

    p: SequenceSpec
    q: SequenceSpec
    u: SequenceSpec
    label: str = ""

    @property
    def v(self) -> Difference:
        """v_n = u_n - u_{n-1}, v_0 = u_0."""
        return Difference(self.u)

    @property
    def m(self) -> Difference:
        """m_n = q_n - q_{n-1}, m_0 = q_0."""
        return Difference(self.q)

    def u_values(self, N: int, start: int = 0) -> np.ndarray:
        u = values(self.u, N)
        zeros = np.flatnonzero(u[start:] == 0.0)
        if zeros.size:
            raise SequenceError(f"{self.name}: u_n = 0 at n={int(zeros[0]) + start}")
        return u

    @property
    def name(self) -> str:
        return self.label or f"(V,{self.p},{self.q},{self.u})"

    def describe(self) -> str:
        return self.name
