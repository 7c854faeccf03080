"Reads and writes instance documents"

import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from .exceptions import InstanceError, InstanceParseError, SchemaVersionError
from .instance import AnyInstance, LCQPInstance, MILCQPInstance, Sense, validate
from .utils import FS, NEG_INF_TOKEN, POS_INF_TOKEN, decode_float, encode_float, logger

FORMAT_VERSION = 1

REQUIRED_FIELDS = ('version', 'n', 'm', 'Q', 'c', 'A', 'b', 'senses', 'l', 'u')
OPTIONAL_FIELDS = ('integer_set', 'meta')

DOCUMENT_ERRORS = [
    ('Missing comma between fields', ['{"n": 1 "m": 2}', '{"c": [1.0 2.0]}']),
    ('Trailing comma', ['{"n": 1,}', '{"c": [1.0,]}']),
    ('Unclosed bracket', ['{"c": [1.0, 2.0}', '{"c": [1.0']),
    ('Missing colon after field name', ['{"n" 1}']),
]


class _Object(dict):
    "A parsed object, remembering where each of its keys appeared"
    positions: Dict[str, Tuple[int, int]]


class _Member:
    __slots__ = ('key', 'value')

    def __init__(self, key: Token, value: Any):
        self.key = key
        self.value = value


@v_args(inline=True)
class DocumentTransformer(Transformer):
    def start(self, obj):
        return obj

    def string(self, s):
        return json.loads(s)

    def number(self, n):
        text = str(n)
        if any(ch in text for ch in '.eE'):
            return float(text)
        return int(text)

    def true(self):
        return True

    def false(self):
        return False

    def null(self):
        return None

    def member(self, key, value):
        return _Member(key, value)

    @v_args(inline=False)
    def array(self, items):
        return list(items)

    @v_args(inline=False)
    def object(self, members):
        obj = _Object()
        obj.positions = {}
        for m in members:
            name = json.loads(m.key)
            if name in obj:
                raise _Duplicate(name, m.key.line, m.key.column)
            obj[name] = m.value
            obj.positions[name] = (m.key.line, m.key.column)
        return obj


class _Duplicate(Exception):
    def __init__(self, name, line, column):
        self.name = name
        self.line = line
        self.column = column


def _get_parser() -> Lark:
    try:
        return _get_parser.cache  # type: ignore[attr-defined]
    except AttributeError:
        _get_parser.cache = Lark.open_from_package('qpgnn', 'instance.lark', ('grammars',), parser='lalr')  # type: ignore[attr-defined]
        return _get_parser.cache  # type: ignore[attr-defined]


def _parse_document(text: str, source: Optional[str]) -> _Object:
    parser = _get_parser()
    try:
        tree = parser.parse(text)
    except UnexpectedCharacters as e:
        raise InstanceParseError("Unexpected input %r" % text[e.pos_in_stream:e.pos_in_stream + 1],
                                 e.line, e.column, source=source)
    except UnexpectedToken as e:
        label = e.match_examples(parser.parse, DOCUMENT_ERRORS)
        if label is None:
            label = "Unexpected token %r" % str(e.token)
        raise InstanceParseError(label, e.line, e.column, source=source)
    except UnexpectedInput as e:
        raise InstanceParseError("Unexpected end of document", e.line, e.column, source=source)

    try:
        return DocumentTransformer().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, _Duplicate):
            d = e.orig_exc
            raise InstanceParseError("Duplicate field", d.line, d.column, d.name, source)
        raise


class _SchemaReader:
    "Turns a parsed document into an instance, reporting the position of the offending field"

    def __init__(self, doc: _Object, source: Optional[str]):
        self.doc = doc
        self.source = source

    def error(self, message: str, field: str, cls=InstanceParseError) -> InstanceParseError:
        line, column = self.doc.positions.get(field, (-1, -1))
        return cls(message, line, column, field, self.source)

    def integer(self, field: str) -> int:
        v = self.doc[field]
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise self.error("Expected a non-negative integer, got %r" % (v,), field)
        return v

    def vector(self, field: str, size: int, sentinels: Sequence[str] = ()) -> np.ndarray:
        v = self.doc[field]
        if not isinstance(v, list):
            raise self.error("Expected a list", field)
        if len(v) != size:
            raise self.error("Expected %d entries, got %d" % (size, len(v)), field)
        out = np.empty(size)
        for k, x in enumerate(v):
            if isinstance(x, str) and x in sentinels:
                out[k] = decode_float(x)
            elif isinstance(x, (int, float)) and not isinstance(x, bool):
                out[k] = float(x)
            else:
                raise self.error("Entry %d: unexpected value %r" % (k, x), field)
        return out

    def triplets(self, field: str, rows: int, cols: int, upper: bool) -> List[Tuple[int, int, float]]:
        v = self.doc[field]
        if not isinstance(v, list):
            raise self.error("Expected a list of [i, j, value] triplets", field)
        out = []
        last = None
        for k, t in enumerate(v):
            if not (isinstance(t, list) and len(t) == 3
                    and all(isinstance(i, int) and not isinstance(i, bool) for i in t[:2])
                    and isinstance(t[2], (int, float)) and not isinstance(t[2], bool)):
                raise self.error("Entry %d: expected [i, j, value], got %r" % (k, t), field)
            i, j, val = t[0], t[1], float(t[2])
            if not (0 <= i < rows and 0 <= j < cols):
                raise self.error("Entry %d: index (%d, %d) outside %dx%d" % (k, i, j, rows, cols), field)
            if upper and i > j:
                raise self.error("Entry %d: (%d, %d) is below the diagonal" % (k, i, j), field)
            if val == 0:
                raise self.error("Entry %d: stored zero at (%d, %d)" % (k, i, j), field)
            if last is not None and (i, j) <= last:
                raise self.error("Entry %d: triplets must be sorted row-major without duplicates" % k, field)
            last = (i, j)
            out.append((i, j, val))
        return out

    def read(self) -> AnyInstance:
        doc = self.doc
        for f in REQUIRED_FIELDS:
            if f not in doc:
                raise InstanceParseError("Missing field", field=f, source=self.source)
        unknown = sorted(set(doc) - set(REQUIRED_FIELDS) - set(OPTIONAL_FIELDS))
        if unknown:
            raise self.error("Unknown field", unknown[0])

        if doc['version'] != FORMAT_VERSION:
            raise self.error("Unsupported document version %r, expected %d" % (doc['version'], FORMAT_VERSION),
                             'version', SchemaVersionError)

        n = self.integer('n')
        m = self.integer('m')

        Q = np.zeros((n, n))
        for i, j, val in self.triplets('Q', n, n, upper=True):
            Q[i, j] = Q[j, i] = val
        A = np.zeros((m, n))
        for i, j, val in self.triplets('A', m, n, upper=False):
            A[i, j] = val

        senses_raw = doc['senses']
        if not isinstance(senses_raw, list) or len(senses_raw) != m:
            raise self.error("Expected %d sense tokens" % m, 'senses')
        tokens = [s.value for s in Sense]
        for k, s in enumerate(senses_raw):
            if s not in tokens:
                raise self.error("Entry %d: sense %r not in %s" % (k, s, tokens), 'senses')

        meta = doc.get('meta', {})
        if not isinstance(meta, dict):
            raise self.error("Expected an object", 'meta')

        base = LCQPInstance.create(
            Q, self.vector('c', n), A, self.vector('b', m), senses_raw,
            self.vector('l', n, (NEG_INF_TOKEN, POS_INF_TOKEN)),
            self.vector('u', n, (NEG_INF_TOKEN, POS_INF_TOKEN)),
            dict(meta),
        )
        if 'integer_set' not in doc:
            return base

        I = doc['integer_set']
        if not isinstance(I, list) or not all(isinstance(j, int) and not isinstance(j, bool) and 0 <= j < n for j in I):
            raise self.error("Expected a list of variable indices in 0..%d" % (n - 1), 'integer_set')
        if len(set(I)) != len(I):
            raise self.error("Repeated variable index", 'integer_set')
        return MILCQPInstance(base, frozenset(I))


def loads(text: str, source: Optional[str] = None) -> AnyInstance:
    doc = _parse_document(text, source)
    return _SchemaReader(doc, source).read()


def _num(x: float) -> str:
    v = encode_float(x)
    if isinstance(v, str):
        return json.dumps(v)
    return repr(v)


def _triplets(ts) -> str:
    return '[' + ', '.join('[%d, %d, %s]' % (i, j, _num(v)) for i, j, v in ts) + ']'


def _vector(xs) -> str:
    return '[' + ', '.join(_num(x) for x in xs) + ']'


def dumps(instance: AnyInstance) -> str:
    """Writes the canonical document of ``instance``.

    The output is a function of the instance alone: floats are written in their shortest
    round-trip form, Q only as its upper triangle, triplets sorted row-major.
    """
    base = instance.base
    fields = [
        ('version', str(FORMAT_VERSION)),
        ('n', str(base.n)),
        ('m', str(base.m)),
        ('Q', _triplets(base.q_triplets(upper=True))),
        ('c', _vector(base.c)),
        ('A', _triplets(base.a_triplets())),
        ('b', _vector(base.b)),
        ('senses', '[' + ', '.join(json.dumps(s.value) for s in base.senses) + ']'),
        ('l', _vector(base.l)),
        ('u', _vector(base.u)),
    ]
    if isinstance(instance, MILCQPInstance):
        fields.append(('integer_set', '[' + ', '.join(str(j) for j in sorted(instance.integer_set)) + ']'))
    if base.meta:
        fields.append(('meta', json.dumps(base.meta, sort_keys=True)))
    return '{\n' + ',\n'.join('  "%s": %s' % kv for kv in fields) + '\n}\n'


def read_instance(path: str) -> AnyInstance:
    with FS.open(path, encoding='utf-8') as f:
        text = f.read()
    return loads(text, source=path)


def write_instance(instance: AnyInstance, path: str) -> None:
    report = validate(instance)
    if not report.ok:
        raise InstanceError("Refusing to write an invalid instance to %s:\n%s" % (path, report), report)
    with FS.open(path, 'w', encoding='utf-8') as f:
        f.write(dumps(instance))
    logger.debug("Wrote %r to %s", instance, path)
