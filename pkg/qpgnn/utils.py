import os
import json
import hashlib
import logging
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Type, TypeVar

from enum import Enum

import numpy as np

logger: logging.Logger = logging.getLogger("qpgnn")
logger.addHandler(logging.StreamHandler())
# Set to highest level, since solvers and training loops log from inside tight loops.
# By default, we should not output any log messages
logger.setLevel(logging.CRITICAL)


T = TypeVar("T")

POS_INF_TOKEN = "+inf"
NEG_INF_TOKEN = "-inf"


def classify(seq: Iterable, key: Optional[Callable] = None, value: Optional[Callable] = None) -> Dict:
    d: Dict[Any, Any] = {}
    for item in seq:
        k = key(item) if (key is not None) else item
        v = value(item) if (value is not None) else item
        try:
            d[k].append(v)
        except KeyError:
            d[k] = [v]
    return d


def canonical_ids(signatures: Sequence[Any]) -> Tuple[List[int], int]:
    """Maps each signature to its rank among the distinct signatures.

    Ranks depend only on the set of signatures, never on their order in ``signatures``,
    so two runs over the same vertices listed differently agree on every id.

    Returns:
        (ids, number of distinct signatures)
    """
    ranks = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
    return [ranks[sig] for sig in signatures], len(ranks)


def blocks_from_labels(labels: Sequence[int]) -> Tuple[Tuple[int, ...], ...]:
    "Groups indices by label, blocks ordered by their smallest member"
    groups = classify(range(len(labels)), key=lambda i: labels[i])
    return tuple(sorted((tuple(g) for g in groups.values()), key=lambda b: b[0]))


def encode_float(x: float) -> Any:
    if x == np.inf:
        return POS_INF_TOKEN
    if x == -np.inf:
        return NEG_INF_TOKEN
    return float(x)


def decode_float(x: Any) -> float:
    if x == POS_INF_TOKEN:
        return float('inf')
    if x == NEG_INF_TOKEN:
        return float('-inf')
    return float(x)


def _from_json(data: Any, namespace: Dict[str, Any]) -> Any:
    if isinstance(data, dict):
        if '__type__' in data:
            return namespace[data['__type__']].deserialize(data)
        return {key: _from_json(value, namespace) for key, value in data.items()}
    if isinstance(data, list):
        return [_from_json(value, namespace) for value in data]
    return data


def _to_json(value: Any) -> Any:
    if isinstance(value, Serialize):
        return value.serialize()
    if isinstance(value, np.ndarray):
        return [_to_json(elem) for elem in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_to_json(elem) for elem in value]
    if isinstance(value, frozenset):
        return sorted(value)
    if isinstance(value, dict):
        return {key: _to_json(elem) for key, elem in value.items()}
    if isinstance(value, (float, np.floating)):
        return encode_float(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Enum):
        return value.value
    return value


_T = TypeVar("_T", bound="Serialize")


class Serialize:
    """JSON documents for solve results, labels, partitions, reports and checkpoints.

    Attributes:
        __serialize_fields__: attributes written to the document, in order
        __serialize_namespace__: classes of nested ``Serialize`` values that loading may build

    Every document carries a ``__type__`` tag. After loading, the raw JSON values are set on a
    fresh instance and ``_deserialize()``, when defined, converts them back to their types.
    """
    __serialize_fields__: Tuple[str, ...] = ()
    __serialize_namespace__: Tuple[type, ...] = ()

    def serialize(self) -> Dict[str, Any]:
        doc = {f: _to_json(getattr(self, f)) for f in self.__serialize_fields__}
        doc['__type__'] = type(self).__name__
        return doc

    @classmethod
    def deserialize(cls: Type[_T], data: Dict[str, Any]) -> _T:
        tag = data.get('__type__', cls.__name__)
        if tag != cls.__name__:
            raise TypeError("Expected a %s document, got %s" % (cls.__name__, tag))
        missing = [f for f in cls.__serialize_fields__ if f not in data]
        if missing:
            raise KeyError("%s document lacks %s" % (cls.__name__, ', '.join(missing)))

        namespace = {c.__name__: c for c in cls.__serialize_namespace__}
        inst = cls.__new__(cls)
        for f in cls.__serialize_fields__:
            object.__setattr__(inst, f, _from_json(data[f], namespace))
        if hasattr(inst, '_deserialize'):
            inst._deserialize()
        return inst

    def dumps(self) -> str:
        "Canonical JSON text (sorted keys), identical across runs for identical objects"
        return json.dumps(self.serialize(), sort_keys=True, indent=1) + '\n'


def sha256_digest(text: str) -> str:
    return hashlib.sha256(text.encode('utf8')).hexdigest()


try:
    import atomicwrites
    _has_atomicwrites = True
except ImportError:
    _has_atomicwrites = False

class FS:
    exists = staticmethod(os.path.exists)

    @staticmethod
    def open(name, mode="r", **kwargs):
        if _has_atomicwrites and "w" in mode:
            return atomicwrites.atomic_write(name, mode=mode, overwrite=True, **kwargs)
        else:
            return open(name, mode, **kwargs)

    @staticmethod
    def makedirs(path):
        os.makedirs(path, exist_ok=True)


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """A PCG64 generator for ``seed``, optionally split into an independent sub-stream.

    ``rng_for(seed, i)`` is the stream of the i-th item of a collection. It does not depend
    on how many items the collection has, so prefixes of collections agree.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *stream])))
