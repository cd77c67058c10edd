"""Python bindings for the collection curation engine.

The heavy lifting lives in the compiled ``_core`` module; this package
turns its JSON text results into plain Python values.
"""

import json

from ._core import Collection as _Collection
from ._core import DomainError
from ._core import import_source as _import_source
from ._core import normalize_script
from ._core import validate_package_json as _validate_package_json

__all__ = [
    "Collection",
    "DomainError",
    "import_source",
    "normalize_script",
    "validate_package",
]


class Collection:
    """Immutable collection value. Every mutating method returns a new one."""

    __slots__ = ("_core",)

    def __init__(self, core=None):
        self._core = core if core is not None else _Collection()

    @classmethod
    def load(cls, path):
        return cls(_Collection.load(str(path)))

    @classmethod
    def from_canonical(cls, text):
        return cls(_Collection.from_canonical(text))

    def save(self, path, as_zip=False):
        self._core.save(str(path), as_zip)

    @property
    def version(self):
        return self._core.version

    @property
    def type_count(self):
        return self._core.type_count

    @property
    def document_ids(self):
        return list(self._core.document_ids)

    @property
    def resource_ids(self):
        return list(self._core.resource_ids)

    def canonical(self):
        return self._core.canonical()

    def schema(self):
        return json.loads(self._core.schema_json())

    def document(self, doc_id):
        return json.loads(self._core.document_json(doc_id))

    def validate(self):
        return json.loads(self._core.validate_json())

    def log(self):
        return json.loads(self._core.log_json())

    def log_text(self):
        return self._core.log_text()

    def apply(self, op, timestamp=0):
        return Collection(self._core.apply(op, timestamp))

    def apply_script(self, text, timestamp=0):
        """Returns (collection, reports, failed_index); atomic on failure."""
        core, reports, failed = self._core.apply_script(text, timestamp)
        return Collection(core), json.loads(reports), failed

    def edit(self, command, timestamp=0):
        return Collection(self._core.edit(json.dumps(command), timestamp))

    def replay(self, text, timestamps=()):
        return Collection(self._core.replay(text, list(timestamps)))

    def export(self, profile):
        return self._core.export(json.dumps(profile))

    def __eq__(self, other):
        return isinstance(other, Collection) and self._core == other._core

    __hash__ = None

    def __repr__(self):
        return f"Collection(version={self.version}, types={self.type_count}, documents={len(self.document_ids)})"


def import_source(plugin, params, sink=None):
    """Runs an import plugin. Returns (collection, report dict)."""
    core, report = _import_source(plugin, {k: str(v) for k, v in params.items()}, sink._core if sink else _Collection())
    return Collection(core), json.loads(report)


def validate_package(archive):
    """Structural violations of an exported package; empty when valid."""
    return json.loads(_validate_package_json(bytes(archive)))
