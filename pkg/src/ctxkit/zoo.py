"""Built-in example models with golden expectations.

The expectations stored with each entry are re-derived by the test suite; they
are never used by the analyses themselves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from importlib import resources

from .errors import UnknownZooEntry
from .io import ModelDocument, document_to_model, parse_document

NAMES = ("hardy", "table3", "table7", "ks5", "fig3")


class ProvenanceWarning(UserWarning):
    """The entry was reconstructed rather than transcribed."""


@dataclass
class ZooEntry:
    name: str
    text: str
    document: ModelDocument

    @property
    def expected(self) -> dict:
        return self.document.metadata.get("expected", {})

    @property
    def provenance(self) -> str:
        return self.document.metadata.get("provenance", "")

    @property
    def warning(self) -> str | None:
        return self.document.metadata.get("warning")

    @cached_property
    def model(self):
        return document_to_model(self.document)


def zoo_text(name: str) -> str:
    if name not in NAMES:
        raise UnknownZooEntry(f"no zoo entry {name!r}; available: {', '.join(NAMES)}")
    return resources.files("ctxkit.data").joinpath(f"{name}.json").read_text(encoding="utf-8")


def zoo(name: str) -> ZooEntry:
    text = zoo_text(name)
    entry = ZooEntry(name, text, parse_document(text))
    if entry.warning:
        warnings.warn(f"zoo entry {name!r}: {entry.warning}", ProvenanceWarning, stacklevel=2)
    return entry


__all__ = ["NAMES", "ProvenanceWarning", "ZooEntry", "zoo", "zoo_text"]
