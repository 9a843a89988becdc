from .builders import (
    BadIndex,
    BuildError,
    NotDecreasingWitness,
    UnsupportedNode,
    ackermann_index,
    build_addition,
    build_conditional,
    build_cosignum_from,
    build_family,
    build_sec6,
    translate_offset,
)
from .catalog import CatalogEntry, UnknownId, catalog_get, catalog_list

__all__ = [
    "BadIndex",
    "BuildError",
    "CatalogEntry",
    "NotDecreasingWitness",
    "UnknownId",
    "UnsupportedNode",
    "ackermann_index",
    "build_addition",
    "build_conditional",
    "build_cosignum_from",
    "build_family",
    "build_sec6",
    "catalog_get",
    "catalog_list",
    "translate_offset",
]
