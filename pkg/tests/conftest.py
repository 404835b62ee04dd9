import io
from datetime import datetime, timezone

import pytest

from comention.ingest import Entity, EntityKind, Lexicon, suffix_tolerant_pattern


def ts(year, month=1, day=1, hour=12) -> datetime:
    return datetime(year, month, day, hour, tzinfo=timezone.utc)


@pytest.fixture
def bank_lexicon() -> Lexicon:
    """Small hand-built lexicon in the style of real deployments."""
    return Lexicon(
        [
            Entity("nordea", "Nordea", (suffix_tolerant_pattern("nordea"),)),
            Entity("sampo", "Danske/Sampo", (
                suffix_tolerant_pattern("sampo"),
                suffix_tolerant_pattern("danske"),
            )),
            Entity("op", "OP/Pohjola", (
                suffix_tolerant_pattern("osuuspankki"),
                suffix_tolerant_pattern("pohjola"),
            )),
            Entity("fiva", "Financial Supervisory Authority",
                   (suffix_tolerant_pattern("fiva"),), kind=EntityKind.SUPERVISOR),
        ]
    )


def corpus_stream(lines):
    """An in-memory corpus from raw NDJSON lines."""
    return io.StringIO("\n".join(lines) + "\n")
