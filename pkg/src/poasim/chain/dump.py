"""
Canonical text dumps of chain views.

One block per line in canonical order, fields separated by single spaces:
``id parent sealer slot weight timestamp txs``. Absent values print as
``-`` and transactions are comma-separated ids. The format is stable and
used for golden-file comparison of replays.
"""

from __future__ import annotations

from collections.abc import Mapping

from poasim.chain.models import Block, ChainView


def dump_block(block: Block) -> str:
    """Render one block as a dump line."""
    if block.step is not None:
        slot = f"step={block.step}"
    else:
        slot = f"number={block.number}"
    fields = [
        block.id,
        block.parent or "-",
        str(block.sealer) if block.sealer is not None else "-",
        slot,
        f"weight={block.weight}" if block.weight is not None else "weight=-",
        f"ts={block.timestamp}",
        ",".join(tx.tx_id for tx in block.txs) or "-",
    ]
    return " ".join(fields)


def dump_view(view: ChainView) -> str:
    """Render the canonical branch of ``view``, genesis first."""
    return "\n".join(dump_block(block) for block in view.canonical) + "\n"


def dump_views(views: Mapping[int, ChainView]) -> str:
    """Render several endpoint views, ordered by endpoint id."""
    sections = []
    for endpoint in sorted(views):
        view = views[endpoint]
        sections.append(f"# endpoint {endpoint} head {view.head}\n{dump_view(view)}")
    return "".join(sections)
