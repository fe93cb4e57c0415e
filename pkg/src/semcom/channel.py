"""Bit transport: prefix-code serialization and a binary erasure channel with
per-bit feedback retransmission.

Erased bits are retransmitted until delivered, so the payload always arrives
intact and the expected channel uses per payload bit are 1 / (1 - p_e).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import (
    InvalidParamsError,
    InvalidPrefixError,
    TruncatedStreamError,
    UnknownSymbolError,
)
from .probs import Rng
from .system1 import Codebook, SemanticRep


@dataclass(frozen=True)
class ChannelSpec:
    """Erasure probability plus the (always-on) feedback retransmission flag."""

    erasure_prob: float
    feedback: bool = True

    def __post_init__(self):
        if not 0 <= self.erasure_prob < 1:
            raise InvalidParamsError("erasure probability must lie in [0, 1)")
        if not self.feedback:
            raise InvalidParamsError("only feedback retransmission is supported")


@dataclass(frozen=True)
class TransmissionLog:
    """Accounting for one payload: channel uses = payload bits + erasures."""

    payload_bits: int
    total_channel_uses: int
    erasures: int

    def __post_init__(self):
        if self.total_channel_uses != self.payload_bits + self.erasures:
            raise InvalidParamsError("channel uses must equal payload bits plus erasures")
        if self.total_channel_uses < self.payload_bits:
            raise InvalidParamsError("channel uses cannot undercut payload bits")


def transmit(bits: str, spec: ChannelSpec, rng: Rng) -> tuple[str, TransmissionLog]:
    """Send a bit string through the erasure channel, retransmitting per bit.

    Delivery is exact (erasures are detected and resent), so the returned
    payload equals the input; the log counts every channel use.
    """
    n = len(bits)
    if n == 0:
        raise InvalidParamsError("cannot transmit an empty bit string")
    if spec.erasure_prob == 0:
        total = n
    else:
        # Channel uses per bit follow a geometric law with success 1 - p_e.
        total = int(rng.generator.geometric(1.0 - spec.erasure_prob, size=n).sum())
    return bits, TransmissionLog(payload_bits=n, total_channel_uses=total, erasures=total - n)


def encode_sr(sr: SemanticRep | Iterable[int], codebook: Codebook) -> str:
    """Concatenate the codewords of a semantic representation's symbols."""
    symbols = sr.symbols if isinstance(sr, SemanticRep) else tuple(sr)
    out = []
    for s in symbols:
        word = codebook.code.get(s)
        if word is None:
            raise UnknownSymbolError(f"symbol {s} has no codeword")
        out.append(word)
    return "".join(out)


def decode_sr(bits: str, codebook: Codebook) -> list[int]:
    """Invert encode_sr by walking the prefix code."""
    by_word = {w: s for s, w in codebook.code.items()}
    max_len = max((len(w) for w in by_word), default=0)
    symbols: list[int] = []
    word = ""
    for b in bits:
        if b not in "01":
            raise InvalidPrefixError(f"invalid bit {b!r}")
        word += b
        if word in by_word:
            symbols.append(by_word[word])
            word = ""
        elif len(word) >= max_len:
            raise InvalidPrefixError(f"prefix {word!r} starts no codeword")
    if word:
        raise TruncatedStreamError(f"stream ended inside codeword prefix {word!r}")
    return symbols
