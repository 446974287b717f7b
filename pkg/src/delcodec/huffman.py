"""Canonical Huffman coding over (fx, fy) pair symbols.

Codes are canonical: symbols sorted by (length, symbol), codewords
assigned in that order, so a table is fully determined by its
(symbol, length) records.  A single-symbol alphabet gets code length 0
and encodes to an empty payload; the symbol count carried alongside the
bitstream restores the stream.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError

MAX_CODE_LENGTH = 64


@dataclass
class HuffmanTable:
    symbols: list  # hashable symbols, e.g. (fx, fy) tuples
    lengths: list[int]
    codes: dict = field(init=False)  # symbol -> (code, length)

    def __post_init__(self):
        if len(self.symbols) != len(self.lengths):
            raise ValueError("symbols and lengths differ in size")
        if not self.symbols:
            raise ValueError("empty symbol alphabet")
        if len(self.symbols) == 1:
            if self.lengths[0] != 0:
                raise FormatError("single-symbol table must have code length 0")
            self.codes = {self.symbols[0]: (0, 0)}
            return
        if any(ln < 1 or ln > MAX_CODE_LENGTH for ln in self.lengths):
            raise FormatError("code length out of range")
        kraft = sum(2 ** (MAX_CODE_LENGTH - ln) for ln in self.lengths)
        if kraft > 2 ** MAX_CODE_LENGTH:
            raise FormatError("Kraft inequality violated")
        order = sorted(range(len(self.symbols)),
                       key=lambda i: (self.lengths[i], self.symbols[i]))
        self.codes = {}
        code = 0
        prev_len = 0
        for i in order:
            ln = self.lengths[i]
            code <<= ln - prev_len
            self.codes[self.symbols[i]] = (code, ln)
            code += 1
            prev_len = ln

    def expected_length(self, weights: dict) -> float:
        return sum(w * self.codes[s][1] for s, w in weights.items())


def build_table(counts: dict) -> HuffmanTable:
    """Huffman code lengths from symbol counts, canonicalized."""
    items = [(c, s) for s, c in counts.items() if c > 0]
    if not items:
        raise ValueError("no symbols with positive count")
    if len(items) == 1:
        return HuffmanTable([items[0][1]], [0])
    # heap entries carry a tiebreak counter so symbols never compare
    heap = [(c, i, s, None) for i, (c, s) in enumerate(sorted(items, key=lambda x: (x[0], x[1])))]
    heapq.heapify(heap)
    tick = len(heap)
    while len(heap) > 1:
        c1, _, s1, k1 = heapq.heappop(heap)
        c2, _, s2, k2 = heapq.heappop(heap)
        heapq.heappush(heap, (c1 + c2, tick, None, ((s1, k1), (s2, k2))))
        tick += 1
    lengths = {}

    def walk(sym, kids, depth):
        if sym is not None:
            lengths[sym] = max(depth, 1)
            return
        for child_sym, child_kids in kids:
            walk(child_sym, child_kids, depth + 1)

    _, _, root_sym, root_kids = heap[0]
    walk(root_sym, root_kids, 0)
    syms = sorted(lengths)
    return HuffmanTable(syms, [lengths[s] for s in syms])


def encode_stream(stream, table: HuffmanTable) -> tuple[bytes, int]:
    """Encode symbols to MSB-first bytes; returns (payload, bit count)."""
    codes = table.codes
    acc = 0
    nbits = 0
    out = bytearray()
    total_bits = 0
    try:
        for sym in stream:
            code, ln = codes[sym]
            acc = (acc << ln) | code
            nbits += ln
            total_bits += ln
            while nbits >= 8:
                nbits -= 8
                out.append((acc >> nbits) & 0xFF)
            acc &= (1 << nbits) - 1
    except KeyError as exc:
        raise ValueError(f"symbol {exc.args[0]!r} not in table") from None
    if nbits:
        out.append((acc << (8 - nbits)) & 0xFF)
    return bytes(out), total_bits


def decode_stream(payload: bytes, bit_count: int, table: HuffmanTable,
                  symbol_count: int) -> list:
    """Decode exactly symbol_count symbols from an MSB-first bitstream."""
    if symbol_count < 0:
        raise FormatError("negative symbol count")
    if len(table.symbols) == 1:
        if bit_count != 0:
            raise FormatError("single-symbol payload must be empty")
        return [table.symbols[0]] * symbol_count
    if bit_count > len(payload) * 8:
        raise FormatError("payload shorter than declared bit count")
    # canonical decode: per length, the first code and the sorted symbols
    by_len = {}
    for sym, (code, ln) in table.codes.items():
        by_len.setdefault(ln, []).append((code, sym))
    first_code = {}
    syms_at = {}
    for ln, entries in by_len.items():
        entries.sort()
        first_code[ln] = entries[0][0]
        syms_at[ln] = [s for _, s in entries]
    max_len = max(by_len)
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))[:bit_count]
    out = []
    pos = 0
    code = 0
    ln = 0
    for _ in range(symbol_count):
        code = 0
        ln = 0
        while True:
            if pos >= bit_count:
                raise FormatError("truncated bitstream")
            code = (code << 1) | int(bits[pos])
            pos += 1
            ln += 1
            if ln > max_len:
                raise FormatError("invalid code in bitstream")
            if ln in first_code:
                idx = code - first_code[ln]
                if 0 <= idx < len(syms_at[ln]):
                    out.append(syms_at[ln][idx])
                    break
    return out
