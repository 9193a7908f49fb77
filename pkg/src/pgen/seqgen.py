"""Deterministic symbol sources over a finite alphabet {0, .., b-1}.

Every source is restartable: reading the first N symbols twice yields
identical output, and positions are numbered from 1.  Families provided:

* integer-concatenation streams (Champernowne, Fibonacci),
* automatic term functions (Thue-Morse, Rudin-Shapiro) sampled along squares,
* a seeded exactly-uniform pseudo-random stream,
* file-backed streams in two on-disk formats (``pgen-ascii``, ``PGENSEQ``
  packed binary).
"""

from __future__ import annotations

import os
import re
import struct
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DataFormatError, UsageError

_CHUNK = 1 << 16
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

ASCII_SYMBOLS = "0123456789abcdefghijklmnopqrstuvwxyz"
PACKED_MAGIC = b"PGENSEQ\0"
PACKED_HEADER_LEN = len(PACKED_MAGIC) + 4 + 8

ASCII_FORMAT = "ascii-digits"
PACKED_FORMAT = "packed-binary"


@dataclass(frozen=True)
class Alphabet:
    """Finite alphabet of ``b`` symbols, represented as integers 0..b-1."""

    b: int

    def __post_init__(self) -> None:
        if self.b < 2:
            raise UsageError(f"alphabet needs at least 2 symbols, got b={self.b}")

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.uint8) if self.b <= 256 else np.dtype(np.int64)

    def validate(self, symbols: np.ndarray) -> None:
        if symbols.size and (int(symbols.min()) < 0 or int(symbols.max()) >= self.b):
            bad = int(np.argmax((symbols < 0) | (symbols >= self.b)))
            raise DataFormatError(
                f"symbol {int(symbols[bad])} at index {bad} outside alphabet 0..{self.b - 1}"
            )


BINARY = Alphabet(2)


class SymbolSource:
    """Stateful reader over an underlying deterministic symbol stream.

    Subclasses implement :meth:`_generate`, an iterator of numpy chunks
    starting at position 1.  ``read`` consumes from the cursor, ``restart``
    rewinds to position 1, and ``prefix(n)`` is restart-plus-read, so two
    calls with the same ``n`` always agree.
    """

    def __init__(self, source_id: str, alphabet: Alphabet):
        self.id = source_id
        self.alphabet = alphabet
        self.restart()

    def _generate(self) -> Iterator[np.ndarray]:
        raise NotImplementedError

    def restart(self) -> None:
        self._chunks = self._generate()
        self._pending: np.ndarray | None = None
        self.position = 1

    def read(self, n: int) -> np.ndarray:
        """Return the next ``n`` symbols and advance the cursor."""
        out = np.empty(n, dtype=self.alphabet.dtype)
        filled = 0
        while filled < n:
            if self._pending is None or self._pending.size == 0:
                try:
                    self._pending = next(self._chunks)
                except StopIteration:
                    raise DataFormatError(
                        f"source '{self.id}' exhausted: required {self.position + n - 1} "
                        f"symbols but only {self.position + filled - 1} are available"
                    ) from None
            take = min(n - filled, self._pending.size)
            out[filled : filled + take] = self._pending[:take]
            self._pending = self._pending[take:]
            filled += take
        self.position += n
        return out

    def prefix(self, n: int) -> np.ndarray:
        """Symbols at positions 1..n, independent of previous reads."""
        self.restart()
        return self.read(n)


def _digits(value: int, base: int) -> list[int]:
    """Base-``base`` digits of a positive integer, most significant first."""
    if base == 10:
        return [ord(c) - 48 for c in str(value)]
    if base == 2:
        return [ord(c) - 48 for c in bin(value)[2:]]
    out: list[int] = []
    while value > 0:
        value, r = divmod(value, base)
        out.append(r)
    out.reverse()
    return out


class ChampernowneSource(SymbolSource):
    """Concatenated base-b representations of 1, 2, 3, .. with no leading zeros."""

    def __init__(self, alphabet: Alphabet):
        super().__init__(f"champernowne-b{alphabet.b}", alphabet)

    def _generate(self) -> Iterator[np.ndarray]:
        b = self.alphabet.b
        dtype = self.alphabet.dtype
        ndigits = 1
        while True:
            lo, hi = b ** (ndigits - 1), b**ndigits - 1
            if ndigits == 1:
                lo = 1
            if hi < 1 << 62:
                powers = np.array([b**t for t in range(ndigits - 1, -1, -1)], dtype=np.int64)
                start = lo
                while start <= hi:
                    stop = min(hi, start + _CHUNK - 1)
                    block = np.arange(start, stop + 1, dtype=np.int64)
                    yield ((block[:, None] // powers) % b).astype(dtype).ravel()
                    start = stop + 1
            else:
                # beyond int64 range: one integer at a time
                for value in range(lo, hi + 1):
                    yield np.array(_digits(value, b), dtype=dtype)
            ndigits += 1


class FibonacciConcatSource(SymbolSource):
    """Concatenated base-b digits of F1=1, F2=1, F3=2, F4=3, 5, 8, 13, .."""

    def __init__(self, alphabet: Alphabet):
        super().__init__(f"fibonacci-b{alphabet.b}", alphabet)

    def _generate(self) -> Iterator[np.ndarray]:
        b = self.alphabet.b
        dtype = self.alphabet.dtype
        prev, cur = 0, 1
        buf: list[int] = []
        while True:
            buf.extend(_digits(cur, b))
            prev, cur = cur, prev + cur
            if len(buf) >= _CHUNK:
                yield np.array(buf, dtype=dtype)
                buf = []


def thue_morse_term(n):
    """Parity of the number of 1-bits in the binary expansion of ``n``.

    Accepts a non-negative int or an integer ndarray.
    """
    if isinstance(n, np.ndarray):
        return (np.bitwise_count(n.astype(np.uint64)) & 1).astype(np.uint8)
    return int(n).bit_count() & 1


def rudin_shapiro_term(n):
    """Parity of the number of (overlapping) "11" factors in binary ``n``.

    Accepts a non-negative int or an integer ndarray.
    """
    if isinstance(n, np.ndarray):
        m = n.astype(np.uint64)
        return (np.bitwise_count(m & (m >> np.uint64(1))) & 1).astype(np.uint8)
    m = int(n)
    return (m & (m >> 1)).bit_count() & 1


class TermFunctionSource(SymbolSource):
    """Source emitting ``index_map(1), index_map(2), ..`` through a term function."""

    def __init__(
        self,
        source_id: str,
        alphabet: Alphabet,
        term_fn: Callable,
        index_map: Callable | None = None,
    ):
        self._term_fn = term_fn
        self._index_map = index_map
        super().__init__(source_id, alphabet)

    def _eval(self, idx: np.ndarray) -> np.ndarray:
        if self._index_map is not None:
            idx = self._index_map(idx)
        try:
            vals = self._term_fn(idx)
            vals = np.asarray(vals)
            if vals.shape != idx.shape:
                raise TypeError
        except TypeError:
            vals = np.array([self._term_fn(int(i)) for i in np.asarray(idx).ravel()])
        return vals.astype(self.alphabet.dtype)

    def _generate(self) -> Iterator[np.ndarray]:
        n = 1
        while True:
            idx = np.arange(n, n + _CHUNK, dtype=np.int64)
            yield self._eval(idx)
            n += _CHUNK


def along_squares(term_fn: Callable, alphabet: Alphabet = BINARY, name: str = "term") -> SymbolSource:
    """Source emitting term_fn(1), term_fn(4), term_fn(9), .. i.e. along n**2 for n >= 1."""
    return TermFunctionSource(
        f"{name}-squares-b{alphabet.b}", alphabet, term_fn, index_map=lambda idx: idx * idx
    )


def _splitmix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (Steele, Lea & Flood mixer)."""
    z = x.copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1E4758B5)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def derive_stream_seed(master_seed: int, index: int) -> int:
    """Counter-based 64-bit seed for substream ``index`` of ``master_seed``.

    mix(master, r) = splitmix64(master + (r + 1) * 0x9E3779B97F4A7C15 mod 2^64),
    the standard SplitMix64 output at counter r+1, so distinct indices give
    independent-looking seeds and the derivation is order-free.
    """
    x = np.uint64((master_seed + (index + 1) * _GOLDEN) & _MASK64)
    return int(_splitmix64(np.array([x], dtype=np.uint64))[0])


class IidUniformSource(SymbolSource):
    """Seeded stream, exactly uniform on 0..b-1.

    Generator algorithm (fixed, self-contained for cross-platform stability):
    the j-th 64-bit word (j >= 1) is ``splitmix64(seed + j*0x9E3779B97F4A7C15
    mod 2^64)`` where splitmix64 is the xor-multiply finalizer from the
    SplitMix64 generator.  Words are filtered by rejection sampling: a word w
    is accepted iff ``w < b * floor(2^64 / b)``, and then emits the symbol
    ``w mod b``.  Every residue class is therefore hit by exactly
    ``floor(2^64 / b)`` accepted words, making the symbol distribution
    exactly uniform, and the accepted subsequence of a fixed counter stream
    is deterministic and restartable.
    """

    def __init__(self, alphabet: Alphabet, seed: int):
        self.seed = seed & _MASK64
        super().__init__(f"iid-b{alphabet.b}-seed{self.seed}", alphabet)

    def _generate(self) -> Iterator[np.ndarray]:
        b = self.alphabet.b
        dtype = self.alphabet.dtype
        limit = np.uint64(((1 << 64) // b) * b - 1)  # accept w <= limit
        counter = 1
        base = np.uint64(self.seed)
        golden = np.uint64(_GOLDEN)
        while True:
            idx = np.arange(counter, counter + _CHUNK, dtype=np.uint64)
            counter += _CHUNK
            words = _splitmix64(base + idx * golden)
            words = words[words <= limit]
            if words.size:
                yield (words % np.uint64(b)).astype(dtype)


def champernowne_source(alphabet: Alphabet) -> SymbolSource:
    return ChampernowneSource(alphabet)


def fibonacci_concat_source(alphabet: Alphabet) -> SymbolSource:
    return FibonacciConcatSource(alphabet)


def iid_uniform_source(alphabet: Alphabet, seed: int) -> SymbolSource:
    return IidUniformSource(alphabet, seed)


class ArraySource(SymbolSource):
    """In-memory source over a fixed symbol array (finite)."""

    def __init__(self, symbols: Sequence[int] | np.ndarray, alphabet: Alphabet, source_id: str = "array"):
        arr = np.asarray(symbols)
        alphabet.validate(arr)
        self._symbols = arr.astype(alphabet.dtype)
        super().__init__(source_id, alphabet)

    def _generate(self) -> Iterator[np.ndarray]:
        yield self._symbols


# ---------------------------------------------------------------------------
# On-disk sequence formats
# ---------------------------------------------------------------------------

_ASCII_HEADER_RE = re.compile(rb"^pgen-ascii b=(\d+) n=(\d+)$")


def write_ascii(path: str | os.PathLike, b: int, symbols: np.ndarray) -> None:
    """Write the ascii-digits format: header line, then one char per symbol."""
    if b > 36:
        raise UsageError(f"ascii-digits format supports b <= 36, got b={b}")
    Alphabet(b).validate(np.asarray(symbols))
    table = np.frombuffer(ASCII_SYMBOLS.encode(), dtype=np.uint8)
    payload = table[np.asarray(symbols, dtype=np.int64)]
    with open(path, "wb") as fh:
        fh.write(f"pgen-ascii b={b} n={len(payload)}\n".encode())
        fh.write(payload.tobytes())


def read_ascii(path: str | os.PathLike) -> tuple[int, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise DataFormatError(f"{path}: missing ascii header line")
    m = _ASCII_HEADER_RE.match(raw[:nl])
    if not m:
        raise DataFormatError(f"{path}: bad ascii header {raw[:nl]!r}")
    b, n = int(m.group(1)), int(m.group(2))
    if b < 2 or b > 36:
        raise DataFormatError(f"{path}: ascii header b={b} outside 2..36")
    payload = np.frombuffer(raw, dtype=np.uint8, offset=nl + 1)
    if payload.size != n:
        raise DataFormatError(f"{path}: header says n={n} but payload has {payload.size} bytes")
    table = np.full(256, -1, dtype=np.int16)
    for value, ch in enumerate(ASCII_SYMBOLS):
        table[ord(ch)] = value
    vals = table[payload]
    bad = np.flatnonzero((vals < 0) | (vals >= b))
    if bad.size:
        i = int(bad[0])
        raise DataFormatError(
            f"{path}: symbol {chr(payload[i])!r} at offset {i} "
            f"(file byte {nl + 1 + i}) not in alphabet 0..{b - 1}"
        )
    return b, vals.astype(Alphabet(b).dtype)


def write_packed(path: str | os.PathLike, b: int, symbols: np.ndarray) -> None:
    """Write the packed-binary format: magic, <u32 b, <u64 count, then symbols
    packed ceil(log2 b) bits each, most significant bit first within a byte."""
    arr = np.asarray(symbols, dtype=np.int64)
    Alphabet(b).validate(arr)
    width = (b - 1).bit_length()
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    bits = ((arr[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    with open(path, "wb") as fh:
        fh.write(PACKED_MAGIC)
        fh.write(struct.pack("<IQ", b, arr.size))
        fh.write(np.packbits(bits, bitorder="big").tobytes())


def read_packed(path: str | os.PathLike) -> tuple[int, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < PACKED_HEADER_LEN:
        raise DataFormatError(
            f"{path}: truncated packed header ({len(raw)} bytes, need {PACKED_HEADER_LEN})"
        )
    if raw[: len(PACKED_MAGIC)] != PACKED_MAGIC:
        raise DataFormatError(f"{path}: bad magic {raw[:8]!r}")
    b, n = struct.unpack_from("<IQ", raw, len(PACKED_MAGIC))
    if b < 2:
        raise DataFormatError(f"{path}: packed header b={b} is not a valid alphabet size")
    width = (b - 1).bit_length()
    need_bytes = (n * width + 7) // 8
    payload = np.frombuffer(raw, dtype=np.uint8, offset=PACKED_HEADER_LEN)
    if payload.size < need_bytes:
        raise DataFormatError(
            f"{path}: payload truncated, {payload.size} bytes but {need_bytes} needed for n={n}"
        )
    bits = np.unpackbits(payload, bitorder="big")[: n * width].reshape(int(n), width)
    powers = (1 << np.arange(width - 1, -1, -1, dtype=np.int64))
    vals = bits.astype(np.int64) @ powers
    bad = np.flatnonzero(vals >= b)
    if bad.size:
        i = int(bad[0])
        raise DataFormatError(
            f"{path}: symbol value {int(vals[i])} at index {i} "
            f"(file byte {PACKED_HEADER_LEN + i * width // 8}) not in alphabet 0..{b - 1}"
        )
    return int(b), vals.astype(Alphabet(int(b)).dtype)


def file_source(
    path: str | os.PathLike,
    alphabet: Alphabet | None = None,
    fmt: str | None = None,
) -> SymbolSource:
    """Source backed by a sequence file.

    ``fmt`` is ``"ascii-digits"`` or ``"packed-binary"``; when omitted the
    format is sniffed from the leading bytes.  The whole file is decoded and
    validated eagerly so malformed data fails at construction.
    """
    if fmt is None:
        with open(path, "rb") as fh:
            head = fh.read(len(PACKED_MAGIC))
        fmt = PACKED_FORMAT if head == PACKED_MAGIC else ASCII_FORMAT
    if fmt == ASCII_FORMAT:
        b, symbols = read_ascii(path)
    elif fmt == PACKED_FORMAT:
        b, symbols = read_packed(path)
    else:
        raise UsageError(f"unknown sequence format {fmt!r}")
    if alphabet is not None and alphabet.b != b:
        raise DataFormatError(
            f"{path}: file alphabet b={b} does not match requested b={alphabet.b}"
        )
    return ArraySource(symbols, Alphabet(b), source_id=f"file:{os.path.basename(str(path))}")
