"""Message schema, binary frames and persistable session transcripts.

Every protocol message is a tagged frame: one byte of tag, a big-endian
u32 payload length, then the payload.  Payload primitives are big-endian:
u32 arrays are a u32 count followed by the values, bit fields are a u32
bit count followed by the bits packed most-significant-first and
left-padded to whole bytes, strings are a u16 length plus UTF-8 bytes.
Hash descriptors embed the seed in the same bit-field form; rendered as
text they use lowercase hex in big-endian bit order.

Tag table:
    1  SetsAnnounce    ordered position lists r0, r1 (0-based)
    2  IhQueryMsg      query index + m query bits
    3  IhResponseMsg   query index + one bit
    4  CheckAnnounce   routing bit a + announced output values for both sets
    5  StringsMsg      g0/g1 values + descriptors of g0, g1, h0, h1
    6  AbortMsg        protocol step + reason text

Transcripts persist as JSON lines, one message per line with hex payloads,
and parse back to an identical :class:`Transcript`.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import uhash
from .bits import bits_to_hex, hex_to_bits


class WireError(ValueError):
    pass


@dataclass(frozen=True)
class SetsAnnounce:
    r0: tuple[int, ...]
    r1: tuple[int, ...]


@dataclass(frozen=True)
class IhQueryMsg:
    index: int
    bits: tuple[int, ...]


@dataclass(frozen=True)
class IhResponseMsg:
    index: int
    bit: int


@dataclass(frozen=True)
class CheckAnnounce:
    a: int
    y_r0: tuple[int, ...]
    y_r1: tuple[int, ...]


@dataclass(frozen=True)
class HashDescriptor:
    in_bits: int
    out_bits: int
    seed_hex: str

    @classmethod
    def from_hash(cls, h: uhash.HashFunction) -> "HashDescriptor":
        return cls(in_bits=h.in_bits, out_bits=h.out_bits, seed_hex=bits_to_hex(h.seed))

    def to_hash(self) -> uhash.HashFunction:
        seed_len = self.in_bits + self.out_bits - 1 if self.out_bits > 0 else 0
        return uhash.HashFunction(
            in_bits=self.in_bits,
            out_bits=self.out_bits,
            seed=hex_to_bits(self.seed_hex, seed_len),
        )


@dataclass(frozen=True)
class StringsMsg:
    g0_value: tuple[int, ...]
    g1_value: tuple[int, ...]
    g0: HashDescriptor
    g1: HashDescriptor
    h0: HashDescriptor
    h1: HashDescriptor


@dataclass(frozen=True)
class AbortMsg:
    step: int
    reason: str


Message = SetsAnnounce | IhQueryMsg | IhResponseMsg | CheckAnnounce | StringsMsg | AbortMsg

_TAGS: dict[type, int] = {
    SetsAnnounce: 1,
    IhQueryMsg: 2,
    IhResponseMsg: 3,
    CheckAnnounce: 4,
    StringsMsg: 5,
    AbortMsg: 6,
}
_TAG_NAMES = {
    1: "sets_announce",
    2: "ih_query",
    3: "ih_response",
    4: "check_announce",
    5: "strings",
    6: "abort",
}
_NAME_TAGS = {name: tag for tag, name in _TAG_NAMES.items()}


def _pack_u32_array(values) -> bytes:
    values = tuple(int(v) for v in values)
    return struct.pack(">I", len(values)) + struct.pack(f">{len(values)}I", *values)


def _unpack_u32_array(buf: bytes, off: int) -> tuple[tuple[int, ...], int]:
    (count,) = struct.unpack_from(">I", buf, off)
    off += 4
    values = struct.unpack_from(f">{count}I", buf, off)
    return tuple(values), off + 4 * count


def _pack_bits(bits) -> bytes:
    bits = tuple(int(b) for b in bits)
    nbytes = (len(bits) + 7) // 8
    value = 0
    for b in bits:
        value = (value << 1) | b
    return struct.pack(">I", len(bits)) + value.to_bytes(nbytes, "big")


def _unpack_bits(buf: bytes, off: int) -> tuple[tuple[int, ...], int]:
    (nbits,) = struct.unpack_from(">I", buf, off)
    off += 4
    nbytes = (nbits + 7) // 8
    value = int.from_bytes(buf[off : off + nbytes], "big")
    bits = tuple((value >> (nbits - 1 - i)) & 1 for i in range(nbits))
    return bits, off + nbytes


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack(">H", len(raw)) + raw


def _unpack_str(buf: bytes, off: int) -> tuple[str, int]:
    (length,) = struct.unpack_from(">H", buf, off)
    off += 2
    return buf[off : off + length].decode("utf-8"), off + length


def _pack_descriptor(d: HashDescriptor) -> bytes:
    seed_len = d.in_bits + d.out_bits - 1 if d.out_bits > 0 else 0
    seed_bits = hex_to_bits(d.seed_hex, seed_len)
    return struct.pack(">II", d.in_bits, d.out_bits) + _pack_bits(seed_bits)


def _unpack_descriptor(buf: bytes, off: int) -> tuple[HashDescriptor, int]:
    in_bits, out_bits = struct.unpack_from(">II", buf, off)
    off += 8
    seed_bits, off = _unpack_bits(buf, off)
    return HashDescriptor(in_bits, out_bits, bits_to_hex(np.array(seed_bits, dtype=np.uint8))), off


def encode_payload(msg: Message) -> bytes:
    if isinstance(msg, SetsAnnounce):
        return _pack_u32_array(msg.r0) + _pack_u32_array(msg.r1)
    if isinstance(msg, IhQueryMsg):
        return struct.pack(">I", msg.index) + _pack_bits(msg.bits)
    if isinstance(msg, IhResponseMsg):
        return struct.pack(">IB", msg.index, msg.bit)
    if isinstance(msg, CheckAnnounce):
        return struct.pack(">B", msg.a) + _pack_u32_array(msg.y_r0) + _pack_u32_array(msg.y_r1)
    if isinstance(msg, StringsMsg):
        return (
            _pack_bits(msg.g0_value)
            + _pack_bits(msg.g1_value)
            + _pack_descriptor(msg.g0)
            + _pack_descriptor(msg.g1)
            + _pack_descriptor(msg.h0)
            + _pack_descriptor(msg.h1)
        )
    if isinstance(msg, AbortMsg):
        return struct.pack(">B", msg.step) + _pack_str(msg.reason)
    raise WireError(f"unknown message type {type(msg)!r}")


def decode_payload(tag: int, buf: bytes) -> Message:
    try:
        if tag == 1:
            r0, off = _unpack_u32_array(buf, 0)
            r1, off = _unpack_u32_array(buf, off)
            return SetsAnnounce(r0=r0, r1=r1)
        if tag == 2:
            (index,) = struct.unpack_from(">I", buf, 0)
            bits, _ = _unpack_bits(buf, 4)
            return IhQueryMsg(index=index, bits=bits)
        if tag == 3:
            index, bit = struct.unpack_from(">IB", buf, 0)
            return IhResponseMsg(index=index, bit=bit)
        if tag == 4:
            (a,) = struct.unpack_from(">B", buf, 0)
            y0, off = _unpack_u32_array(buf, 1)
            y1, off = _unpack_u32_array(buf, off)
            return CheckAnnounce(a=a, y_r0=y0, y_r1=y1)
        if tag == 5:
            g0v, off = _unpack_bits(buf, 0)
            g1v, off = _unpack_bits(buf, off)
            g0, off = _unpack_descriptor(buf, off)
            g1, off = _unpack_descriptor(buf, off)
            h0, off = _unpack_descriptor(buf, off)
            h1, off = _unpack_descriptor(buf, off)
            return StringsMsg(g0_value=g0v, g1_value=g1v, g0=g0, g1=g1, h0=h0, h1=h1)
        if tag == 6:
            (step,) = struct.unpack_from(">B", buf, 0)
            reason, _ = _unpack_str(buf, 1)
            return AbortMsg(step=step, reason=reason)
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise WireError(f"malformed payload for tag {tag}: {exc}") from exc
    raise WireError(f"unknown tag {tag}")


def encode_frame(msg: Message) -> bytes:
    tag = _TAGS[type(msg)]
    payload = encode_payload(msg)
    return struct.pack(">BI", tag, len(payload)) + payload


def decode_frame(buf: bytes) -> tuple[Message, bytes]:
    if len(buf) < 5:
        raise WireError("truncated frame header")
    tag, length = struct.unpack_from(">BI", buf, 0)
    if len(buf) < 5 + length:
        raise WireError("truncated frame payload")
    return decode_payload(tag, buf[5 : 5 + length]), buf[5 + length :]


@dataclass(frozen=True)
class TranscriptEntry:
    sender: str
    message: Message


class Transcript:
    """Ordered message record of one session."""

    def __init__(self, entries: list[TranscriptEntry] | None = None):
        self.entries: list[TranscriptEntry] = list(entries) if entries else []

    def add(self, sender: str, message: Message) -> None:
        self.entries.append(TranscriptEntry(sender=sender, message=message))

    def __iter__(self) -> Iterator[TranscriptEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Transcript) and self.entries == other.entries

    def to_jsonl(self) -> str:
        lines = []
        for seq, entry in enumerate(self.entries):
            tag = _TAGS[type(entry.message)]
            lines.append(
                json.dumps(
                    {
                        "seq": seq,
                        "sender": entry.sender,
                        "tag": _TAG_NAMES[tag],
                        "payload": encode_payload(entry.message).hex(),
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        entries = []
        for line in text.splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            msg = decode_payload(_NAME_TAGS[doc["tag"]], bytes.fromhex(doc["payload"]))
            entries.append(TranscriptEntry(sender=doc["sender"], message=msg))
        return cls(entries)
