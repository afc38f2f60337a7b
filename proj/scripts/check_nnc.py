#!/usr/bin/env python3
"""Independent structural checker for NNC v1 compressed containers.

Re-reads every field of the layout with plain struct unpacking and verifies:
  * magic, version, bit depth, method set, layer count
  * per-layer: name, kind tag + dims, method tag, prescale factor,
    method-specific metadata (grid / code book / block arrangement)
  * each payload is a well-formed BZip2 stream (checked with Python's
    libbz2 binding) that decompresses to the exact expected byte count
  * the arch_meta trailer consumes the remainder of the file

Usage: check_nnc.py FILE.nnc
Exits nonzero and prints the offending field on any inconsistency.
"""

import bz2 as libbz2
import math
import struct
import sys

KIND_DIMS = {0: 4, 1: 2, 2: 2, 3: 1, 4: 1}
KIND_NAMES = {0: "conv", 1: "conv1x1", 2: "dense", 3: "bias", 4: "norm"}
METHOD_NAMES = {0: "transform+quant", 1: "codebook", 2: "raw", 3: "direct-quant"}


class Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise ValueError(f"truncated at offset {self.pos}, need {n} bytes")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self):
        return self.take(1)[0]

    def u16(self):
        return struct.unpack("<H", self.take(2))[0]

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def u64(self):
        return struct.unpack("<Q", self.take(8))[0]

    def f32(self):
        return struct.unpack("<f", self.take(4))[0]


def check(path):
    data = open(path, "rb").read()
    r = Reader(data)

    if r.take(4) != b"NNC1":
        raise ValueError("bad magic")
    version = r.u8()
    if version != 1:
        raise ValueError(f"unsupported version {version}")
    bits = r.u8()
    if not 2 <= bits <= 16:
        raise ValueError(f"bits {bits} out of range")
    method_set = r.u8()
    if method_set > 2:
        raise ValueError(f"bad method set {method_set}")
    layer_count = r.u32()
    if layer_count == 0:
        raise ValueError("zero layers")

    width = 1 if bits <= 8 else 2
    print(f"{path}: version {version}, bits {bits}, method_set {method_set}, "
          f"{layer_count} layers")

    names = set()
    for li in range(layer_count):
        name_len = r.u16()
        name = r.take(name_len).decode("utf-8")
        if not name or name in names:
            raise ValueError(f"layer {li}: bad or duplicate name {name!r}")
        names.add(name)

        tag = r.u8()
        if tag not in KIND_DIMS:
            raise ValueError(f"layer {name}: bad kind tag {tag}")
        dims = [r.u32() for _ in range(KIND_DIMS[tag])]
        if any(d == 0 for d in dims):
            raise ValueError(f"layer {name}: zero dim")
        elems = math.prod(dims)

        method = r.u8()
        if method not in METHOD_NAMES:
            raise ValueError(f"layer {name}: bad method {method}")
        factor = r.f32()
        if not math.isfinite(factor) or factor <= 0:
            raise ValueError(f"layer {name}: bad prescale factor {factor}")

        expected = elems  # indices expected in the payload
        if method in (0, 3):  # quantized
            offset, step = r.f32(), r.f32()
            if not (math.isfinite(offset) and math.isfinite(step)) or step < 0:
                raise ValueError(f"layer {name}: bad grid ({offset}, {step})")
            if method == 0 and tag in (1, 2):  # block arrangement
                pad_len = r.u8()
                original_len = r.u64()
                if original_len != elems:
                    raise ValueError(f"layer {name}: original_len {original_len} != {elems}")
                if pad_len != (64 - original_len % 64) % 64:
                    raise ValueError(f"layer {name}: pad_len {pad_len} inconsistent")
                expected = elems + pad_len
        elif method == 1:  # code book
            for _ in range(1 << bits):
                c = r.f32()
                if not math.isfinite(c):
                    raise ValueError(f"layer {name}: non-finite centroid")

        payload_len = r.u32()
        payload = r.take(payload_len)
        raw = libbz2.decompress(payload)
        expected_bytes = elems * 4 if method == 2 else expected * width
        if len(raw) != expected_bytes:
            raise ValueError(f"layer {name}: payload decompresses to {len(raw)} bytes, "
                             f"expected {expected_bytes}")
        if method in (0, 1, 3) and width == 1 and bits < 8:
            top = max(raw) if raw else 0
            if top >= (1 << bits):
                raise ValueError(f"layer {name}: index {top} out of range for {bits} bits")

        print(f"  layer {name}: {KIND_NAMES[tag]} {dims}, {METHOD_NAMES[method]}, "
              f"payload {payload_len}B -> {len(raw)}B")

    arch_len = r.u64()
    if arch_len != len(data) - r.pos:
        raise ValueError(f"arch_meta length {arch_len} disagrees with remaining "
                         f"{len(data) - r.pos}")
    print(f"  arch_meta {arch_len}B; total {len(data)}B: OK")


def main():
    if len(sys.argv) != 2:
        print(__doc__)
        return 2
    try:
        check(sys.argv[1])
    except ValueError as e:
        print(f"FAIL: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
