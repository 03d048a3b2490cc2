"""Shared fixture data: a three-family call graph, simulated targets with
five planted bugs, scripted agent scenarios, and a delta diff.

Planted bugs and how each is meant to be found:

* bug A — ``img_apply_palette`` heap-buffer-overflow.  Needs a 4-byte magic
  at offset 8 that appears in no source literal, so mutation cannot find it;
  only the scripted PoC recipe triggers it (discovery method S).
* bug B — ``meta_parse_exif`` out-of-bounds-write.  Needs an exact u32 tag
  at offset 6; again recipe-only (method S), via a failed first attempt.
* bug C — ``img_decompress`` heap-buffer-overflow.  Guarded by a literal
  ("CMPR") present in ``img_read_chunk``'s source, so direction-derived
  seeds plus mutation reach it (method G).
* bug D — ``net_handle_ping`` stack-buffer-overflow.  Guarded by literals
  scraped from the frame parser; global mutation grows the seed past the
  length gate (method G).
* bug E — ``meta_checksum_blk`` heap-buffer-overflow.  Its trigger literal
  ("CKSM") appears only in that function, which no direction covers; the
  scripted verifier marks the checksum SP a false positive, whose seeds then
  let the global fuzzer in (method G attached to the fp record).

A sixth crash rule (null-pointer-dereference in ``img_parse_header``) is
built for the undefined-behavior sanitizer and is invisible to the address
workers used by the end-to-end suite; it exercises sanitizer binding.
"""

from __future__ import annotations

import json
from pathlib import Path

ALWAYS = {"kind": "length-cmp", "op": "ge", "value": 0}

# 0x50414C54 ("PALT" big-endian) and 0x00031337 — neither appears in any
# fixture source text, which is what keeps bugs A and B out of mutation's
# reach.
PALETTE_MAGIC = 0x50414C54
EXIF_MAGIC = 0x00031337

E2E_EXPORT_RECORDS = [
    # ---- img_fuzzer family (img/...) ----
    {
        "id": "img_fuzzer_entry",
        "name": "img_fuzzer_entry",
        "file": "img/harness.c",
        "source": (
            "int img_fuzzer_entry(const uint8_t *data, size_t size)\n"
            "{\n"
            "    img_ctx ctx = {0};\n"
            "    if (img_parse_header(&ctx, data, size) != 0)\n"
            "        return 0;\n"
            "    return img_read_chunk(&ctx, data, size);\n"
            "}\n"
        ),
        "callees": ["img_parse_header", "img_read_chunk"],
        "reached_by_fuzzers": [],
        "is_entry_for": ["img_fuzzer"],
    },
    {
        "id": "img_parse_header",
        "name": "img_parse_header",
        "file": "img/decode.c",
        "source": (
            "static int img_parse_header(img_ctx *ctx, const uint8_t *buf, size_t len)\n"
            "{\n"
            "    if (img_validate_magic(buf, len) != 0)\n"
            "        return -1;\n"
            "    ctx->flags = buf[4];\n"
            "    ctx->chunk_tag = rd_u32le(buf + 8);\n"
            "    return 0;\n"
            "}\n"
        ),
        "callees": ["img_validate_magic"],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "img_validate_magic",
        "name": "img_validate_magic",
        "file": "img/decode.c",
        "source": (
            "static int img_validate_magic(const uint8_t *buf, size_t len)\n"
            "{\n"
            "    if (len < 4)\n"
            "        return -1;\n"
            '    if (memcmp(buf, "IMGX", 4) != 0)\n'
            "        return -1;\n"
            "    return 0;\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "img_read_chunk",
        "name": "img_read_chunk",
        "file": "img/decode.c",
        "source": (
            "int img_read_chunk(img_ctx *ctx, const uint8_t *buf, size_t len)\n"
            "{\n"
            "    ctx->crc = img_util_crc(buf, len);\n"
            '    if (len >= 12 && memcmp(buf + 8, "CMPR", 4) == 0)\n'
            "        return img_decompress(ctx, buf + 12, len - 12);\n"
            "    return img_apply_palette(ctx, buf, len);\n"
            "}\n"
        ),
        "callees": ["img_decompress", "img_apply_palette", "img_util_crc"],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "img_decompress",
        "name": "img_decompress",
        "file": "img/decode.c",
        "source": (
            "static int img_decompress(img_ctx *ctx, const uint8_t *buf, size_t len)\n"
            "{\n"
            "    uint8_t window[64];\n"
            "    size_t w = 0;\n"
            "    for (size_t i = 0; i < len; i++) {\n"
            "        if (buf[i] & 0x80)\n"
            "            w += buf[i] & 0x7f;\n"
            "        window[w++] = buf[i];\n"
            "    }\n"
            "    ctx->out_len = w;\n"
            "    return 0;\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "img_apply_palette",
        "name": "img_apply_palette",
        "file": "img/decode.c",
        "source": (
            "static int img_apply_palette(img_ctx *ctx, const uint8_t *buf, size_t len)\n"
            "{\n"
            "    uint8_t table[256];\n"
            "    if (ctx->chunk_tag != ctx->palette_tag)\n"
            "        return 0;\n"
            "    uint32_t count = rd_u32le(buf + 12);\n"
            "    for (uint32_t i = 0; i < count; i++)\n"
            "        table[i] = buf[16 + i];\n"
            "    return 1;\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "img_util_crc",
        "name": "img_util_crc",
        "file": "img/util.c",
        "source": (
            "uint32_t img_util_crc(const uint8_t *buf, size_t len)\n"
            "{\n"
            "    uint32_t crc = 0;\n"
            "    for (size_t i = 0; i < len; i++)\n"
            "        crc = (crc << 3) ^ buf[i];\n"
            "    return crc;\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "img_debug_dump",
        "name": "img_debug_dump",
        "file": "img/debug.c",
        "source": (
            "void img_debug_dump(const img_ctx *ctx)\n"
            "{\n"
            '    fprintf(stderr, "tag=%08x crc=%08x\\n", ctx->chunk_tag, ctx->crc);\n'
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    # ---- meta_fuzzer family (meta/...) ----
    {
        "id": "meta_fuzzer_entry",
        "name": "meta_fuzzer_entry",
        "file": "meta/harness.c",
        "source": (
            "int meta_fuzzer_entry(const uint8_t *data, size_t size)\n"
            "{\n"
            "    meta_ctx ctx = {0};\n"
            '    if (size >= 4 && memcmp(data, "META", 4) == 0)\n'
            "        meta_parse_exif(&ctx, data + 4, size - 4);\n"
            "    return meta_checksum_blk(&ctx, data, size);\n"
            "}\n"
        ),
        "callees": ["meta_parse_exif", "meta_checksum_blk"],
        "reached_by_fuzzers": [],
        "is_entry_for": ["meta_fuzzer"],
    },
    {
        "id": "meta_parse_exif",
        "name": "meta_parse_exif",
        "file": "meta/exif.c",
        "source": (
            "static int meta_parse_exif(meta_ctx *ctx, const uint8_t *buf, size_t len)\n"
            "{\n"
            "    uint8_t entries[8][12];\n"
            "    if (len < 2 || buf[0] != 0xE1)\n"
            "        return -1;\n"
            "    uint32_t sig = rd_u32le(buf + 2);\n"
            "    if (sig != ctx->app1_sig)\n"
            "        return -1;\n"
            "    uint16_t n = meta_util_swap(buf + 6);\n"
            "    for (uint16_t i = 0; i <= n; i++)\n"
            "        memcpy(entries[i], buf + 8 + i * 12, 12);\n"
            "    return 0;\n"
            "}\n"
        ),
        "callees": ["meta_util_swap"],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "meta_checksum_blk",
        "name": "meta_checksum_blk",
        "file": "meta/checksum.c",
        "source": (
            "static int meta_checksum_blk(meta_ctx *ctx, const uint8_t *buf, size_t len)\n"
            "{\n"
            "    uint32_t sum = 0;\n"
            "    for (size_t i = 0; i + 4 <= len; i += 4) {\n"
            '        if (memcmp(buf + i, "CKSM", 4) == 0) {\n'
            "            uint32_t blk = rd_u32le(buf + i + 4);\n"
            "            for (uint32_t j = 0; j < blk; j++)\n"
            "                sum += buf[i + 8 + j];\n"
            "        }\n"
            "    }\n"
            "    ctx->sum = sum;\n"
            "    return (int)sum;\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "meta_util_swap",
        "name": "meta_util_swap",
        "file": "meta/exif.c",
        "source": (
            "static uint16_t meta_util_swap(const uint8_t *p)\n"
            "{\n"
            "    return (uint16_t)((p[0] << 8) | p[1]);\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    # ---- net_fuzzer family (net/...) ----
    {
        "id": "net_fuzzer_entry",
        "name": "net_fuzzer_entry",
        "file": "net/harness.c",
        "source": (
            "int net_fuzzer_entry(const uint8_t *data, size_t size)\n"
            "{\n"
            "    return net_parse_frame(data, size);\n"
            "}\n"
        ),
        "callees": ["net_parse_frame"],
        "reached_by_fuzzers": [],
        "is_entry_for": ["net_fuzzer"],
    },
    {
        "id": "net_parse_frame",
        "name": "net_parse_frame",
        "file": "net/frame.c",
        "source": (
            "static int net_parse_frame(const uint8_t *buf, size_t len)\n"
            "{\n"
            '    if (len < 8 || memcmp(buf, "NETF", 4) != 0)\n'
            "        return -1;\n"
            '    if (memcmp(buf + 4, "PING", 4) == 0)\n'
            "        return net_handle_ping(buf + 8, len - 8);\n"
            '    if (memcmp(buf + 4, "ECHO", 4) == 0)\n'
            "        return net_handle_echo(buf + 8, len - 8);\n"
            "    return 0;\n"
            "}\n"
        ),
        "callees": ["net_handle_ping", "net_handle_echo"],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "net_handle_ping",
        "name": "net_handle_ping",
        "file": "net/frame.c",
        "source": (
            "static int net_handle_ping(const uint8_t *buf, size_t len)\n"
            "{\n"
            "    char reply[4];\n"
            "    for (size_t i = 0; i < len; i++)\n"
            "        reply[i] = buf[i];\n"
            "    return reply[0];\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "net_handle_echo",
        "name": "net_handle_echo",
        "file": "net/frame.c",
        "source": (
            "static int net_handle_echo(const uint8_t *buf, size_t len)\n"
            "{\n"
            "    return net_util_sum(buf, len);\n"
            "}\n"
        ),
        "callees": ["net_util_sum"],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
    {
        "id": "net_util_sum",
        "name": "net_util_sum",
        "file": "net/util.c",
        "source": (
            "int net_util_sum(const uint8_t *buf, size_t len)\n"
            "{\n"
            "    int acc = 0;\n"
            "    for (size_t i = 0; i < len; i++)\n"
            "        acc += buf[i];\n"
            "    return acc;\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
]

IMG_TARGET = {
    "version": 1,
    "name": "img_target",
    "fuzzer": "img_fuzzer",
    "rules": [
        {"guard": ALWAYS, "enter": ["img_fuzzer_entry"]},
        {
            "guard": {"kind": "prefix", "text": "IMGX"},
            "enter": ["img_parse_header", "img_validate_magic"],
        },
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "IMGX"},
                    {"kind": "length-cmp", "op": "ge", "value": 8},
                ],
            },
            "enter": ["img_read_chunk", "img_util_crc"],
        },
        {"guard": {"kind": "contains", "text": "CMPR"}, "enter": ["img_decompress"]},
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "IMGX"},
                    {"kind": "u32-le-field-cmp", "offset": 8, "op": "eq", "value": PALETTE_MAGIC},
                ],
            },
            "enter": ["img_apply_palette"],
        },
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "contains", "text": "CMPR"},
                    {"kind": "length-cmp", "op": "ge", "value": 24},
                ],
            },
            "enter": ["img_decompress"],
            "crash": {
                "location": "img_decompress",
                "vuln_type": "heap-buffer-overflow",
                "sanitizer": "address",
            },
        },
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "IMGX"},
                    {"kind": "u32-le-field-cmp", "offset": 8, "op": "eq", "value": PALETTE_MAGIC},
                    {"kind": "length-cmp", "op": "ge", "value": 32},
                ],
            },
            "enter": ["img_apply_palette"],
            "crash": {
                "location": "img_apply_palette",
                "vuln_type": "heap-buffer-overflow",
                "sanitizer": "address",
            },
        },
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "IMGX"},
                    {"kind": "offset-equals", "offset": 4, "value": 255},
                ],
            },
            "enter": ["img_parse_header"],
            "crash": {
                "location": "img_parse_header",
                "vuln_type": "null-pointer-dereference",
                "sanitizer": "undefined",
            },
        },
    ],
}

META_TARGET = {
    "version": 1,
    "name": "meta_target",
    "fuzzer": "meta_fuzzer",
    "rules": [
        {"guard": ALWAYS, "enter": ["meta_fuzzer_entry"]},
        {
            "guard": {"kind": "prefix", "text": "META"},
            "enter": ["meta_parse_exif", "meta_util_swap"],
        },
        {"guard": {"kind": "contains", "text": "CKSM"}, "enter": ["meta_checksum_blk"]},
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "META"},
                    {"kind": "offset-equals", "offset": 4, "value": 225},
                    {"kind": "u32-le-field-cmp", "offset": 6, "op": "eq", "value": EXIF_MAGIC},
                    {"kind": "length-cmp", "op": "ge", "value": 40},
                ],
            },
            "enter": ["meta_parse_exif"],
            "crash": {
                "location": "meta_parse_exif",
                "vuln_type": "out-of-bounds-write",
                "sanitizer": "address",
            },
        },
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "contains", "text": "CKSM"},
                    {"kind": "length-cmp", "op": "ge", "value": 16},
                ],
            },
            "enter": ["meta_checksum_blk"],
            "crash": {
                "location": "meta_checksum_blk",
                "vuln_type": "heap-buffer-overflow",
                "sanitizer": "address",
            },
        },
    ],
}

NET_TARGET = {
    "version": 1,
    "name": "net_target",
    "fuzzer": "net_fuzzer",
    "rules": [
        {"guard": ALWAYS, "enter": ["net_fuzzer_entry"]},
        {"guard": {"kind": "prefix", "text": "NETF"}, "enter": ["net_parse_frame"]},
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "NETF"},
                    {"kind": "contains", "text": "PING"},
                ],
            },
            "enter": ["net_handle_ping"],
        },
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "NETF"},
                    {"kind": "contains", "text": "ECHO"},
                ],
            },
            "enter": ["net_handle_echo", "net_util_sum"],
        },
        {
            "guard": {
                "kind": "and",
                "terms": [
                    {"kind": "prefix", "text": "NETF"},
                    {"kind": "contains", "text": "PING"},
                    {"kind": "length-cmp", "op": "ge", "value": 14},
                ],
            },
            "enter": ["net_handle_ping"],
            "crash": {
                "location": "net_handle_ping",
                "vuln_type": "stack-buffer-overflow",
                "sanitizer": "address",
            },
        },
    ],
}

E2E_TARGET_OBJECTS = [IMG_TARGET, META_TARGET, NET_TARGET]

# Expected end-to-end outcome: five reports, keyed by crash location.
E2E_EXPECTED_METHODS = {
    "img_apply_palette": "S",
    "img_decompress": "G",
    "meta_parse_exif": "S",
    "meta_checksum_blk": "G",
    "net_handle_ping": "G",
}

E2E_SCENARIO = {
    "version": 1,
    "agents": {
        "direction-generator": [
            {
                "match": "fuzzer: img_fuzzer",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_direction",
                                "args": {
                                    "name": "image-decoding",
                                    "entry_functions": ["img_fuzzer_entry"],
                                    "core_functions": [
                                        "img_parse_header",
                                        "img_validate_magic",
                                        "img_read_chunk",
                                        "img_apply_palette",
                                    ],
                                    "risk_level": "high",
                                    "risk_reason": "header-driven length fields feed copies",
                                },
                            }
                        ]
                    },
                    {"text": "one direction covers the decode path"},
                ],
            },
            {
                "match": "fuzzer: meta_fuzzer",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_direction",
                                "args": {
                                    "name": "metadata-parsing",
                                    "entry_functions": ["meta_fuzzer_entry"],
                                    "core_functions": ["meta_parse_exif"],
                                    "risk_level": "high",
                                    "risk_reason": "tag count drives a fixed-size table copy",
                                },
                            }
                        ]
                    },
                    {"text": "exif parsing is the risky surface"},
                ],
            },
            {
                "match": "fuzzer: net_fuzzer",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_direction",
                                "args": {
                                    "name": "frame-handling",
                                    "entry_functions": ["net_fuzzer_entry"],
                                    "core_functions": ["net_parse_frame", "net_handle_ping"],
                                    "risk_level": "medium",
                                    "risk_reason": "frame payload copied into a small stack reply",
                                },
                            }
                        ]
                    },
                    {"text": "frame dispatch registered"},
                ],
            },
        ],
        "sp-generator": [
            {
                "match": "function: img_apply_palette",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_suspicious_point",
                                "args": {
                                    "function": "img_apply_palette",
                                    "description": (
                                        "img_apply_palette() copies count entries into "
                                        "table[256] without bounding count read from the "
                                        "chunk body"
                                    ),
                                    "vuln_type": "heap-buffer-overflow",
                                    "score": 0.9,
                                },
                            }
                        ]
                    },
                    {"text": "flagged the unbounded palette copy"},
                ],
            },
            {
                "match": "function: meta_parse_exif",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_suspicious_point",
                                "args": {
                                    "function": "meta_parse_exif",
                                    "description": (
                                        "meta_parse_exif() iterates i <= n over entries[8] "
                                        "so a large tag count writes past the table"
                                    ),
                                    "vuln_type": "out-of-bounds-write",
                                    "score": 0.85,
                                },
                            }
                        ]
                    },
                    {"text": "flagged the off-by-one entry loop"},
                ],
            },
            {
                "match": "function: meta_checksum_blk",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_suspicious_point",
                                "args": {
                                    "function": "meta_checksum_blk",
                                    "description": (
                                        "meta_checksum_blk() trusts the blk length field "
                                        "when summing bytes after the CKSM tag"
                                    ),
                                    "vuln_type": "heap-buffer-overflow",
                                    "score": 0.45,
                                },
                            }
                        ]
                    },
                    {"text": "flagged the checksum length trust"},
                ],
            },
            {
                "match": "",
                "reusable": True,
                "steps": [{"text": "no suspicious points identified"}],
            },
        ],
        "sp-verifier": [
            {
                "match": "function: img_apply_palette",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "update_suspicious_point",
                                "args": {
                                    "verdict": "tp",
                                    "corrected_description": (
                                        "img_apply_palette() writes count bytes into "
                                        "table[256]; count comes from rd_u32le(buf + 12) "
                                        "and is never compared to 256"
                                    ),
                                    "new_score": 0.95,
                                    "poc_guidance": (
                                        "reach the palette path: magic prefix, palette tag "
                                        "at offset 8, then an oversized body (>= 32 bytes "
                                        "total)"
                                    ),
                                },
                            }
                        ]
                    },
                    {"text": "true positive with corrected bounds detail"},
                ],
            },
            {
                "match": "function: meta_parse_exif",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "update_suspicious_point",
                                "args": {
                                    "verdict": "tp",
                                    "poc_guidance": (
                                        "APP1 marker byte at offset 4, signature word at "
                                        "offset 6, and at least 40 bytes total"
                                    ),
                                },
                            }
                        ]
                    },
                    {"text": "true positive"},
                ],
            },
            {
                "match": "function: meta_checksum_blk",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "update_suspicious_point",
                                "args": {
                                    "verdict": "fp",
                                    "poc_guidance": (
                                        "caller clamps len before the checksum walk in "
                                        "every current call site"
                                    ),
                                },
                            }
                        ]
                    },
                    {"text": "false positive: bounded by callers today"},
                ],
            },
            {
                "match": "",
                "reusable": True,
                "steps": [{"text": "insufficient evidence; leaving unverified"}],
            },
        ],
        "poc-generator": [
            {
                "match": "function: img_apply_palette",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_pov",
                                "args": {
                                    "recipe": {
                                        "instructions": [
                                            {"op": "literal", "text": "IMGX"},
                                            {"op": "repeat", "byte": 0, "count": 4},
                                            {
                                                "op": "integer",
                                                "value": PALETTE_MAGIC,
                                                "width": 4,
                                                "endian": "le",
                                            },
                                            {
                                                "op": "repeat",
                                                "byte": 65,
                                                "count": {"param": "pad"},
                                            },
                                        ],
                                        "variants": [
                                            {"pad": 8},
                                            {"pad": 20},
                                            {"pad": 64},
                                        ],
                                    }
                                },
                            }
                        ]
                    },
                    {"text": "palette overflow input generated"},
                ],
            },
            {
                "match": "function: meta_parse_exif",
                "steps": [
                    {
                        "tool_calls": [
                            {
                                "name": "create_pov",
                                "args": {
                                    "recipe": {
                                        "instructions": [
                                            {"op": "literal", "text": "META"},
                                            {"op": "literal", "hex": "e1"},
                                            {"op": "literal", "hex": "00"},
                                            {
                                                "op": "integer",
                                                "value": 0,
                                                "width": 4,
                                                "endian": "le",
                                            },
                                            {
                                                "op": "repeat",
                                                "byte": 32,
                                                "count": {"param": "pad"},
                                            },
                                        ],
                                        "variants": [
                                            {"pad": 10},
                                            {"pad": 30},
                                            {"pad": 60},
                                        ],
                                    }
                                },
                            }
                        ]
                    },
                    {
                        "tool_calls": [
                            {
                                "name": "create_pov",
                                "args": {
                                    "recipe": {
                                        "instructions": [
                                            {"op": "literal", "text": "META"},
                                            {"op": "literal", "hex": "e1"},
                                            {"op": "literal", "hex": "00"},
                                            {
                                                "op": "integer",
                                                "value": EXIF_MAGIC,
                                                "width": 4,
                                                "endian": "le",
                                            },
                                            {
                                                "op": "repeat",
                                                "byte": 32,
                                                "count": {"param": "pad"},
                                            },
                                        ],
                                        "variants": [
                                            {"pad": 10},
                                            {"pad": 30},
                                            {"pad": 60},
                                        ],
                                    }
                                },
                            }
                        ]
                    },
                    {"text": "exif overflow input generated on the second attempt"},
                ],
            },
        ],
    },
}

DELTA_COMMIT_MESSAGE = (
    "Harden image chunk parsing\n"
    "\n"
    "Bounds-check the palette count and normalize chunk ids\n"
    "before dispatch."
)

DELTA_DIFF = (
    DELTA_COMMIT_MESSAGE
    + "\n\n"
    + """\
diff --git a/img/decode.c b/img/decode.c
--- a/img/decode.c
+++ b/img/decode.c
@@ -40,8 +40,9 @@ static int img_apply_palette(img_ctx *ctx, const uint8_t *buf, size_t len)
     uint8_t table[256];
     if (ctx->chunk_tag != ctx->palette_tag)
         return 0;
     uint32_t count = rd_u32le(buf + 12);
+    /* TODO: clamp count to sizeof(table) */
     for (uint32_t i = 0; i < count; i++)
         table[i] = buf[16 + i];
     return 1;
@@ -70,7 +71,7 @@ int img_read_chunk(img_ctx *ctx, const uint8_t *buf, size_t len)
     ctx->crc = img_util_crc(buf, len);
-    if (len >= 12 && memcmp(buf + 8, "CMPR", 4) == 0)
+    if (len >= 12 && memcmp(buf + 8, "CMPR", 4) == 0 && ctx->flags)
         return img_decompress(ctx, buf + 12, len - 12);
     return img_apply_palette(ctx, buf, len);
diff --git a/img/debug.c b/img/debug.c
--- a/img/debug.c
+++ b/img/debug.c
@@ -10,4 +10,5 @@ void img_debug_dump(const img_ctx *ctx)
 {
+    if (!ctx) return;
     fprintf(stderr, "tag=%08x crc=%08x\\n", ctx->chunk_tag, ctx->crc);
 }
"""
)

MAGIC_EXPORT_RECORDS = [
    {
        "id": "m_entry",
        "name": "m_entry",
        "file": "magic/harness.c",
        "source": "int m_entry(const uint8_t *d, size_t n)\n{\n    return m_handler(d, n);\n}\n",
        "callees": ["m_handler"],
        "reached_by_fuzzers": [],
        "is_entry_for": ["magic_fuzzer"],
    },
    {
        "id": "m_handler",
        "name": "m_handler",
        "file": "magic/handler.c",
        "source": (
            "int m_handler(const uint8_t *d, size_t n)\n"
            "{\n"
            "    char buf[2];\n"
            "    if (n > 0 && d[0] == 0x7f)\n"
            "        return buf[n];\n"
            "    return 0;\n"
            "}\n"
        ),
        "callees": [],
        "reached_by_fuzzers": [],
        "is_entry_for": [],
    },
]

MAGIC_TARGET = {
    "version": 1,
    "name": "magic_target",
    "fuzzer": "magic_fuzzer",
    "rules": [
        {"guard": ALWAYS, "enter": ["m_entry"]},
        {
            "guard": {"kind": "offset-equals", "offset": 0, "value": 127},
            "enter": ["m_handler"],
            "crash": {
                "location": "m_handler",
                "vuln_type": "heap-buffer-overflow",
                "sanitizer": "address",
            },
        },
    ],
}


def export_lines(records: list[dict]) -> list[str]:
    return [json.dumps(record, sort_keys=True) for record in records]


def _file(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_export(records: list[dict], path: str | Path) -> Path:
    path = _file(path)
    path.write_text("\n".join(export_lines(records)) + "\n", encoding="utf-8")
    return path


def write_targets(objects: list[dict], directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for obj in objects:
        (directory / f"{obj['fuzzer']}.json").write_text(
            json.dumps(obj, indent=2) + "\n", encoding="utf-8"
        )
    return directory


def write_scenario(scenario: dict, path: str | Path) -> Path:
    path = _file(path)
    path.write_text(json.dumps(scenario, indent=2) + "\n", encoding="utf-8")
    return path


def write_diff(path: str | Path) -> Path:
    path = _file(path)
    path.write_text(DELTA_DIFF, encoding="utf-8")
    return path
