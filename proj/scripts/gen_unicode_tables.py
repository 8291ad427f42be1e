#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Generates src/common/unicode_data.inc from the running interpreter's unicodedata.

The tables are pinned to the Unicode version of the Python 3.10 grammar the
parser targets (Unicode 13.0.0). Re-run only when moving the grammar pin.
"""
import sys
import unicodedata

ALGORITHMIC_PREFIXES = (
    "CJK UNIFIED IDEOGRAPH-",
    "CJK COMPATIBILITY IDEOGRAPH-",
    "HANGUL SYLLABLE ",
    "TANGUT IDEOGRAPH-",
    "KHITAN SMALL SCRIPT CHARACTER-",
    "NUSHU CHARACTER-",
)


def ranges(pred):
    out = []
    start = None
    for cp in range(0x110000):
        ok = pred(cp)
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit_ranges(name, rs):
    lines = [f"inline constexpr CodepointRange {name}[] = {{"]
    row = []
    for lo, hi in rs:
        row.append(f"{{0x{lo:X}, 0x{hi:X}}}")
        if len(row) == 6:
            lines.append("    " + ", ".join(row) + ",")
            row = []
    if row:
        lines.append("    " + ", ".join(row) + ",")
    lines.append("};")
    return "\n".join(lines)


def is_surrogate(cp):
    return 0xD800 <= cp <= 0xDFFF


def name_aliases(known, candidates="/usr/share/perl/5.34.0/unicore/Name.pl"):
    """Aliases accepted by \\N{...}, found by probing candidate names from a
    Unicode name list (any file with HEX and NAME on alternating lines)."""
    try:
        lines = open(candidates, encoding="utf-8").read().split("\n")
    except OSError:
        print("warning: no alias candidates, \\N{} aliases unsupported", file=sys.stderr)
        return []
    out = []
    for hex_line, name in zip(lines, lines[1:]):
        if not hex_line or any(c not in "0123456789ABCDEF" for c in hex_line) or name in known:
            continue
        cp = int(hex_line, 16)
        try:
            ok = eval('"\\N{%s}"' % name) == chr(cp)
        except (SyntaxError, ValueError):
            ok = False
        if ok:
            known.add(name)
            out.append((name, cp))
    return out


def main(out_path):
    id_start = ranges(lambda cp: not is_surrogate(cp) and (chr(cp) == "_" or chr(cp).isidentifier()))
    id_continue = ranges(lambda cp: not is_surrogate(cp) and ("a" + chr(cp)).isidentifier())
    printable = ranges(lambda cp: chr(cp).isprintable())
    letter = ranges(lambda cp: unicodedata.category(chr(cp)).startswith("L"))
    number = ranges(lambda cp: unicodedata.category(chr(cp)).startswith("N"))

    names = []
    for cp in range(0x110000):
        nm = unicodedata.name(chr(cp), "")
        if not nm or nm.startswith(ALGORITHMIC_PREFIXES):
            continue
        names.append((nm, cp))
    names.extend(name_aliases(set(n for n, _ in names)))
    names.sort()

    parts = [
        "// SPDX-License-Identifier: Apache-2.0",
        "// Generated by scripts/gen_unicode_tables.py; do not edit.",
        f"// Unicode {unicodedata.unidata_version}",
        "// NOLINTBEGIN",
        emit_ranges("kIdStart", id_start),
        emit_ranges("kIdContinue", id_continue),
        emit_ranges("kPrintable", printable),
        emit_ranges("kLetter", letter),
        emit_ranges("kNumber", number),
        "// One \"NAME;HEX\\n\" record per named code point, sorted by name.",
        "inline constexpr char kCharacterNames[] =",
    ]
    for nm, cp in names:
        parts.append(f'    "{nm};{cp:X}\\n"')
    parts[-1] += ";"
    parts.append("// NOLINTEND")
    with open(out_path, "w") as f:
        f.write("\n".join(parts) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/common/unicode_data.inc")
