"""Text grammar for seeds and periodic rows.

    seed   := body ["@" offset]
    body   := word | "(" word ")*"
    word   := { digit | "[" n "]" }

``digit`` ranges over the alphabet of the automaton ("01" for the additive
rules, "012" for web rules) and ``[n]`` expands to ``n`` zeros, matching the
notation of the ether tables (``[7]2`` is ``00000002``).  The offset is the
cell of the first character and defaults to 0.  ``(w)*`` denotes the spatially
periodic row ``...www...`` whose period starts at the offset.
"""

from __future__ import annotations

import re
from typing import NamedTuple

_SEED_RE = re.compile(r"^\s*(?:\((?P<per>[^()]*)\)\*|(?P<fin>[^()@]*))\s*(?:@\s*(?P<off>[+-]?\d+))?\s*$")
_TOKEN_RE = re.compile(r"\[(\d+)\]|(.)")


class SeedSyntaxError(ValueError):
    """Raised when a seed string does not follow the grammar."""


class ParsedSeed(NamedTuple):
    kind: str  # "finite" | "periodic"
    offset: int
    states: tuple[int, ...]


def expand_word(word: str, alphabet: str = "01") -> tuple[int, ...]:
    out: list[int] = []
    for zeros, ch in _TOKEN_RE.findall(word.replace(" ", "")):
        if zeros:
            out.extend([0] * int(zeros))
        elif ch in alphabet:
            out.append(int(ch))
        else:
            raise SeedSyntaxError(f"unexpected character {ch!r} in {word!r} (alphabet {alphabet!r})")
    return tuple(out)


def parse_seed(text: str, alphabet: str = "01") -> ParsedSeed:
    match = _SEED_RE.match(text)
    if match is None:
        raise SeedSyntaxError(f"cannot parse seed {text!r}")
    offset = int(match.group("off") or 0)
    if match.group("per") is not None:
        states = expand_word(match.group("per"), alphabet)
        if not states:
            raise SeedSyntaxError("periodic word must be non-empty")
        return ParsedSeed("periodic", offset, states)
    return ParsedSeed("finite", offset, expand_word(match.group("fin") or "", alphabet))


def format_seed(kind: str, offset: int, states) -> str:
    word = "".join(str(int(s)) for s in states)
    if kind == "periodic":
        body = f"({word})*"
    else:
        body = word or "0"
    return body if offset == 0 else f"{body}@{offset}"


def compress_zeros(word: str, min_run: int = 4) -> str:
    """Rewrite runs of at least ``min_run`` zeros as ``[n]`` (table notation)."""
    return re.sub("0{%d,}" % min_run, lambda m: f"[{len(m.group(0))}]", word)
