"""Tweet normalization in the style of the GloVe Twitter preprocessing script.

Rules run in a fixed order. Each rule replaces its matches with a
space-padded replacement; whitespace is collapsed once at the end, so tags
always come out as standalone tokens (``5km`` -> ``<number> km``).

Unlike some ports of that script, camel-case hashtags are not split and
``/`` is not padded (padding it first would make ``:/`` unreachable).
Patterns stay context-free like the script's: a guard such as "not after a
word character" breaks idempotence once a later rule pads that character
away (``5:)`` -> ``<number> :)``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

_EYES = r"[8:=;]"
_NOSE = r"['`\-]?"
_FACE = _EYES + _NOSE


@dataclass(frozen=True)
class NormRule:
    name: str
    pattern: re.Pattern
    replacement: str | Callable[[re.Match], str]

    def apply(self, text: str) -> str:
        return self.pattern.sub(self.replacement, text)


def _hashtag(m: re.Match) -> str:
    body = m.group(1)
    if body.isupper():
        return f" <hashtag> {body.lower()} <allcaps> "
    return f" <hashtag> {body} "


RULES: tuple[NormRule, ...] = (
    NormRule("url", re.compile(r"https?://\S+\b|www\.(?:\w+\.)+\S*"), " <url> "),
    NormRule("user", re.compile(r"@\w+"), " <user> "),
    NormRule("smile", re.compile(rf"{_FACE}[)\]dD]+"), " <smile> "),
    NormRule("lolface", re.compile(rf"{_FACE}[pP]+"), " <lolface> "),
    NormRule("sadface", re.compile(rf"{_FACE}[(\[]+"), " <sadface> "),
    NormRule("neutralface", re.compile(rf"{_FACE}[/|lL*]"), " <neutralface> "),
    NormRule("heart", re.compile(r"<3"), " <heart> "),
    NormRule("number", re.compile(r"[-+]?\d+(?:[.,]\d+)*"), " <number> "),
    NormRule("hashtag", re.compile(r"(?<!#)#([^\s#]+)"), _hashtag),
    NormRule("repeat", re.compile(r"[!?.]{2,}"), lambda m: f" {m.group()[0]} <repeat> "),
    NormRule("elong", re.compile(r"\b([^\W\d_]*?)([^\W\d_])\2{2,}\b", re.IGNORECASE), r" \1\2 <elong> "),
    NormRule("allcaps", re.compile(r"\b[A-Z]{2,}\b"), lambda m: f" {m.group().lower()} <allcaps> "),
    NormRule("lowercase", re.compile(r"\S+"), lambda m: m.group().lower()),
)


def normalize(text: str) -> str:
    for rule in RULES:
        text = rule.apply(text)
    return " ".join(text.split())


def tokenize(normalized: str) -> list[str]:
    return normalized.split()


def preprocess(text: str) -> list[str]:
    return tokenize(normalize(text))
