"""Bundled EN->DE/FR/IT word table, word pools and dictionary translation."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

__all__ = ["Dictionary", "load_dictionary", "translate_text", "LANGUAGES", "CATEGORY_POOLS"]

LANGUAGES = ("de", "fr", "it")
# dictionary group -> classifier category label
CATEGORY_POOLS = {
    "counterfeit": "Counterfeit", "crypto": "Crypto", "drugs": "Drugs", "forum": "Forum",
    "hacking": "Hacking", "locked": "Locked", "down": "Down", "market": "Market",
    "porn": "Porn", "social": "Soc.-Network", "hosting": "Hosting",
}
# whole words only: parts of host names, e-mail addresses and paths are left alone
_WORD = re.compile(r"(?<![\w.@/:-])[A-Za-z][A-Za-z'-]*(?![\w@/]|\.\w)")


@dataclass(frozen=True)
class Dictionary:
    entries: tuple[tuple[str, dict[str, str], str], ...]

    def pool(self, group: str) -> list[str]:
        return [en for en, _, g in self.entries if g == group]

    @property
    def groups(self) -> list[str]:
        return sorted({g for _, _, g in self.entries})

    def table(self, lang: str) -> dict[str, str]:
        if lang not in LANGUAGES:
            raise ValueError(f"unsupported language {lang!r}")
        return {en: tr[lang].replace("_", " ") for en, tr, _ in self.entries}

    def category_of(self, word: str) -> str | None:
        for en, _, g in self.entries:
            if en == word:
                return CATEGORY_POOLS.get(g)
        return None


@lru_cache(maxsize=1)
def load_dictionary() -> Dictionary:
    text = resources.files("onionscope.data").joinpath("dictionary.tsv").read_text(encoding="utf-8")
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        en, de, fr, it, group = line.split("\t")
        rows.append((en, {"de": de, "fr": fr, "it": it}, group))
    return Dictionary(tuple(rows))


def _match_case(src: str, dst: str) -> str:
    if src.isupper() and len(src) > 1:
        return dst.upper()
    if src[0].isupper():
        return dst[0].upper() + dst[1:]
    return dst


def translate_text(text: str, lang: str) -> str:
    """Word-by-word substitution; words missing from the table pass through."""
    table = load_dictionary().table(lang)

    def swap(m: re.Match) -> str:
        word = m.group(0)
        out = table.get(word.lower())
        return _match_case(word, out) if out else word

    return _WORD.sub(swap, text)
