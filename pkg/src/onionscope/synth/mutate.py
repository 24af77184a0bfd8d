"""Mirror mutation operators, each confined to one marked region of a page."""
from __future__ import annotations

import enum
import random
import re

from .templates import random_wallet, sentence
from .vocab import LANGUAGES, translate_text

__all__ = ["MutationKind", "RegionMissing", "mutate", "region_spans", "BTC_PER_USD", "EUR_PER_USD"]

BTC_PER_USD = 1 / 38000
EUR_PER_USD = 0.92


class MutationKind(str, enum.Enum):
    SCHEME_CHANGE = "scheme_change"
    LINK_CHANGE = "link_change"
    CONTENT_CHANGE = "content_change"
    CURRENCY_CHANGE = "currency_change"
    CRYPTOWALLET_CHANGE = "cryptowallet_change"
    FIAT_CHANGE = "fiat_change"
    TRANSLATE = "translate"


class RegionMissing(ValueError):
    pass


_PRICE = re.compile(r'(<span class="price">)([^<]*)(</span>)')
_WALLET = re.compile(r'(<code class="wallet">)([^<]*)(</code>)')
_PARA = re.compile(r"(<p(?:\s[^>]*)?>)([^<]+)(</p>)")
_OWN_HREF = re.compile(r'(<a href=")(/[^"]*)(")')
_TAG = re.compile(r"<([a-z][a-z0-9]*)((?:\s[^<>]*)?)(/?>)")
_SKIP_TAGS = {"html", "head", "meta", "title", "style", "script", "body"}
_TEXT = re.compile(r"(?<=>)([^<]+)(?=<)")
_AMOUNT = re.compile(r"^\s*([$€])?([0-9]+(?:\.[0-9]+)?)\s*(BTC|XMR)?\s*$")


def _group_spans(pattern: re.Pattern, html: str, group: int = 2) -> list[tuple[int, int]]:
    return [m.span(group) for m in pattern.finditer(html)]


def _body_tags(html: str) -> list[re.Match]:
    start = html.find("<body")
    return [m for m in _TAG.finditer(html, max(start, 0)) if m.group(1) not in _SKIP_TAGS]


def _text_spans(html: str) -> list[tuple[int, int]]:
    spans, skip_until = [], -1
    for m in _TEXT.finditer(html):
        if m.start() < skip_until:
            continue
        before = html.rfind("<", 0, m.start())
        opener = html[before:m.start()].lower()
        if opener.startswith(("<style", "<script")):
            skip_until = html.find("</", m.start())
            continue
        if m.group(1).strip():
            spans.append(m.span(1))
    return spans


def region_spans(html: str, kind: MutationKind) -> list[tuple[int, int]]:
    """Byte ranges of ``html`` that ``kind`` is allowed to modify."""
    if kind is MutationKind.CURRENCY_CHANGE or kind is MutationKind.FIAT_CHANGE:
        return _group_spans(_PRICE, html)
    if kind is MutationKind.CRYPTOWALLET_CHANGE:
        return _group_spans(_WALLET, html)
    if kind is MutationKind.CONTENT_CHANGE:
        return _group_spans(_PARA, html)
    if kind is MutationKind.LINK_CHANGE:
        return _group_spans(_OWN_HREF, html)
    if kind is MutationKind.SCHEME_CHANGE:
        return [m.span(2) for m in _body_tags(html)]
    if kind is MutationKind.TRANSLATE:
        spans = _text_spans(html)
        m = re.search(r'<html lang="([a-z]+)"', html)
        return ([m.span(1)] if m else []) + spans
    raise ValueError(f"unknown mutation kind {kind!r}")


def _splice(html: str, edits: list[tuple[int, int, str]]) -> str:
    out, last = [], 0
    for start, end, text in sorted(edits):
        out.append(html[last:start])
        out.append(text)
        last = end
    out.append(html[last:])
    return "".join(out)


def _run(rng: random.Random, n: int, magnitude: float) -> range:
    """Contiguous run of ``magnitude`` of ``n`` items, at least one."""
    k = min(n, max(1, round(magnitude * n)))
    start = rng.randint(0, n - k)
    return range(start, start + k)


def _convert(price: str, kind: MutationKind) -> str:
    m = _AMOUNT.match(price)
    if not m:
        return price
    symbol, value, coin = m.group(1), float(m.group(2)), m.group(3)
    usd = value / BTC_PER_USD if coin == "BTC" else value / EUR_PER_USD if symbol == "€" else value
    if kind is MutationKind.CURRENCY_CHANGE:
        if coin == "BTC":
            return f"${usd:.2f}"
        return f"{usd * BTC_PER_USD:.5f} BTC"
    if symbol == "€":
        return f"${usd:.2f}"
    if coin:
        return price
    return f"€{usd * EUR_PER_USD:.2f}"


def _new_sentence(rng: random.Random, old: str) -> str:
    s = sentence(rng, "gen")
    return s if s != old else sentence(rng, "gen")


def _content_change(html: str, magnitude: float, rng: random.Random) -> str:
    paras = list(_PARA.finditer(html))
    total = sum(len(m.group(2)) for m in paras)
    budget = max(1, int(magnitude * total))
    start = rng.randrange(len(paras))
    edits = []
    for m in paras[start:] + paras[:start]:
        if budget <= 0:
            break
        sentences = re.split(r"(?<=\.) ", m.group(2))
        for i, s in enumerate(sentences):
            if budget <= 0:
                break
            sentences[i] = _new_sentence(rng, s)
            budget -= len(s)
        edits.append((m.start(2), m.end(2), " ".join(sentences)))
    return _splice(html, edits)


def _scheme_change(html: str, magnitude: float, rng: random.Random) -> str:
    tags = _body_tags(html)
    extras = (' id="n{}"', ' data-v="{}"', ' style="margin:{}px"', ' role="r{}"')
    attr = rng.choice(extras)
    edits = []
    for i in _run(rng, len(tags), magnitude):
        m = tags[i]
        edits.append((m.end(2), m.end(2), attr.format(rng.randint(0, 99))))
    return _splice(html, edits)


def _link_change(html: str, magnitude: float, rng: random.Random) -> str:
    links = list(_OWN_HREF.finditer(html))
    edits = []
    for i in _run(rng, len(links), magnitude):
        m = links[i]
        path = m.group(2)
        new = f"/index.php?page={path.strip('/').replace('/', '-') or 'home'}&s={rng.randint(100, 999)}"
        edits.append((m.start(2), m.end(2), new))
    return _splice(html, edits)


def _translate(html: str, lang: str) -> str:
    edits = [(s, e, translate_text(html[s:e], lang)) for s, e in _text_spans(html)]
    m = re.search(r'<html lang="([a-z]+)"', html)
    if m:
        edits.append((m.start(1), m.end(1), lang))
    return _splice(html, edits)


def mutate(html: str, kind: MutationKind | str, magnitude: float, rng: random.Random,
           lang: str = "de") -> str:
    """Apply one mutation; the result differs from ``html`` only inside ``region_spans``.

    ``magnitude`` is the affected fraction for scheme, link and content
    changes; price, wallet and translation changes rewrite their whole region.
    """
    kind = MutationKind(kind)
    if not 0.0 < magnitude <= 0.5:
        raise ValueError(f"magnitude must lie in (0, 0.5], got {magnitude}")
    if not region_spans(html, kind):
        raise RegionMissing(f"page has no region for {kind.value}")
    if kind is MutationKind.CURRENCY_CHANGE or kind is MutationKind.FIAT_CHANGE:
        return _PRICE.sub(lambda m: m.group(1) + _convert(m.group(2), kind) + m.group(3), html)
    if kind is MutationKind.CRYPTOWALLET_CHANGE:
        def fresh(m):
            old = m.group(2)
            return m.group(1) + random_wallet(rng, "xmr" if old.startswith("4") else "btc") + m.group(3)
        return _WALLET.sub(fresh, html)
    if kind is MutationKind.CONTENT_CHANGE:
        return _content_change(html, magnitude, rng)
    if kind is MutationKind.SCHEME_CHANGE:
        return _scheme_change(html, magnitude, rng)
    if kind is MutationKind.LINK_CHANGE:
        return _link_change(html, magnitude, rng)
    if lang not in LANGUAGES:
        raise ValueError(f"unsupported translation language {lang!r}")
    return _translate(html, lang)
