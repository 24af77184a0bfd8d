"""HTML templates for synthetic market, blog and directory landing pages.

Mutable regions are marked by class names so mutations can find them:
``price`` spans, ``wallet`` code elements, ``email`` spans, ``mirror-list``
and ``partners`` lists, and ``<p>`` paragraphs of plain prose.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .vocab import load_dictionary

__all__ = ["SiteSpec", "render", "FAMILIES", "THEMES", "random_host", "random_wallet",
           "sentence", "paragraph", "site_name"]

FAMILIES = ("market", "blog", "directory")
THEMES = 3
MIN_BYTES = 4096
MAX_BYTES = 16384

BASE32 = "abcdefghijklmnopqrstuvwxyz234567"
BASE58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"

ADJ = ("new old best good great fast quick safe secure private anonymous free cheap high low real "
       "original full simple easy reliable trusted official available daily weekly worldwide "
       "international local latest popular special important").split()
VERB = ("offer buy sell send receive get find search read write open start join use make check "
        "choose pay keep need want know see visit register provide include share report download").split()
_NOT_NOUN = set(ADJ) | set(VERB) | {"welcome", "please", "thanks", "yes", "login", "logout", "click",
                                   "upload", "wait", "best-seller", "guarantee", "refund", "escrow"}

_PATTERNS = (
    "We {v} {a} {n} for {a} {n}.",
    "Our {n} is {a} and {a}.",
    "All {n} are {a} with {n} and {n}.",
    "You can {v} {n} here with {a} {n}.",
    "This {n} has {a} {n} for every {n}.",
    "The {a} {n} of our {n} will {v} your {n}.",
    "Every {n} is {a}, {a} and available for {n}.",
    "They {v} {n} and {n} from the {a} {n}.",
    "Please {v} the {n} before you {v} {a} {n}.",
    "It is {a} to {v} {n} without {n}.",
    "Many {n} {v} {a} {n} in the {n}.",
    "Only {a} {n} can {v} {n} here.",
    "After {n} we {v} the {n} to you.",
    "There are many {a} {n} between {n} and {n}.",
)


def _nouns(category: str) -> tuple[list[str], list[str]]:
    d = load_dictionary()
    general = [w for w in d.pool("gen") if w not in _NOT_NOUN]
    return d.pool(category), general


def sentence(rng: random.Random, category: str) -> str:
    cat, general = _nouns(category)

    def noun():
        return rng.choice(cat) if rng.random() < 0.6 else rng.choice(general)

    text = rng.choice(_PATTERNS)
    out = []
    for part in text.split(" "):
        for slot, fn in (("{n}", noun), ("{a}", lambda: rng.choice(ADJ)), ("{v}", lambda: rng.choice(VERB))):
            while slot in part:
                part = part.replace(slot, fn(), 1)
        out.append(part)
    s = " ".join(out)
    return s[0].upper() + s[1:]


def paragraph(rng: random.Random, category: str, n: int | None = None) -> str:
    return " ".join(sentence(rng, category) for _ in range(n or rng.randint(3, 6)))


def random_host(rng: random.Random, version: int = 3) -> str:
    return "".join(rng.choice(BASE32) for _ in range(56 if version == 3 else 16)) + ".onion"


def random_wallet(rng: random.Random, coin: str = "btc") -> str:
    if coin == "xmr":
        return "4" + "".join(rng.choice(BASE58) for _ in range(94))
    return rng.choice("13") + "".join(rng.choice(BASE58) for _ in range(33))


def site_name(rng: random.Random) -> str:
    syl = ["ka", "ro", "vex", "tor", "lu", "mi", "zen", "qua", "dro", "nyx", "pha", "sol", "gri", "bel"]
    return "".join(rng.choice(syl) for _ in range(rng.randint(2, 3))).capitalize()


@dataclass
class SiteSpec:
    host: str
    family: str
    theme: int
    category: str
    seed: int
    mirror_hosts: list[str] = field(default_factory=list)
    partner_hosts: list[str] = field(default_factory=list)


_COLORS = (("#111", "#eee", "#3a7"), ("#fafafa", "#222", "#c33"), ("#1b1f3a", "#d8d8f0", "#f90"))


def _css(family: str, theme: int) -> str:
    bg, fg, accent = _COLORS[theme % len(_COLORS)]
    rules = [
        f"body {{ background: {bg}; color: {fg}; font-family: Verdana, sans-serif; margin: 0; }}",
        f".wrap{theme} {{ max-width: {900 + 60 * theme}px; margin: 0 auto; padding: 12px; }}",
        f"a {{ color: {accent}; text-decoration: none; }}",
        "a:hover { text-decoration: underline; }",
        f".menu{theme} ul {{ list-style: none; padding: 0; display: flex; gap: {8 + theme}px; }}",
        f"h1, h2, h3 {{ color: {accent}; font-weight: {600 + 100 * (theme % 2)}; }}",
        "table { border-collapse: collapse; width: 100%; }",
        f"td, th {{ border-bottom: 1px solid {accent}; padding: 4px 8px; text-align: left; }}",
        ".price { font-weight: bold; white-space: nowrap; }",
        ".wallet { font-family: monospace; word-break: break-all; }",
        f"footer {{ margin-top: 24px; font-size: {11 + theme}px; opacity: 0.8; }}",
        f".box{theme} {{ border: 1px solid {accent}; padding: 8px; margin: 8px 0; border-radius: {2 * theme}px; }}",
    ]
    if family == "blog":
        rules += ["article { margin-bottom: 28px; }", ".meta { font-size: 11px; opacity: 0.7; }",
                  f"aside {{ float: right; width: {220 + 20 * theme}px; }}"]
    elif family == "directory":
        rules += ["dl dt { margin-top: 10px; font-weight: bold; }", "dl dd { margin-left: 16px; }",
                  f".cat{theme} {{ column-count: {2 + theme % 2}; }}"]
    else:
        rules += [".stock { color: gray; }", f".badge{theme} {{ background: {accent}; color: {bg}; padding: 2px 6px; }}"]
    return "\n".join(rules)


def _menu(rng: random.Random, family: str, theme: int) -> str:
    items = {
        "market": ["Home", "Products", "Categories", "Vendors", "Orders", "Support", "Rules", "Login", "Register"],
        "blog": ["Home", "News", "Archive", "Comments", "Contact", "About"],
        "directory": ["Home", "Links", "Categories", "Search", "Submit", "News", "Contact"],
    }[family]
    keep = [items[0]] + [i for i in items[1:] if rng.random() < 0.8]
    lis = "".join(f'<li><a href="/{i.lower()}">{i}</a></li>' for i in keep)
    return f'<nav class="menu{theme}"><ul>{lis}</ul></nav>'


def _mirror_section(title: str, hosts: list[str], theme: int) -> str:
    if not hosts:
        return ""
    lis = "".join(f'<li><a href="http://{h}/">{h}</a></li>' for h in hosts)
    return f'<div class="box{theme}"><h3>{title}</h3><ul class="mirror-list">{lis}</ul></div>'


def _partners(rng: random.Random, spec: SiteSpec, describe: bool) -> str:
    if not spec.partner_hosts:
        return ""
    lis = []
    for h in spec.partner_hosts:
        label = " ".join(rng.choice(ADJ + _nouns(spec.category)[0]) for _ in range(2)).title()
        extra = f" - {sentence(rng, spec.category)}" if describe else ""
        lis.append(f'<li><a href="http://{h}/">{label}</a>{extra}</li>')
    return f'<ul class="partners">{"".join(lis)}</ul>'


def _price(rng: random.Random) -> str:
    return f"${rng.randint(5, 900)}.{rng.randint(0, 99):02d}"


def _email(rng: random.Random, name: str) -> str:
    user = rng.choice(["support", "admin", "contact", "info", name.lower()])
    return f'<span class="email">{user}@{name.lower()}mail.example</span>'


def _info_sections(rng: random.Random, spec: SiteSpec, count: int) -> list[str]:
    headings = ["About", "Shipping", "Questions", "Rules", "Security", "News", "Guide", "Payment"]
    out = []
    for h in rng.sample(headings, count):
        paras = "".join(f"<p>{paragraph(rng, spec.category)}</p>" for _ in range(rng.randint(1, 3)))
        tag = "section" if rng.random() < 0.7 else "div"
        out.append(f'<{tag} class="info"><h3>{h}</h3>{paras}</{tag}>')
    return out


def _market_body(rng: random.Random, spec: SiteSpec, name: str) -> list[str]:
    theme = spec.theme
    cat = _nouns(spec.category)[0]
    rows = []
    for i in range(rng.randint(4, 10)):
        item = f"{rng.choice(ADJ).title()} {rng.choice(cat).title()}"
        stock = f'<td class="stock">{rng.randint(1, 500)}</td>' if theme != 1 else ""
        rows.append(f'<tr><td><a href="/item/{rng.randint(100, 9999)}">{item}</a></td>'
                    f'<td><span class="price">{_price(rng)}</span></td>{stock}</tr>')
    head_stock = "<th>Stock</th>" if theme != 1 else ""
    table = (f'<section class="products"><h2>Products</h2><table><tr><th>Item</th><th>Price</th>{head_stock}</tr>'
             f'{"".join(rows)}</table></section>')
    wallets = "".join(f'<li>{coin.upper()}: <code class="wallet">{random_wallet(rng, coin)}</code></li>'
                      for coin in (["btc", "xmr"] if rng.random() < 0.5 else ["btc"]))
    payment = (f'<div class="box{theme}"><h3>Payment</h3><p>{sentence(rng, spec.category)}</p>'
               f'<ul>{wallets}</ul></div>')
    blocks = [f"<p>{paragraph(rng, spec.category)}</p>", table, payment]
    blocks += _info_sections(rng, spec, rng.randint(2, 5))
    if rng.random() < 0.5:
        blocks.insert(1, f'<form action="/search" method="get"><input type="text" name="q"><button>Search</button></form>')
    if rng.random() < 0.4:
        blocks.append(f'<div class="box{theme}"><span class="badge{theme}">{rng.randint(100, 9000)} users</span></div>')
    blocks.append(_mirror_section("Mirrors", spec.mirror_hosts, theme))
    partners = _partners(rng, spec, describe=False)
    if partners:
        blocks.append(f"<section><h3>Friends</h3>{partners}</section>")
    return blocks


def _blog_body(rng: random.Random, spec: SiteSpec, name: str) -> list[str]:
    theme = spec.theme
    side = [f'<div class="box{theme}"><h3>Donate</h3><p>{sentence(rng, spec.category)}</p>'
            f'<code class="wallet">{random_wallet(rng)}</code></div>']
    side.append(_mirror_section("Mirrors", spec.mirror_hosts, theme))
    partners = _partners(rng, spec, describe=False)
    if partners:
        side.append(f"<h3>Blogroll</h3>{partners}")
    blocks = [f'<aside>{"".join(side)}</aside>']
    for _ in range(rng.randint(3, 7)):
        title = sentence(rng, spec.category).rstrip(".")
        date = f"{rng.randint(1, 28):02d}-{rng.randint(1, 12):02d}-{rng.randint(19, 23)}"
        paras = "".join(f"<p>{paragraph(rng, spec.category)}</p>" for _ in range(rng.randint(1, 3)))
        more = f'<a href="/post/{rng.randint(10, 999)}">Read more</a>' if rng.random() < 0.7 else ""
        blocks.append(f'<article class="post"><h2>{title}</h2><div class="meta">{date}</div>{paras}{more}</article>')
    return blocks


def _directory_body(rng: random.Random, spec: SiteSpec, name: str) -> list[str]:
    theme = spec.theme
    blocks = [f"<p>{paragraph(rng, spec.category)}</p>"]
    partners = _partners(rng, spec, describe=True)
    if partners:
        blocks.append(f"<section><h2>Listed sites</h2>{partners}</section>")
    d = load_dictionary()
    groups = rng.sample(sorted(set(d.groups) - {"func", "gen"}), rng.randint(2, 5))
    for g in groups:
        items = "".join(f"<dt>{rng.choice(d.pool(g)).title()} {rng.choice(ADJ)}</dt><dd>{sentence(rng, g)}</dd>"
                        for _ in range(rng.randint(3, 7)))
        blocks.append(f'<div class="cat{theme}"><h3>{g.title()}</h3><dl>{items}</dl></div>')
    blocks.append(f'<div class="box{theme}"><p>{sentence(rng, spec.category)}</p>'
                  f'<code class="wallet">{random_wallet(rng)}</code></div>')
    blocks.append(_mirror_section("Mirrors", spec.mirror_hosts, theme))
    return blocks


_BODIES = {"market": _market_body, "blog": _blog_body, "directory": _directory_body}


def render(spec: SiteSpec) -> str:
    """Landing page for ``spec``; identical specs render identical bytes."""
    if spec.family not in _BODIES:
        raise ValueError(f"unknown family {spec.family!r}")
    rng = random.Random(spec.seed)
    name = site_name(rng)
    tagline = sentence(rng, spec.category).rstrip(".")
    body = _BODIES[spec.family](rng, spec, name)
    # pad short pages with prose so fuzzy hashing works in its reliable range
    page = _assemble(spec, name, tagline, body, rng)
    target = rng.randint(MIN_BYTES + 1024, 3 * MIN_BYTES)
    while len(page.encode()) < target:
        body.insert(-1, f'<section class="info"><h3>More</h3><p>{paragraph(rng, spec.category, 6)}</p></section>')
        page = _assemble(spec, name, tagline, body, rng)
    while len(page.encode()) > MAX_BYTES and len(body) > 3:
        body.pop(-2)
        page = _assemble(spec, name, tagline, body, rng)
    return page


_DIALECT_TAGS = ("p", "li", "h2", "h3", "ul", "td", "tr", "div", "section", "dt", "dd", "article",
                 "table", "nav", "footer", "main", "form", "aside", "h1", "dl")
_DIALECT_ATTRS = ("", ' class="{w}"', ' id="{w}"', ' data-k="{w}"', ' class="{w}" title="{w}"',
                  ' style="{w}"', ' lang="en" class="{w}"', ' data-x="{w}" data-y="{w}"')
_DIALECT_RE = re.compile(r"<(" + "|".join(_DIALECT_TAGS) + r")(?=[\s>])")


def _dialect(html: str, seed: int) -> str:
    """Site-specific attribute habits, so sites sharing a template differ in structure."""
    rng = random.Random(seed * 7919 + 17)
    extra = {t: rng.choice(_DIALECT_ATTRS).format(w=f"{t}{rng.randint(1, 9)}") for t in _DIALECT_TAGS}
    cut = html.find("<body>")
    return html[:cut] + _DIALECT_RE.sub(lambda m: "<" + m.group(1) + extra[m.group(1)], html[cut:])


def _assemble(spec: SiteSpec, name: str, tagline: str, body: list[str], rng: random.Random) -> str:
    theme = spec.theme
    r = random.Random(spec.seed ^ 0x5EED)
    header_tag = "header" if theme != 2 else "div"
    footer = (f"<footer><p>Contact: {_email(r, name)}</p>"
              f"<p>{name} {2015 + spec.seed % 8}</p></footer>")
    return _dialect(
        f'<!DOCTYPE html>\n<html lang="en">\n<head>\n<meta charset="utf-8">\n'
        f'<meta name="description" content="{tagline}">\n<title>{name} - {tagline}</title>\n'
        f"<style>\n{_css(spec.family, theme)}\n</style>\n</head>\n<body>\n"
        f'<div class="wrap{theme}">\n<{header_tag} class="top"><h1>{name}</h1></{header_tag}>\n'
        f"{_menu(r, spec.family, theme)}\n<main>\n" + "\n".join(b for b in body if b) +
        f"\n</main>\n{footer}\n</div>\n</body>\n</html>\n",
        spec.seed,
    )
