"""HTML to page fields: visible text, tag-only scheme, classified links, metadata."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .corpus import LinkClass, OnionAddress, Surface, normalize_url
from .langid import LanguageDetector, default_detector

__all__ = [
    "ExtractedPage", "extract", "extract_text", "extract_scheme", "extract_links",
    "extract_metadata", "detect_language", "decode_html",
]

_SKIP_CONTENT = {"script", "style", "noscript", "template"}
_BLOCK = {
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "fieldset",
    "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header",
    "hr", "li", "main", "nav", "ol", "option", "p", "pre", "section", "table", "td", "th",
    "title", "tr", "ul", "body", "head", "html", "img", "input", "button", "select", "textarea",
}
_WS = re.compile(r"\s+")

# base32 label of a v2 (16) or v3 (56) address, optionally with scheme, subdomains and path
_ONION_RE = re.compile(
    r"(?<![a-z2-7])(?:https?://)?(?:[a-z0-9-]+\.)*((?:[a-z2-7]{56}|[a-z2-7]{16})\.onion)\b"
    r"((?:[/?#][^\s\"'<>()]*)?)",
    re.IGNORECASE,
)
_HREF_RE = re.compile(r"""\bhref\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>"']+))""", re.IGNORECASE)


def decode_html(html: bytes | str) -> str:
    if isinstance(html, str):
        return html
    return html.decode("utf-8", errors="replace")


@dataclass
class ExtractedPage:
    text: str = ""
    scheme: str = ""
    links: list[tuple[str, LinkClass]] = field(default_factory=list)
    title: str = ""
    metadata: dict[str, str] = field(default_factory=dict)
    languages: list[tuple[str, float]] = field(default_factory=list)

    @property
    def top_language(self) -> str:
        return self.languages[0][0] if self.languages else "und"


class _Tokenizer(HTMLParser):
    """Single pass over the document collecting text chunks, tag tokens and metadata.

    ``HTMLParser`` never validates nesting, so unclosed or stray tags simply
    show up in the token stream as written.
    """

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.text: list[str] = []
        self.scheme: list[str] = []
        self.title: list[str] = []
        self.meta: dict[str, str] = {}
        self._skip = 0
        self._in_title = False

    def handle_starttag(self, tag, attrs):
        self._start(tag, attrs, closed=False)

    def handle_startendtag(self, tag, attrs):
        self._start(tag, attrs, closed=True)

    def _start(self, tag, attrs, closed):
        names = " ".join(name for name, _ in attrs)
        self.scheme.append(f"<{tag} {names}>" if names else f"<{tag}>")
        if tag in _BLOCK:
            self.text.append(" ")
        if closed:
            return
        if tag in _SKIP_CONTENT:
            self._skip += 1
        elif tag == "title":
            self._in_title = True
        if tag == "meta":
            d = {k: (v or "") for k, v in attrs}
            key = d.get("name") or d.get("property") or d.get("http-equiv")
            if key and "content" in d:
                self.meta[key.lower()] = d["content"]

    def handle_endtag(self, tag):
        self.scheme.append(f"</{tag}>")
        if tag in _BLOCK:
            self.text.append(" ")
        if tag in _SKIP_CONTENT and self._skip:
            self._skip -= 1
        elif tag == "title":
            self._in_title = False

    def handle_data(self, data):
        if self._skip:
            return
        if self._in_title:
            self.title.append(data)
        self.text.append(data)


def _tokenize(html: bytes | str) -> _Tokenizer:
    parser = _Tokenizer()
    parser.feed(decode_html(html))
    parser.close()
    return parser


def _collapse(chunks) -> str:
    return _WS.sub(" ", "".join(chunks)).strip()


def extract_text(html: bytes | str) -> str:
    """Visible text with script/style dropped, entities decoded and whitespace collapsed."""
    return _collapse(_tokenize(html).text) if html else ""


def extract_scheme(html: bytes | str) -> str:
    """Opening/closing tag tokens with attribute names only, in document order."""
    return "".join(_tokenize(html).scheme) if html else ""


def extract_metadata(html: bytes | str) -> dict[str, str]:
    parser = _tokenize(html)
    meta = dict(parser.meta)
    title = _collapse(parser.title)
    if title:
        meta["title"] = title
    return meta


def _host(addr: OnionAddress | Surface | str) -> str:
    return addr if isinstance(addr, str) else addr.host


def extract_links(html: bytes | str, self_host: OnionAddress | str) -> list[tuple[str, LinkClass]]:
    """Onion addresses anywhere in the raw HTML plus surface hrefs, classified.

    Own links keep their path (``host/path``); external onion links are
    reduced to the bare host. Relative hrefs count as own links.
    """
    doc = decode_html(html)
    own = _host(self_host).lower()
    hits: list[tuple[int, str, LinkClass]] = []

    for m in _ONION_RE.finditer(doc):
        host = m.group(1).lower()
        if host == own:
            path = m.group(2).rstrip(".,;")
            hits.append((m.start(), own + (path if path not in ("", "/") else ""), LinkClass.OWN))
        else:
            hits.append((m.start(), host, LinkClass.EXTERNAL_ONION))

    for m in _HREF_RE.finditer(doc):
        value = next(g for g in m.groups() if g is not None).strip()
        if not value or value.startswith(("#", "javascript:", "mailto:", "data:")):
            continue
        if re.match(r"^[a-z][a-z0-9+.-]*://", value, re.I) or value.startswith("//"):
            try:
                addr = normalize_url(value.lstrip("/"))
            except ValueError:
                continue
            if isinstance(addr, Surface):
                hits.append((m.start(), value, LinkClass.SURFACE))
            # onion hrefs are already covered by the raw-HTML scan
        elif value.startswith("/") or not re.match(r"^[a-z0-9-]+(\.[a-z0-9-]+)+(/|$)", value, re.I):
            path = value if value.startswith("/") else "/" + value
            if path != "/":
                hits.append((m.start(), own + path, LinkClass.OWN))

    hits.sort(key=lambda h: h[0])
    seen: set[str] = set()
    out: list[tuple[str, LinkClass]] = []
    for _, url, cls in hits:
        if url not in seen:
            seen.add(url)
            out.append((url, cls))
    return out


def detect_language(text: str, detector: LanguageDetector | None = None) -> list[tuple[str, float]]:
    return (detector or default_detector()).detect(text)


def extract(html: bytes | str, self_host: OnionAddress | str, detector: LanguageDetector | None = None) -> ExtractedPage:
    """Run every extractor over one document."""
    if not html:
        return ExtractedPage(languages=[("und", 0.0)])
    parser = _tokenize(html)
    text = _collapse(parser.text)
    meta = dict(parser.meta)
    title = _collapse(parser.title)
    if title:
        meta["title"] = title
    return ExtractedPage(
        text=text,
        scheme="".join(parser.scheme),
        links=extract_links(html, self_host),
        title=title,
        metadata=meta,
        languages=detect_language(text, detector),
    )
