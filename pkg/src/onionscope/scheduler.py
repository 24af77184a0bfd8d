"""Windowed breadth-first crawl over a pluggable fetch transport.

The coordinator hands a window of up to N links to N worker threads, worker
``i`` taking link ``i``, and waits until every link of the window has an
outcome before the window leaves the to-do list and the next one starts.
Failed links go to the back of the queue until they have used up their
attempts; only external onion links discovered on fetched pages are added.
"""
from __future__ import annotations

import logging
import mimetypes
import os
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

from .corpus import (MAX_ATTEMPTS, CrawlState, CrawlStatus, LinkClass, OnionAddress, PageRecord, Surface,
                     normalize_url)
from .extractor import extract

__all__ = [
    "TIMEOUT", "TRANSPORT_ERROR", "FetchOutcome", "FetchTransport", "TransportFatal", "EmptyQueue",
    "ContractViolation", "TodoList", "Window", "next_window", "fetch_textonly", "is_textual", "run_crawl",
    "CrawlResult", "CrawlConfig", "FixtureTransport", "ProxyTransport", "LogicalClock", "proxy_endpoint",
]

log = logging.getLogger(__name__)

TIMEOUT = "timeout"
TRANSPORT_ERROR = "transport_error"
DEFAULT_TIMEOUT = 30.0
PROXY_ENV = "MIMIR_PROXY"


class TransportFatal(RuntimeError):
    """The transport cannot continue at all (e.g. the proxy is gone)."""

    def __init__(self, message: str, records: list[PageRecord] | None = None):
        super().__init__(message)
        self.records = records or []


class EmptyQueue(LookupError):
    pass


class ContractViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class FetchOutcome:
    status: int | str
    body: bytes = b""
    elapsed: float = 0.0          # milliseconds
    content_type: str = ""
    media_skipped: bool = False

    def __post_init__(self):
        if self.body and (self.status != 200 or not is_textual(self.content_type)):
            raise ValueError("a body is only kept for textual 200 responses")

    @property
    def ok(self) -> bool:
        return self.status == 200


class FetchTransport(Protocol):
    def fetch(self, url: str, timeout: float) -> FetchOutcome: ...


def is_textual(content_type: str) -> bool:
    mime = content_type.split(";", 1)[0].strip().lower()
    if not mime:
        return False
    return (mime.startswith("text/") or mime.endswith("+xml") or mime.startswith("application/xhtml")
            or mime == "application/json")


def fetch_textonly(transport, url: str, timeout: float) -> FetchOutcome:
    """Fetch and drop any non-textual or non-200 body."""
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    raw = transport.fetch(url, timeout)
    if raw.status != 200:
        return FetchOutcome(raw.status, b"", raw.elapsed, raw.content_type)
    if not is_textual(raw.content_type):
        return FetchOutcome(200, b"", raw.elapsed, raw.content_type, media_skipped=True)
    return FetchOutcome(200, raw.body, raw.elapsed, raw.content_type)


# -- to-do list and windows ---------------------------------------------------

@dataclass
class Window:
    links: tuple[str, ...]
    outcomes: list[FetchOutcome | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.outcomes:
            self.outcomes = [None] * len(self.links)

    @property
    def complete(self) -> bool:
        return all(o is not None for o in self.outcomes)


class TodoList:
    """FIFO of hosts; a window's links stay queued until the window completes."""

    def __init__(self, hosts: Iterable[str] = ()):
        self.queue: deque[str] = deque()
        self.seen: set[str] = set()
        self.pending: Window | None = None
        for h in hosts:
            self.enqueue(h)

    def __len__(self) -> int:
        return len(self.queue)

    def __contains__(self, host: str) -> bool:
        return host in self.queue

    def enqueue(self, host: str) -> bool:
        """Add a never-seen host; returns False for hosts seen before."""
        if host in self.seen:
            return False
        self.seen.add(host)
        self.queue.append(host)
        return True

    def requeue(self, host: str) -> None:
        """Send a failed host to the back for another attempt."""
        if host not in self.seen:
            raise ContractViolation(f"{host} was never enqueued")
        if host in self.queue:
            raise ContractViolation(f"{host} is already queued")
        self.queue.append(host)

    def commit(self, window: Window) -> None:
        if window is not self.pending:
            raise ContractViolation("committing a window that is not pending")
        if not window.complete:
            raise ContractViolation("window still has links without an outcome")
        for _ in window.links:
            self.queue.popleft()
        self.pending = None


def next_window(todo: TodoList, n: int) -> Window:
    """The next up-to-``n`` links in FIFO order; one window at a time."""
    if n < 1:
        raise ValueError("window size must be >= 1")
    if todo.pending is not None:
        raise ContractViolation("previous window is still pending")
    if not todo.queue:
        raise EmptyQueue("to-do list is empty")
    links = tuple(todo.queue[i] for i in range(min(n, len(todo.queue))))
    todo.pending = Window(links)
    return todo.pending


# -- workers --------------------------------------------------------------------

class _WorkerPool:
    """N threads, each with its own inbox; slot ``i`` of a window goes to worker ``i``."""

    def __init__(self, n: int, job: Callable[[str], FetchOutcome]):
        self.job = job
        self.results: queue.Queue = queue.Queue()
        self.inboxes = [queue.Queue() for _ in range(n)]
        self.threads = [threading.Thread(target=self._loop, args=(i,), daemon=True) for i in range(n)]
        for t in self.threads:
            t.start()

    def _loop(self, i: int) -> None:
        inbox = self.inboxes[i]
        while True:
            item = inbox.get()
            if item is None:
                return
            slot, url = item
            try:
                self.results.put((slot, self.job(url), None))
            except BaseException as exc:  # handed back to the coordinator
                self.results.put((slot, None, exc))

    def run(self, window: Window) -> None:
        for slot, url in enumerate(window.links):
            self.inboxes[slot].put((slot, url))
        errors = []
        for _ in window.links:
            slot, outcome, exc = self.results.get()
            if exc is not None:
                errors.append(exc)
                outcome = FetchOutcome(TRANSPORT_ERROR)
            window.outcomes[slot] = outcome
        fatal = [e for e in errors if isinstance(e, TransportFatal)]
        if fatal:
            raise fatal[0]
        for e in errors:
            log.warning("worker error: %s", e)

    def close(self) -> None:
        for inbox in self.inboxes:
            inbox.put(None)
        for t in self.threads:
            t.join()


class LogicalClock:
    """Deterministic time: one second per crawl window."""

    def __init__(self, start: float = 1_600_000_000.0):
        self.now = start

    def __call__(self) -> float:
        t = self.now
        self.now += 1.0
        return t


@dataclass
class CrawlConfig:
    workers: int = 4
    timeout: float = DEFAULT_TIMEOUT
    max_attempts: int = MAX_ATTEMPTS


@dataclass
class CrawlResult:
    records: list[PageRecord]
    windows: int = 0
    fetches: int = 0

    def by_host(self) -> dict[str, PageRecord]:
        return {r.url: r for r in self.records}

    def count(self, state: CrawlState) -> int:
        return sum(r.status.state is state for r in self.records)


def _host_of(raw: str) -> tuple[str, bool]:
    addr = normalize_url(raw)
    return addr.host, isinstance(addr, Surface)


def _bfs_depths(records: dict[str, PageRecord], seeds: Sequence[str]) -> None:
    adjacency: dict[str, list[str]] = {}
    for host, rec in records.items():
        adjacency[host] = [u for u, cls in rec.link_list if cls is LinkClass.EXTERNAL_ONION and u in records]
    depth = {s: 0 for s in seeds}
    frontier = deque(seeds)
    while frontier:
        u = frontier.popleft()
        for v in adjacency.get(u, ()):
            if v not in depth:
                depth[v] = depth[u] + 1
                frontier.append(v)
    for host, rec in records.items():
        rec.depth = depth.get(host, rec.depth)


def run_crawl(seeds: Sequence, transport, workers: int = 4, config: CrawlConfig | None = None,
              clock: Callable[[], float] | None = None, resume_from: Sequence[PageRecord] | None = None,
              window_observer: Callable[[int, Window], None] | None = None,
              detector=None) -> CrawlResult:
    """Crawl from ``seeds`` (Seed objects or URL strings) until the to-do list drains."""
    config = config or CrawlConfig(workers=workers)
    n = workers if workers else config.workers
    if n < 1:
        raise ValueError("need at least one worker")
    clock = clock or LogicalClock()

    records: dict[str, PageRecord] = {}
    surface_hosts: set[str] = set()
    seed_hosts: list[str] = []
    todo = TodoList()

    if resume_from:
        for rec in resume_from:
            records[rec.url] = rec
            todo.seen.add(rec.url)
            if rec.depth == 0:
                seed_hosts.append(rec.url)
            if rec.status.state is CrawlState.PENDING:
                todo.queue.append(rec.url)
            if isinstance(rec.address, Surface):
                surface_hosts.add(rec.url)
        if records and clock is not None and isinstance(clock, LogicalClock):
            last = max((r.first_seen for r in records.values() if r.timestamps), default=None)
            stamps = [r.timestamps[-1] for r in records.values() if r.timestamps]
            if last is not None and stamps:
                from .corpus import parse_timestamp
                clock.now = max(clock.now, max(parse_timestamp(s) for s in stamps) + 1.0)
    for seed in seeds:
        raw = seed if isinstance(seed, str) else seed.host
        host, is_surface = _host_of(raw)
        if host not in records:
            records[host] = PageRecord(url=host, depth=0)
            seed_hosts.append(host)
        if is_surface:
            surface_hosts.add(host)
        todo.enqueue(host)

    def job(host: str) -> FetchOutcome:
        return fetch_textonly(transport, f"http://{host}/", config.timeout)

    pool = _WorkerPool(n, job)
    windows = fetches = 0
    try:
        while todo.queue:
            window = next_window(todo, n)
            now = clock()
            for host in window.links:
                records[host].add_timestamp(now)
            try:
                pool.run(window)
            except TransportFatal as exc:
                todo.pending = None
                exc.records = list(records.values())
                raise
            todo.commit(window)
            windows += 1
            fetches += len(window.links)
            for host, outcome in zip(window.links, window.outcomes):
                _apply(host, outcome, records, todo, config, surface_hosts, detector)
            if window_observer is not None:
                window_observer(windows - 1, window)
    finally:
        pool.close()
    _bfs_depths(records, seed_hosts)
    return CrawlResult(list(records.values()), windows, fetches)


def _apply(host, outcome, records, todo, config, surface_hosts, detector) -> None:
    rec = records[host]
    status = rec.status
    status.attempts += 1
    status.last_code = outcome.status if isinstance(outcome.status, int) else None
    if outcome.ok:
        status.state = CrawlState.FETCHED
        rec.set_html(outcome.body)
        page = extract(rec.html, host, detector)
        rec.metadata = page.metadata
        rec.link_list = page.links
        rec.languages = [code for code, _ in page.languages] or ["und"]
        if host in surface_hosts:
            return  # surface seeds are visited, their links are not followed
        for url, cls in page.links:
            if cls is not LinkClass.EXTERNAL_ONION:
                continue
            target = records.get(url)
            if target is None:
                target = records[url] = PageRecord(url=url, depth=rec.depth + 1)
            target.referenced_by.add(host)
            todo.enqueue(url)
        return
    if status.attempts >= config.max_attempts:
        status.state = CrawlState.UNREACHABLE
    else:
        todo.requeue(host)


# -- transports -------------------------------------------------------------------

class FixtureTransport:
    """Serves ``<root>/<host>/index.html``; ``<root>/<host>.schedule`` scripts failures.

    A schedule is a whitespace-separated sequence of ``ok``, ``timeout`` and
    ``503`` tokens consumed one per attempt on that host; attempts beyond the
    end of the schedule succeed. Hosts without a directory time out.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise FileNotFoundError(f"fixture corpus {self.root} does not exist")
        self._attempts: dict[str, int] = {}
        self._lock = threading.Lock()
        self.log: list[tuple[str, int | str]] = []

    def schedule(self, host: str) -> list[str]:
        path = self.root / f"{host}.schedule"
        if not path.is_file():
            return []
        tokens = path.read_text(encoding="utf-8").split()
        bad = [t for t in tokens if t not in ("ok", "timeout", "503")]
        if bad:
            raise ValueError(f"{path}: unknown schedule tokens {bad}")
        return tokens

    def fetch(self, url: str, timeout: float) -> FetchOutcome:
        host = normalize_url(url).host
        with self._lock:
            k = self._attempts.get(host, 0)
            self._attempts[host] = k + 1
        tokens = self.schedule(host)
        token = tokens[k] if k < len(tokens) else "ok"
        if token == "timeout":
            outcome = FetchOutcome(TIMEOUT, elapsed=timeout * 1000.0)
        elif token == "503":
            outcome = FetchOutcome(503)
        else:
            outcome = self._serve(host, timeout)
        with self._lock:
            self.log.append((host, outcome.status))
        return outcome

    def _serve(self, host: str, timeout: float) -> FetchOutcome:
        site = self.root / host
        index = site / "index.html"
        if index.is_file():
            return FetchOutcome(200, index.read_bytes(), 1.0, "text/html; charset=utf-8")
        if site.is_dir():
            for f in sorted(site.iterdir()):
                if f.name.startswith("index."):
                    ctype = mimetypes.guess_type(f.name)[0] or "application/octet-stream"
                    body = f.read_bytes()
                    return FetchOutcome(200, body if is_textual(ctype) else b"", 1.0, ctype)
        return FetchOutcome(TIMEOUT, elapsed=timeout * 1000.0)


def proxy_endpoint(configured: str | None) -> str | None:
    """``MIMIR_PROXY`` wins over the configured endpoint."""
    return os.environ.get(PROXY_ENV) or configured


class ProxyTransport:
    """HTTP over a SOCKS5 proxy (hostname resolution on the proxy side).

    Bodies are only read for textual content types. Needs the optional
    ``requests`` and ``PySocks`` packages.
    """

    def __init__(self, endpoint: str | None = None, user_agent: str = "onionscope/0.1"):
        self.endpoint = proxy_endpoint(endpoint)
        if not self.endpoint:
            raise ValueError(f"no proxy endpoint configured (set --proxy-endpoint or {PROXY_ENV})")
        self.user_agent = user_agent
        try:
            import requests
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise TransportFatal("requests is not installed; install onionscope[proxy]") from exc
        self._requests = requests
        self._local = threading.local()

    def _session(self):
        s = getattr(self._local, "session", None)
        if s is None:
            s = self._local.session = self._requests.Session()
            proxy = f"socks5h://{self.endpoint}"
            s.proxies = {"http": proxy, "https": proxy}
            s.headers["User-Agent"] = self.user_agent
        return s

    def fetch(self, url: str, timeout: float) -> FetchOutcome:  # pragma: no cover - needs a live proxy
        requests = self._requests
        start = time.monotonic()
        try:
            with self._session().get(url, timeout=timeout, stream=True) as resp:
                ctype = resp.headers.get("Content-Type", "")
                body = resp.content if resp.status_code == 200 and is_textual(ctype) else b""
                elapsed = (time.monotonic() - start) * 1000.0
                return FetchOutcome(resp.status_code, body, elapsed, ctype, media_skipped=resp.status_code == 200 and not body and not is_textual(ctype))
        except requests.exceptions.Timeout:
            return FetchOutcome(TIMEOUT, elapsed=timeout * 1000.0)
        except requests.exceptions.InvalidSchema as exc:
            raise TransportFatal(f"proxy unusable: {exc}") from exc
        except requests.RequestException:
            return FetchOutcome(TRANSPORT_ERROR, elapsed=(time.monotonic() - start) * 1000.0)
