import pytest
from hypothesis import HealthCheck, settings

from onionscope.synth import SynthSpec, generate, write_fixture

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_corpus():
    return generate(SynthSpec(n_uniques=12, fanout="fixed", fanout_mean=2, rng_seed=5, volatility=0.3))


@pytest.fixture(scope="session")
def small_fixture(small_corpus, tmp_path_factory):
    return write_fixture(small_corpus, tmp_path_factory.mktemp("fixture"))


def v3(i: int) -> str:
    """A syntactically valid v3 onion host, distinct for every ``i``."""
    alphabet = "abcdefghijklmnopqrstuvwxyz234567"
    digits = []
    n = i
    for _ in range(8):
        digits.append(alphabet[n % 32])
        n //= 32
    return ("a" * 48 + "".join(digits)) + ".onion"


def page_html(host: str, links=()) -> bytes:
    anchors = "".join(f'<a href="http://{t}/">{t[:6]}</a>' for t in links)
    return f"<html><head><title>{host[:10]}</title></head><body><p>site</p>{anchors}</body></html>".encode()


class MemTransport:
    """In-memory transport: ``pages`` maps host to linked hosts, ``plan`` scripts failures.

    ``plan[host]`` is a list of tokens (``ok``, ``timeout``, ``503``) consumed per
    attempt. Every fetch logs ``("start", host, thread)`` and ``("end", host, thread)``
    into ``events`` under one lock, which gives a global fetch order.
    """

    def __init__(self, pages, plan=None, fatal_after=None, jitter=None):
        import threading
        self.pages = pages
        self.plan = {h: list(p) for h, p in (plan or {}).items()}
        self.lock = threading.Lock()
        self.events = []
        self.calls = 0
        self.fatal_after = fatal_after
        self.jitter = jitter

    def mark(self, *event):
        with self.lock:
            self.events.append(event)

    def fetch(self, url, timeout):
        import threading
        import time
        from onionscope.corpus import normalize_url
        from onionscope.scheduler import TIMEOUT, FetchOutcome, TransportFatal
        host = normalize_url(url).host
        me = threading.current_thread().name
        with self.lock:
            self.calls += 1
            if self.fatal_after is not None and self.calls > self.fatal_after:
                raise TransportFatal("proxy went away")
            self.events.append(("start", host, me))
            plan = self.plan.get(host)
            token = plan.pop(0) if plan else "ok"
        if self.jitter:
            time.sleep(self.jitter(host))
        if token == "timeout" or host not in self.pages:
            out = FetchOutcome(TIMEOUT)
        elif token == "503":
            out = FetchOutcome(503)
        else:
            out = FetchOutcome(200, page_html(host, self.pages[host]), 1.0, "text/html")
        self.mark("end", host, me)
        return out


def check_barrier(events, windows):
    """Events between consecutive window markers belong to exactly that window."""
    segments, current = [], []
    for ev in events:
        if ev[0] == "window":
            segments.append(current)
            current = []
        else:
            current.append(ev)
    assert not current, "fetches after the last window"
    assert len(segments) == len(windows)
    for seg, links in zip(segments, windows):
        starts = sorted(h for kind, h, _ in seg if kind == "start")
        ends = sorted(h for kind, h, _ in seg if kind == "end")
        assert starts == ends == sorted(links)


ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record_acceptance(ac: str, ok: bool, detail: str) -> None:
    """Remember one criterion's outcome; merged with earlier parts of the same criterion."""
    prev = ACCEPTANCE.get(ac)
    if prev is not None:
        ok = ok and prev[0]
        detail = f"{prev[1]}; {detail}"
    ACCEPTANCE[ac] = (ok, detail)
    print(f"{ac} {'PASS' if ok else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        ok, detail = ACCEPTANCE[ac]
        terminalreporter.write_line(f"{ac} {'PASS' if ok else 'FAIL'}  {detail}")
