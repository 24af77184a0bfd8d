from onionscope.corpus import LinkClass
from onionscope.extractor import (extract, extract_links, extract_metadata, extract_scheme, extract_text,
                                  detect_language)

OWN = "pg6mmjiyjmcrsslvykfwnntlaru7p5svn6y2ymmju6nubxndf4pscryd.onion"
OTHER = "duskgytldkxiuqc6.onion"


def test_text_drops_script_and_decodes_entities():
    html = "<html><head><style>p{}</style><script>var a=1;</script></head><body><p>Fish &amp; chips</p>" \
           "<p>second</p></body></html>"
    assert extract_text(html) == "Fish & chips second"


def test_scheme_keeps_attribute_names_only():
    html = '<div class="a" id="b"><p>hi</p><br/></div>'
    assert extract_scheme(html) == "<div class id><p></p><br></div>"


def test_scheme_ignores_text_changes():
    a = '<p class="x">one</p>'
    b = '<p class="y">two words</p>'
    assert extract_scheme(a) == extract_scheme(b)


def test_malformed_markup_still_parses():
    html = "<div><p>unclosed <b>bold</div></span>tail"
    assert "unclosed bold" in extract_text(html)
    assert extract_scheme(html).startswith("<div><p><b></div></span>")


def test_links_are_classified_and_deduplicated():
    html = f'''<a href="/login">in</a> <a href="http://{OTHER}/x">x</a> see {OTHER} again
               <a href="https://example.com/">s</a> <a href="http://{OWN}/about">me</a>'''
    links = extract_links(html, OWN)
    assert links == [(f"{OWN}/login", LinkClass.OWN), (OTHER, LinkClass.EXTERNAL_ONION),
                     ("https://example.com/", LinkClass.SURFACE), (f"{OWN}/about", LinkClass.OWN)]


def test_onion_in_plain_text_is_found():
    assert extract_links(f"mirror: {OTHER}", OWN) == [(OTHER, LinkClass.EXTERNAL_ONION)]


def test_metadata_has_title_and_meta_pairs():
    html = '<head><title> Shop  Home </title><meta name="Description" content="d"></head>'
    assert extract_metadata(html) == {"title": "Shop Home", "description": "d"}


def test_empty_document():
    page = extract(b"", OWN)
    assert page.text == "" and page.links == [] and page.top_language == "und"


def test_language_of_mixed_page_lists_both():
    en = ("The market sells many products every day and ships them to customers around the world. "
          "Our support team answers questions quickly and keeps your orders private and safe.")
    de = ("Der Markt verkauft jeden Tag viele Produkte und versendet sie an Kunden in der ganzen Welt. "
          "Unser Team beantwortet Fragen schnell und hält deine Bestellungen privat und sicher.")
    langs = [code for code, _ in detect_language(en + "\n" + de)]
    assert "en" in langs and "de" in langs


def test_short_text_is_undetermined():
    assert detect_language("hi") == [("und", 0.0)]
